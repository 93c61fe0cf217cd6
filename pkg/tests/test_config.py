import pytest

from qhydro.config import SCENARIO_NAMES, parse_config
from qhydro.errors import ConfigError

MINIMAL = """\
[scenario]
name = free_packet

[grid]
L = 40.0
N = 256

[run]
dt = 0.01
steps = 100
"""


class TestParsing:
    def test_minimal_config(self):
        cfg = parse_config(MINIMAL)
        assert cfg.name == "free_packet"
        assert cfg.grid == {"L": 40.0, "N": 256}
        assert cfg.run["dt"] == 0.01
        # defaults fill in through phys()
        assert cfg.phys("hbar") == 1.0
        assert cfg.phys("sigma0", 1.0) == 1.0

    def test_parse_from_file(self, tmp_path):
        path = tmp_path / "cfg.ini"
        path.write_text(MINIMAL, encoding="utf-8")
        cfg = parse_config(str(path))
        assert cfg.name == "free_packet"

    def test_missing_file(self):
        with pytest.raises(ConfigError, match="not found"):
            parse_config("no/such/file.ini")

    def test_crlf_accepted(self):
        cfg = parse_config(MINIMAL.replace("\n", "\r\n"))
        assert cfg.grid["N"] == 256

    def test_comments_and_blanks(self):
        text = "# leading comment\n\n" + MINIMAL + "\n# trailing\n"
        assert parse_config(text).name == "free_packet"

    def test_seed_parsed(self):
        text = MINIMAL.replace("name = free_packet",
                               "name = free_packet\nseed = 7")
        assert parse_config(text).seed == 7


class TestErrorReporting:
    def test_unknown_key_with_line_number(self):
        text = MINIMAL + "[physics]\nwarp = 9\n"
        with pytest.raises(ConfigError) as exc:
            parse_config(text)
        msg = str(exc.value)
        assert "unknown key 'warp'" in msg
        assert "line 12" in msg

    def test_duplicate_key_reports_both_lines(self):
        text = MINIMAL + "[physics]\nD = 0.1\nD = 0.2\n"
        with pytest.raises(ConfigError) as exc:
            parse_config(text)
        msg = str(exc.value)
        assert "duplicate key 'D'" in msg
        assert "line 13" in msg and "line 12" in msg

    def test_all_errors_collected(self):
        text = """\
[scenario]
name = nonsense

[grid]
L = -3
N = seven

[blorp]
x = 1
"""
        with pytest.raises(ConfigError) as exc:
            parse_config(text)
        problems = exc.value.problems
        assert len(problems) >= 4
        joined = "\n".join(problems)
        assert "unknown scenario" in joined
        assert "grid.L must be positive" in joined
        assert "cannot parse N" in joined
        assert "unknown section" in joined

    def test_type_error_line_number(self):
        text = MINIMAL.replace("dt = 0.01", "dt = fast")
        with pytest.raises(ConfigError, match=r"line 9: cannot parse dt"):
            parse_config(text)

    def test_nonfinite_rejected(self):
        text = MINIMAL + "[physics]\nE = inf\n"
        with pytest.raises(ConfigError, match="finite"):
            parse_config(text)

    def test_teleportation_length_constraint_named(self):
        text = """\
[scenario]
name = qse_teleport_free

[grid]
L = 25.6
N = 192

[physics]
b = 1.0
kappa = 2.0
lambda = 0.8

[run]
steps = 10
"""
        with pytest.raises(ConfigError, match="kappa\\*lambda"):
            parse_config(text)

    def test_required_keys_per_scenario(self):
        text = """\
[scenario]
name = damped_plane_wave

[grid]
N = 64

[run]
dt = 0.001
steps = 10
"""
        with pytest.raises(ConfigError, match="requires physics.D"):
            parse_config(text)

    def test_missing_scenario_name(self):
        with pytest.raises(ConfigError, match="missing scenario.name"):
            parse_config("[grid]\nL = 10\nN = 16\n")

    def test_key_outside_section(self):
        with pytest.raises(ConfigError, match="outside any known section"):
            parse_config("L = 10\n" + MINIMAL)


class TestRegistry:
    def test_names_are_stable(self):
        assert len(SCENARIO_NAMES) == 12
        assert "qse_teleport_free" in SCENARIO_NAMES

    def test_default_configs_parse_and_cover_registry(self):
        from qhydro.default_configs import DEFAULT_CONFIGS

        assert set(DEFAULT_CONFIGS) == set(SCENARIO_NAMES)
        for name, text in DEFAULT_CONFIGS.items():
            assert parse_config(text).name == name

    def test_shipped_config_files_match_defaults(self):
        from pathlib import Path

        from qhydro.default_configs import DEFAULT_CONFIGS

        root = Path(__file__).resolve().parent.parent / "configs"
        for name, text in DEFAULT_CONFIGS.items():
            assert (root / f"{name}.ini").read_text(encoding="utf-8") == text
