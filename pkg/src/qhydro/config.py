"""Line-oriented scenario configuration.

Grammar: `[section]` headers, `key = value` pairs, `#` comment lines,
blank lines; UTF-8 with LF or CRLF.  Parsing collects every problem (with
its line number) instead of stopping at the first, and rejects unknown
sections, unknown keys, duplicate keys, and malformed values.
"""

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError

SCENARIO_NAMES = (
    "free_packet",
    "damped_plane_wave",
    "doebner_goldin",
    "wigner_check",
    "ergodic_average",
    "master_decoherence",
    "dual_space_homogeneous",
    "dual_space_field",
    "qse_teleport_free",
    "qse_teleport_harmonic",
    "qse_thermal",
    "dispersion_tables",
)

_FLOAT_KEYS_PHYSICS = ("hbar", "m", "D", "b", "kappa", "epsilon", "E", "F",
                       "omega", "T", "lambda", "kB", "sigma0", "k0", "x0")

_SCHEMA = {
    "scenario": {"name": str, "seed": int},
    "grid": {"L": float, "N": int},
    "physics": {k: float for k in _FLOAT_KEYS_PHYSICS},
    "run": {"dt": float, "steps": int, "stride": int, "out": str},
}

_PHYSICS_DEFAULTS = {"hbar": 1.0, "m": 1.0, "kB": 1.0}

#: keys each scenario insists on, checked before anything is allocated
_REQUIRED = {
    "free_packet": ["grid.L", "grid.N", "run.dt", "run.steps"],
    "damped_plane_wave": ["grid.N", "physics.D", "run.dt", "run.steps"],
    "doebner_goldin": ["grid.L", "grid.N", "physics.D", "run.dt", "run.steps"],
    "wigner_check": ["grid.L", "grid.N"],
    "ergodic_average": [],
    "master_decoherence": ["physics.D", "run.dt", "run.steps"],
    "dual_space_homogeneous": ["physics.E", "physics.epsilon"],
    "dual_space_field": ["grid.L", "grid.N", "physics.E", "physics.epsilon",
                         "run.dt", "run.steps"],
    "qse_teleport_free": ["grid.L", "grid.N", "physics.b", "physics.kappa",
                          "run.steps"],
    "qse_teleport_harmonic": ["grid.L", "grid.N", "physics.b", "physics.omega",
                              "run.steps"],
    "qse_thermal": ["grid.L", "grid.N", "physics.b", "physics.T", "run.steps"],
    "dispersion_tables": ["physics.b", "physics.kappa", "physics.T"],
}


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    seed: int = 0
    grid: dict = field(default_factory=dict)
    physics: dict = field(default_factory=dict)
    run: dict = field(default_factory=dict)

    def phys(self, key, default=None):
        if key in self.physics:
            return self.physics[key]
        if key in _PHYSICS_DEFAULTS:
            return _PHYSICS_DEFAULTS[key]
        return default

    def require(self, section, key):
        block = getattr(self, section)
        if key not in block:
            raise ConfigError([f"scenario {self.name!r} needs {section}.{key}"])
        return block[key]

    def as_dict(self):
        return {"scenario": {"name": self.name, "seed": self.seed},
                "grid": dict(self.grid), "physics": dict(self.physics),
                "run": dict(self.run)}


def _parse_value(kind, raw, lineno, key, problems):
    try:
        if kind is int:
            val = int(raw, 0)
        elif kind is float:
            val = float(raw)
            if not np.isfinite(val):
                problems.append(f"line {lineno}: {key} must be finite, got {raw!r}")
                return None
        else:
            val = raw
        return val
    except ValueError:
        problems.append(
            f"line {lineno}: cannot parse {key} = {raw!r} as {kind.__name__}")
        return None


def parse_config(source) -> ScenarioConfig:
    """Parse a config from a file path, or from literal text if the string
    contains a newline.  Raises ConfigError carrying every problem found."""
    text = str(source)
    if "\n" not in text:
        path = Path(text)
        if not path.exists():
            raise ConfigError([f"config file not found: {text}"])
        text = path.read_text(encoding="utf-8")

    problems = []
    sections = {}
    seen_lines = {}
    current = None
    for lineno, raw_line in enumerate(text.split("\n"), start=1):
        line = raw_line.rstrip("\r").strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if name not in _SCHEMA:
                problems.append(f"line {lineno}: unknown section [{name}]")
                current = None
            else:
                current = name
                sections.setdefault(name, {})
            continue
        if "=" not in line:
            problems.append(f"line {lineno}: expected 'key = value', got {line!r}")
            continue
        if current is None:
            problems.append(f"line {lineno}: key outside any known section")
            continue
        key, _, raw = line.partition("=")
        key = key.strip()
        raw = raw.strip()
        schema = _SCHEMA[current]
        if key not in schema:
            problems.append(f"line {lineno}: unknown key {key!r} in [{current}]")
            continue
        full = (current, key)
        if full in seen_lines:
            problems.append(
                f"line {lineno}: duplicate key {key!r} in [{current}] "
                f"(first set at line {seen_lines[full]})")
            continue
        seen_lines[full] = lineno
        val = _parse_value(schema[key], raw, lineno, key, problems)
        if val is not None:
            sections[current][key] = val

    scen = sections.get("scenario", {})
    name = scen.get("name")
    if name is None:
        problems.append("missing scenario.name")
    elif name not in SCENARIO_NAMES:
        problems.append(f"unknown scenario {name!r}; see the registry")

    if name in _REQUIRED:
        present = {f"{s}.{k}" for s, block in sections.items() for k in block}
        for req in _REQUIRED[name]:
            if req not in present:
                problems.append(f"scenario {name!r} requires {req}")

    grid = sections.get("grid", {})
    physics = sections.get("physics", {})
    run = sections.get("run", {})
    if "N" in grid and (grid["N"] < 8 or grid["N"] % 2):
        problems.append("grid.N must be an even integer >= 8")
    if "L" in grid and grid["L"] <= 0:
        problems.append("grid.L must be positive")
    if "dt" in run and run["dt"] <= 0:
        problems.append("run.dt must be positive")
    if "steps" in run and run["steps"] < 1:
        problems.append("run.steps must be >= 1")
    if "stride" in run and run["stride"] < 1:
        problems.append("run.stride must be >= 1")

    kappa = physics.get("kappa")
    lam = physics.get("lambda")
    if kappa is not None and lam is not None and kappa * lam >= 1.0:
        problems.append(
            f"kappa*lambda = {kappa * lam:g} violates the teleportation-length "
            f"constraint kappa*lambda < 1")

    if problems:
        raise ConfigError(problems)
    return ScenarioConfig(name=name, seed=scen.get("seed", 0), grid=grid,
                          physics=physics, run=run)
