"""qhydro command line: run scenario configs, check the registry, list it.

Exit codes: 0 all checks passed, 1 check failure, 2 configuration error,
3 solver divergence.
"""

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .config import SCENARIO_NAMES, parse_config
from .default_configs import DEFAULT_CONFIGS
from .errors import ConfigError, NegativeDensity, QhydroError, StepDiverged
from .scenarios import emit_plot_script, run_scenario

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG_ERROR = 2
EXIT_DIVERGED = 3


def _print_summary(summary):
    print(f"scenario {summary.scenario}: "
          f"{'PASS' if summary.passed else 'FAIL'} "
          f"({summary.wall_time:.2f}s)")
    for c in summary.checks:
        mark = "PASS" if c.passed else "FAIL"
        extra = f"  [{c.detail}]" if c.detail else ""
        print(f"  {mark} {c.name}: value={c.value:.6g} tolerance={c.tolerance:.6g}{extra}")


def _run_one(source, out_dir):
    cfg = parse_config(source)
    summary = run_scenario(cfg, out_dir)
    emit_plot_script(summary)
    return summary


def _execute(source, out_dir):
    """Worker-safe wrapper returning (summary | None, exit_code, message)."""
    try:
        summary = _run_one(source, out_dir)
        code = EXIT_OK if summary.passed else EXIT_CHECK_FAILED
        return summary, code, ""
    except ConfigError as exc:
        return None, EXIT_CONFIG_ERROR, "\n".join(f"config error: {p}"
                                                  for p in exc.problems)
    except (StepDiverged, NegativeDensity) as exc:
        return None, EXIT_DIVERGED, f"solver diverged: {exc}"
    except QhydroError as exc:
        return None, EXIT_DIVERGED, f"solver error: {exc}"


def cmd_run(args):
    configs = args.config
    worst = EXIT_OK
    if len(configs) == 1:
        out = args.out
        summary, code, message = _execute(configs[0], out)
        if message:
            print(message, file=sys.stderr)
        if summary is not None:
            _print_summary(summary)
        return code

    base = Path(args.out) if args.out else Path("runs")
    jobs = []
    for source in configs:
        try:
            cfg = parse_config(source)
        except ConfigError as exc:
            for p in exc.problems:
                print(f"config error ({source}): {p}", file=sys.stderr)
            worst = max(worst, EXIT_CONFIG_ERROR)
            continue
        jobs.append((source, str(base / cfg.name)))

    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_execute, *zip(*jobs)))
    else:
        results = [_execute(src, out) for src, out in jobs]
    for summary, code, message in results:
        if message:
            print(message, file=sys.stderr)
        if summary is not None:
            _print_summary(summary)
        worst = max(worst, code)
    return worst


def cmd_check(args):
    names = list(SCENARIO_NAMES) if args.scenario == "all" else [args.scenario]
    unknown = [n for n in names if n not in DEFAULT_CONFIGS]
    if unknown:
        print(f"unknown scenario: {', '.join(unknown)}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    worst = EXIT_OK
    for name in names:
        out_dir = Path(args.out or "runs/check") / name
        summary, code, message = _execute(DEFAULT_CONFIGS[name], str(out_dir))
        if message:
            print(message, file=sys.stderr)
        if summary is not None:
            _print_summary(summary)
        worst = max(worst, code)
    return worst


def cmd_list(_args):
    for name in SCENARIO_NAMES:
        print(name)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="qhydro",
        description="quantum-hydrodynamics scenario runner")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one or more scenario configs")
    p_run.add_argument("config", nargs="+",
                       help="config file path(s), or literal config text")
    p_run.add_argument("--out", default=None, help="output directory")
    p_run.add_argument("--jobs", type=int, default=1,
                       help="run independent configs concurrently")
    p_run.set_defaults(func=cmd_run)

    p_check = sub.add_parser("check",
                             help="run a scenario (or all) with its built-in "
                                  "config and report pass/fail")
    p_check.add_argument("scenario", help="scenario name or 'all'")
    p_check.add_argument("--out", default=None, help="output directory")
    p_check.set_defaults(func=cmd_check)

    p_list = sub.add_parser("list", help="list the scenario registry")
    p_list.set_defaults(func=cmd_list)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
