"""Command-line entry point.

    fluxgauge <scenario> [--config path] [--seed N] [--out dir]
                         [--resolution h] [--allow-non-simple]
    fluxgauge list

Exit codes: 0 all proven bounds hold, 1 a proven bound was violated,
2 invalid configuration, 3 runtime failure.  Findings against the
half-strength cap variants and probe rows never change the exit code.
"""

from __future__ import annotations

import argparse
import sys
import traceback
from collections import Counter

from .config import ExperimentConfig
from .errors import ConfigInvalidError, FluxgaugeError

EXIT_VIOLATION = 1
EXIT_CONFIG_INVALID = 2
EXIT_RUNTIME_FAILURE = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fluxgauge",
        description="Check flux integrals over clipped boundaries against "
        "their geometric caps and write a machine-readable report.",
    )
    parser.add_argument(
        "scenario",
        help="scenario name (see 'fluxgauge list') or 'list' to print the catalog",
    )
    parser.add_argument("--config", help="path to a JSON config file")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument("--out", help="override the output directory")
    parser.add_argument(
        "--resolution", type=float, help="override the mesh pitch"
    )
    parser.add_argument(
        "--allow-non-simple",
        action="store_true",
        help="flag self-intersecting curves instead of rejecting them",
    )
    return parser


def _print_catalog() -> None:
    from .scenarios import list_scenarios

    for entry in list_scenarios():
        print(f"{entry['name']}")
        print(f"    {entry['description']}")
        print(f"    claim: {entry['claim']}")


def _load_config(args) -> ExperimentConfig:
    from .scenarios import default_config

    if args.config:
        base = ExperimentConfig.from_file(args.config)
    else:
        base = ExperimentConfig.from_dict(default_config(args.scenario))
    return base.with_overrides(
        scenario=args.scenario,
        seed=args.seed,
        out_dir=args.out,
        resolution=args.resolution,
        allow_non_simple=True if args.allow_non_simple else None,
    )


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.scenario == "list":
        _print_catalog()
        return 0

    try:
        cfg = _load_config(args)
    except ConfigInvalidError as exc:
        print(f"CONFIG_INVALID: {exc}", file=sys.stderr)
        return EXIT_CONFIG_INVALID

    from .scenarios import run

    try:
        report, paths = run(cfg)
    except ConfigInvalidError as exc:
        print(f"CONFIG_INVALID: {exc}", file=sys.stderr)
        return EXIT_CONFIG_INVALID
    except FluxgaugeError as exc:
        print(f"RUNTIME_FAILURE [{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_RUNTIME_FAILURE
    except Exception:
        traceback.print_exc()
        print("RUNTIME_FAILURE [UNEXPECTED]", file=sys.stderr)
        return EXIT_RUNTIME_FAILURE

    verdicts = Counter(r.report.verdict for r in report.records)
    pieces = ", ".join(f"{k}: {v}" for k, v in sorted(verdicts.items())) or "no checks"
    print(f"{report.scenario}: {len(report.records)} checks ({pieces})")
    failures = report.gating_failures()
    failing_ids = {id(r) for r in failures}
    for record in report.records:
        if record.report.verdict != "VIOLATED":
            continue
        tag = "VIOLATED" if id(record) in failing_ids else "finding"
        print(
            f"  {tag} {record.check_id}: lhs={record.report.lhs:.6g} "
            f"rhs={record.report.rhs:.6g}"
        )
    n_figs = len(report.figures)
    print(f"wrote {paths['report']} and {paths['summary']} "
          f"({n_figs} figure{'s' if n_figs != 1 else ''})")
    return EXIT_VIOLATION if failures else 0


if __name__ == "__main__":
    sys.exit(main())
