"""Command-line driver.

    turboeq sweep CONFIG [--seed N] [--threads N] [--out PATH]
    turboeq verify
    turboeq scenario list

Exit status: 0 success, 1 verification failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .harness import ConfigError, load_sweep_config, run_sweep, scenario_summary
from .link import SCENARIOS

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_CONFIG = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="turboeq", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sweep = sub.add_parser("sweep", help="run an Eb/N0 sweep from a JSON config")
    sweep.add_argument("config")
    sweep.add_argument("--seed", type=int, help="override the master seed")
    sweep.add_argument("--threads", type=int, help="worker processes")
    sweep.add_argument("--out", help="CSV output path (overrides the config)")

    sub.add_parser("verify", help="run the oracle and invariant checks")

    scen = sub.add_parser("scenario", help="inspect built-in scenarios")
    scen.add_argument("action", choices=["list"])
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(message)s")

    if args.command == "scenario":
        for sc in SCENARIOS.values():
            print(json.dumps(scenario_summary(sc)))
        return EXIT_OK

    if args.command == "verify":
        from .verify import run_verification_suite

        report = run_verification_suite()
        return EXIT_OK if report.passed else EXIT_VERIFY_FAILED

    try:
        cfg = load_sweep_config(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
        if args.threads is not None:
            if args.threads < 1:
                raise ConfigError("--threads must be >= 1")
            cfg.threads = args.threads
        if args.out is not None:
            cfg.output = args.out
        records = run_sweep(cfg)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if cfg.output is None:
        from .harness import CSV_HEADER

        print(",".join(CSV_HEADER))
        for r in records:
            print(f"{r.scenario},{r.algorithm},{r.budget},{r.ebno_db!r},{r.iteration},"
                  f"{r.bit_errors},{r.bits},{r.frames},{r.frame_errors},{r.seed}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
