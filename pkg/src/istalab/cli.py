"""Command-line experiment runner.

Subcommands:

* ``run``       solve, diagnose, certify, write trace/report/summary (+figures)
* ``certify``   certificates only, no iteration (oracle supplies the minimizer)
* ``oracle``    sign-pattern enumeration only
* ``spectral``  head/tail spectral profile only

Exit codes: 0 success, 1 invalid configuration, 2 runtime failure,
3 fitted rate exceeded a certificate.
"""

import argparse
import sys

from .errors import ConfigError, IstaLabError
from .experiments import (
    load_config,
    run_certify,
    run_experiment,
    run_oracle,
    run_spectral,
)

_COMMANDS = {
    "run": run_experiment,
    "certify": run_certify,
    "oracle": run_oracle,
    "spectral": run_spectral,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="istalab",
        description="Sparse inverse-problem solver experiments with rate certificates.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("run", "run a full experiment and write artifacts"),
        ("certify", "evaluate certificates without iterating"),
        ("oracle", "sign-pattern enumeration of the exact minimizer"),
        ("spectral", "head/tail spectral profile of the operator"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", required=True, help="experiment config (JSON)")
        cmd.add_argument("--out-dir", default=".", help="artifact directory")
        cmd.add_argument(
            "--seed-override",
            type=int,
            default=None,
            help="replace generator seeds (operator: value, data: value + 1)",
        )
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        result = _COMMANDS[args.command](
            config, args.out_dir, seed_override=args.seed_override
        )
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (IstaLabError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if result.exit_code == 3:
        print(
            "certificate violated: fitted rate exceeds a certified rate "
            f"(summary in {result.out_dir})",
            file=sys.stderr,
        )
    return result.exit_code


def entry_point():
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
