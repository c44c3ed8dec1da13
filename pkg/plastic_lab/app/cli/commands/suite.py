import argparse

from plastic_lab.app.cli.router import CommandRouter, add_output_flag, add_run_flags, emit
from plastic_lab.app.services.suites import suite_runner

router = CommandRouter()


def _arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("suite", help=f"suite id or 'all' ({', '.join(suite_runner.known())})")
    add_run_flags(parser)
    add_output_flag(parser)


@router.command("suite", help="run a property suite on generated instances", arguments=_arguments)
def suite(args: argparse.Namespace) -> int:
    if args.suite == "all":
        report = suite_runner.run_all(args.trials, args.seed, args.dim, args.float_crosscheck)
    else:
        report = suite_runner.run_suite(args.suite, args.trials, args.seed, args.dim, args.float_crosscheck)
    emit(report, args.output)
    return 0 if report.verdict == "pass" else 1
