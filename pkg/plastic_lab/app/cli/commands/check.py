import argparse

from plastic_lab.app.cli.router import CommandRouter, add_output_flag, add_run_flags, emit
from plastic_lab.app.services.scenario_runner import SuiteOptions, run_scenario

router = CommandRouter()


def _arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("scenario", help="path to a scenario JSON file")
    add_run_flags(parser)
    add_output_flag(parser)


@router.command("check", help="run the checks listed in a scenario file", arguments=_arguments)
def check(args: argparse.Namespace) -> int:
    options = SuiteOptions(trials=args.trials, seed=args.seed, dim=args.dim, float_check=args.float_crosscheck)
    report = run_scenario(args.scenario, options)
    emit(report, args.output)
    return 0 if report.verdict == "pass" else 1
