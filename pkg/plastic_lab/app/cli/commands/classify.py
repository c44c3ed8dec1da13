import argparse

from plastic_lab.app.cli.router import CommandRouter, add_output_flag, emit
from plastic_lab.app.services.classifier import classify as classify_text

router = CommandRouter()


def _arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("matrix", help='2x2 matrix, rows separated by ";", e.g. "0, 1-rho^2; 1, -rho"')
    add_output_flag(parser)


@router.command("classify", help="classify a 2x2 matrix over Q(rho)", arguments=_arguments)
def classify(args: argparse.Namespace) -> int:
    emit(classify_text(args.matrix), args.output)
    return 0
