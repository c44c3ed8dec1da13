import argparse
import sys
from typing import List, Optional

from plastic_lab.app.cli.commands import check, classify, suite
from plastic_lab.app.cli.router import CommandRouter
from plastic_lab.app.core.config import settings
from plastic_lab.app.core.errors import PlasticLabError
from plastic_lab.app.core.logger import logger, setup_logging

cli_router = CommandRouter()
cli_router.include_router(check.router)
cli_router.include_router(suite.router)
cli_router.include_router(classify.router)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plastic-lab",
        description="Exact verification of generalized plastic structures over Q(rho)",
    )
    parser.add_argument("--log-level", default=settings.LOG_LEVEL, help="loguru level for stderr (default WARNING)")
    cli_router.install(parser)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """退出码：0 全部通过，1 有检查失败，2 输入错误"""
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level.upper())
    try:
        return args.handler(args)
    except (PlasticLabError, OSError) as e:
        logger.debug(f"{args.command} aborted: {e!r}")
        print(f"error: {e}", file=sys.stderr)
        return 2


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
