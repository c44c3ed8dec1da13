import argparse
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, Optional

from pydantic import BaseModel

Handler = Callable[[argparse.Namespace], int]
Configure = Callable[[argparse.ArgumentParser], None]


@dataclass
class Command:
    name: str
    help: str
    handler: Handler
    arguments: Optional[Configure] = None


class CommandRouter:
    """子命令注册表；各命令模块各自持有一个 router，再由入口 include_router 汇总"""

    def __init__(self):
        self.commands: Dict[str, Command] = {}

    def command(self, name: str, help: str, arguments: Optional[Configure] = None):
        def decorator(handler: Handler) -> Handler:
            self.commands[name] = Command(name, help, handler, arguments)
            return handler

        return decorator

    def include_router(self, router: "CommandRouter") -> None:
        for name, cmd in router.commands.items():
            if name in self.commands:
                raise ValueError(f"command {name!r} registered twice")
            self.commands[name] = cmd

    def install(self, parser: argparse.ArgumentParser) -> None:
        sub = parser.add_subparsers(dest="command", required=True)
        for cmd in self.commands.values():
            p = sub.add_parser(cmd.name, help=cmd.help)
            if cmd.arguments is not None:
                cmd.arguments(p)
            p.set_defaults(handler=cmd.handler)


def add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--trials", type=int, default=None, help="trials per suite (default 25)")
    parser.add_argument("--seed", type=int, default=None, help="base seed (default 0)")
    parser.add_argument("--dim", type=int, default=None, help="chart dimension for generated instances (default 2)")
    parser.add_argument(
        "--float-crosscheck",
        action="store_true",
        help="also evaluate exact-zero residuals at random points in floating point",
    )


def add_output_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--output", default=None, help="also write the JSON report to this path")


def emit(report: BaseModel, output: Optional[str] = None) -> None:
    text = report.model_dump_json(indent=2)
    print(text)
    if output:
        Path(output).write_text(text + "\n", encoding="utf-8")
