#!/usr/bin/env python3
"""
MAIN ORCHESTRATOR
Command-line entry point: loads settings and the context, configures logging,
dispatches one command and prints its report on stdout.

Exit codes: 0 success, 1 a verdict is false, 2 usage/parse/config/domain
errors, 3 an exhausted bound (enumeration cap, depth, companions, valuation).
"""

import argparse
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from adapters.context_file import environment_overrides, load_context, load_settings
from adapters.reports import Report, render
from core.telemetry import RunMonitor
from manager.commands import COMMANDS, Workbench
from utils.helpers import EXIT_OK, EXIT_USAGE, EndoAlgebraError, exit_code_for
from utils.logger import configure_logging, get_logger

logger = get_logger(__name__)

BASE_DIR = Path(__file__).resolve().parent
DEFAULT_SETTINGS = BASE_DIR / 'config' / 'settings.json'
DEFAULT_CONTEXT = BASE_DIR / 'config' / 'contexts' / 'times3.conf'


def build_arg_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog='endoalg',
        description="Exact engine for the universal algebra of an injective group endomorphism.",
        epilog="Put '--' before expressions that start with '-'.",
    )
    p.add_argument("command", choices=sorted(COMMANDS), help="Command to run.")
    p.add_argument("inputs", nargs='*', help="Expressions, @file.alg inputs, (g,i,n), v@N or V[m]{i,j}.")
    p.add_argument("--config", default=None, help=f"Context file (default {DEFAULT_CONTEXT.name}).")
    p.add_argument("--settings", default=None, help="Engine settings JSON (default config/settings.json).")
    p.add_argument("--depth", type=int, default=None, help="Override the context max_depth.")
    p.add_argument("--window", type=int, default=None, help="Oracle window radius.")
    p.add_argument("--seed", type=int, default=None, help="Seed for randomized checks.")
    p.add_argument("--bound", type=int, default=None, help="Sample bound for relations-check.")
    p.add_argument("--levels", type=int, default=None, help="Coset levels (cosets) or spectrum depth (report-all).")
    p.add_argument("--exponent", type=int, default=None, help="Rebuild projections at this exponent p.")
    p.add_argument("--input", default=None, help="Q-form input file for report-all.")
    p.add_argument("--json", action="store_true", help="Emit the report as JSON.")
    p.add_argument("--timing", action="store_true", help="Attach stage timings to the report.")
    p.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR (logs go to stderr).")
    return p


class Orchestrator:
    """Resolves configuration layers (CLI > environment > files) and runs one command"""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.monitor = RunMonitor()
        env = environment_overrides()
        self.settings: Dict[str, Any] = load_settings(args.settings or env.get('settings') or DEFAULT_SETTINGS)

        log_cfg = self.settings['logging']
        configure_logging(
            (args.log_level or env.get('log_level') or log_cfg['level']).upper(),
            log_cfg['log_to_file'],
            log_cfg['directory'],
        )

        overrides = {
            'max_depth': args.depth if args.depth is not None else env.get('max_depth'),
            'enum_cap': env.get('enum_cap'),
        }
        with self.monitor.track('load'):
            spec = load_context(args.config or DEFAULT_CONTEXT, overrides, self.settings['engine'])
            self.bench = Workbench(spec, self.settings, self.monitor)

    def run(self) -> Report:
        logger.info("command start", command=self.args.command)
        with self.monitor.track(self.args.command):
            report = COMMANDS[self.args.command](self.bench, self.args)
        if self.args.timing:
            report.timing = self.monitor.summary()
        self.monitor.log_summary()
        logger.info("command done", command=self.args.command, all_true=report.all_true)
        return report


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_arg_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    try:
        report = Orchestrator(args).run()
    except EndoAlgebraError as e:
        logger.error("command failed", command=args.command, error=type(e).__name__)
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return exit_code_for(e)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE

    print(render(report, args.json))
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
