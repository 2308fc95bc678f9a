# src/main.py

"""
Main Module
-----------
Command-line front end of the benchmark: `run`, `sweep`, `gen-tableau`,
`gen-reference` and `verify`.

Exit codes: 0 success, 2 configuration error, 3 numerical error (or a failed
`verify` check), 1 anything else.
"""

import argparse
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from .config_manager import ConfigManager, RunConfig
from .custom_logger import log
from .errors import ConfigError, NumericalError, PinnError
from .helpers import format_real
from .metrics_io import write_grid
from .pipeline import run_pipeline
from .problems import PROBLEM_IDS, REFERENCES
from .prompter import Prompter
from .sweep import display_sweep, parse_axis, run_sweep, write_tables
from .tableau import cache_path, default_precision, load_or_generate, verify_tableau
from .verify import SUITES, display_checks, run_checks

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

REFERENCE_ALIASES = {
    "burgers": "burgers-ct",
    "nls": "nls-ct",
    "allen-cahn": "allen-cahn-dt",
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML run configuration merged over the problem profile")
    common.add_argument("--seed", type=int, help="base random seed")
    common.add_argument("--out", help="output directory")
    common.add_argument("--paper-scale", action="store_true", help="use the full-size benchmark settings")
    common.add_argument("--workers", type=int, help="loss threads (run) or concurrent cells (sweep)")
    common.add_argument(
        "--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"], help="console log level"
    )

    parser = argparse.ArgumentParser(
        prog="pinn-bench.py",
        description="Physics-informed neural network PDE benchmarks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", parents=[common], help="train one benchmark and report its error")
    run.add_argument("--problem", choices=PROBLEM_IDS)
    run.add_argument("--yes", action="store_true", help="skip the paper-scale confirmation")

    sweep = sub.add_parser("sweep", parents=[common], help="Cartesian-product sweep over settings")
    sweep.add_argument("--problem", choices=PROBLEM_IDS)
    sweep.add_argument(
        "--axis", action="append", required=True, metavar="NAME=v1,v2", help="n_u, n_f, layers, neurons, q or dt"
    )
    sweep.add_argument("--yes", action="store_true", help="skip the paper-scale confirmation")

    tableau = sub.add_parser("gen-tableau", parents=[common], help="generate a Gauss-Legendre tableau")
    tableau.add_argument("--q", type=int, required=True, help="number of stages")
    tableau.add_argument("--precision-bits", type=int, help="working precision (default depends on q)")

    reference = sub.add_parser("gen-reference", parents=[common], help="generate reference solution data")
    reference.add_argument(
        "--problem", required=True, choices=sorted(set(REFERENCE_ALIASES) | set(PROBLEM_IDS))
    )

    verify = sub.add_parser("verify", parents=[common], help="run the invariant check suites")
    verify.add_argument("--suite", action="append", choices=list(SUITES), help="suite to run (default: all)")
    verify.add_argument("--full", action="store_true", help="include the q=64 and q=100 tableaux")
    return parser


def flag_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    overrides: Dict[str, Any] = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.out is not None:
        overrides["output_directory"] = args.out
    if args.workers is not None and args.command != "sweep":
        overrides["workers"] = args.workers
    return overrides


def resolve_problem(args: argparse.Namespace, config_manager: ConfigManager, prompter: Prompter) -> Optional[str]:
    """The --problem flag, else the config file's problem, else an interactive choice."""
    problem = getattr(args, "problem", None)
    if problem or args.config:
        return problem
    if sys.stdin.isatty() and config_manager.get_general("ask_for_problem_on_startup", True):
        return prompter.prompt_problem_selection()
    return None


def resolve_config(
    args: argparse.Namespace, config_manager: ConfigManager, prompter: Prompter, problem: Optional[str]
) -> RunConfig:
    config = config_manager.resolve_run_config(problem, args.paper_scale, args.config, flag_overrides(args))
    if args.paper_scale and not getattr(args, "yes", False) and sys.stdin.isatty():
        if not prompter.confirm_paper_scale(config.problem):
            raise ConfigError("paper-scale run cancelled")
    return config


def command_run(args: argparse.Namespace, config_manager: ConfigManager, prompter: Prompter) -> int:
    config = resolve_config(args, config_manager, prompter, resolve_problem(args, config_manager, prompter))
    result = run_pipeline(config)
    print(f"summary={result.directory}")
    print(f"rel_l2={format_real(result.summary.rel_l2)}")
    return EXIT_OK


def command_sweep(args: argparse.Namespace, config_manager: ConfigManager, prompter: Prompter) -> int:
    axes = [parse_axis(text) for text in args.axis]
    base = resolve_config(args, config_manager, prompter, resolve_problem(args, config_manager, prompter))
    workers = args.workers or int(config_manager.get_general("sweep.workers", 1))
    directory = Path(base.output_directory)
    ledger = directory / config_manager.get_general("sweep.ledger", "ledger.yaml")
    results = run_sweep(base, axes, ledger, workers)
    display_sweep(axes, results, title=f"{base.problem} sweep")
    csv_path, md_path = write_tables(directory, axes, results)
    print(f"ledger={ledger}")
    print(f"table={md_path}")
    print(f"csv={csv_path}")
    return EXIT_OK


def command_gen_tableau(args: argparse.Namespace, config_manager: ConfigManager, prompter: Prompter) -> int:
    if args.q < 1:
        raise ConfigError(f"q must be >= 1, got {args.q}")
    if args.precision_bits is not None and args.precision_bits < 64:
        raise ConfigError(f"precision bits must be >= 64, got {args.precision_bits}")
    directory = args.out or config_manager.get_general("cache_directory", "cache")
    bits = args.precision_bits or default_precision(args.q)
    tableau = load_or_generate(args.q, bits, directory)
    report = verify_tableau(tableau)
    for name, value in report.as_rows():
        log.info(f"q={args.q} {name}: {value}")
    if not report.passes():
        log.error(f"Tableau q={args.q} fails its order conditions")
        return EXIT_NUMERICAL
    print(f"tableau={cache_path(directory, args.q, bits)}")
    return EXIT_OK


def command_gen_reference(args: argparse.Namespace, config_manager: ConfigManager, prompter: Prompter) -> int:
    problem_id = REFERENCE_ALIASES.get(args.problem, args.problem)
    config = config_manager.resolve_run_config(problem_id, args.paper_scale, args.config, flag_overrides(args))
    grid = REFERENCES[problem_id](config.cache_directory, config.reference)
    if args.out:
        path = write_grid(Path(args.out) / f"{args.problem}-reference.csv", grid)
        print(f"reference={path}")
    log.info(f"Reference grid for {problem_id}: {grid.t.size} x {grid.x.size} ({', '.join(grid.components)})")
    return EXIT_OK


def command_verify(args: argparse.Namespace, config_manager: ConfigManager, prompter: Prompter) -> int:
    checks = run_checks(args.suite, full=args.full)
    display_checks(checks)
    failed = [c for c in checks if not c.passed]
    for check in failed:
        log.error(f"Check failed: [{check.suite}] {check.name} = {check.value:.3e} > {check.tolerance:.1e}")
    print(f"checks={len(checks)} failed={len(failed)}")
    return EXIT_NUMERICAL if failed else EXIT_OK


COMMANDS = {
    "run": command_run,
    "sweep": command_sweep,
    "gen-tableau": command_gen_tableau,
    "gen-reference": command_gen_reference,
    "verify": command_verify,
}


def main(argv: Optional[List[str]] = None, config_manager: Optional[ConfigManager] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_CONFIG if e.code else EXIT_OK
    if args.log_level:
        log.set_console_level(args.log_level)

    try:
        config_manager = config_manager or ConfigManager(config_path="configs/config.yaml")
        prompter = Prompter(config=config_manager)
        return COMMANDS[args.command](args, config_manager, prompter)
    except ConfigError as e:
        log.error(f"Configuration error: {e}")
        return EXIT_CONFIG
    except NumericalError as e:
        log.error(f"Numerical error: {e}")
        return EXIT_NUMERICAL
    except PinnError as e:
        log.error(f"{type(e).__name__}: {e}")
        return EXIT_ERROR
    except KeyboardInterrupt:
        log.warning("Interrupted by user. Exiting.")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
