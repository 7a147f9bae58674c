#!/usr/bin/env python3
"""
Command-line runner for double Jaynes-Cummings entanglement scenarios.

Verbs:
    run <config.toml>            run a scenario file
    preset <name>                run a named figure preset
    list-presets                 show the preset catalog
    validate <config.toml>       parse and print the resolved scenario
    sweep <config.toml>          grid of overrides, one metrics row per point

Exit codes: 0 success, 2 config/validation, 3 truncation, 4 integrator, 5 realization, 1 other.
"""

import argparse
import sys
from pathlib import Path

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from disorder.averaging import RealizationError, resolve_workers
from disorder.sampling import DisorderError
from dynamics.engine import StiffnessError
from dynamics.oracle import OracleDimensionError
from models.hamiltonians import TruncationError
from models.params import ParameterError
from operators.hilbert import LayoutError
from operators.validators import ValidationError
from scenarios.config import ConfigError, apply_overrides, format_config, load_config, with_output
from scenarios.presets import catalog_frame, get_preset
from scenarios.runner import run
from scenarios.sweep import ParameterSweep, parse_grid_spec
from utils.logger import setup_logger

EXIT_OK = 0
EXIT_OTHER = 1
EXIT_CONFIG = 2
EXIT_TRUNCATION = 3
EXIT_STIFFNESS = 4
EXIT_REALIZATION = 5

logger = setup_logger("jcsim")


def parse_arguments(argv=None):
    """Parse command-line arguments."""
    parser = argparse.ArgumentParser(
        description="Simulate atom-atom entanglement in (multiphoton, driven, noisy, disordered) double JC models"
    )
    parser.add_argument(
        "--log-level",
        type=str,
        default=None,
        help="DEBUG, INFO, WARNING or ERROR (default: $JCSIM_LOG_LEVEL or INFO)"
    )
    parser.add_argument(
        "--quiet",
        action="store_true",
        help="Hide progress bars"
    )
    parser.add_argument(
        "--workers",
        type=int,
        default=None,
        help="Processes for disorder realizations (default: $JCSIM_WORKERS or 1)"
    )

    commands = parser.add_subparsers(dest="command", required=True)

    run_parser = commands.add_parser("run", help="Run a scenario file")
    run_parser.add_argument("config", type=Path, help="TOML scenario file")
    run_parser.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                            help="Dotted override such as noise.n_th=0.5 (repeatable)")
    run_parser.add_argument("--output-dir", type=Path, default=None, help="Artifact directory")

    preset_parser = commands.add_parser("preset", help="Run a named figure preset")
    preset_parser.add_argument("name", type=str, help="Preset name, e.g. fig1a")
    preset_parser.add_argument("--variant", type=str, default=None, help="Preset variant, e.g. thermal")
    preset_parser.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                               help="Dotted override such as model.g_a=0.8 (repeatable)")
    preset_parser.add_argument("--output-dir", type=Path, default=None, help="Artifact directory")

    commands.add_parser("list-presets", help="Show the preset catalog")

    validate_parser = commands.add_parser("validate", help="Parse and print a scenario file")
    validate_parser.add_argument("config", type=Path, help="TOML scenario file")

    sweep_parser = commands.add_parser("sweep", help="Grid search over config overrides")
    source = sweep_parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--config", type=Path, help="Base TOML scenario file")
    source.add_argument("--preset", type=str, help="Base preset name")
    sweep_parser.add_argument("--axis", action="append", required=True, metavar="KEY=V1,V2,...",
                              help="Sweep axis such as noise.n_th=0,0.25,0.5 (repeatable)")
    sweep_parser.add_argument("--metric", type=str, default="min_value", help="Ranking metric")
    sweep_parser.add_argument("--jobs", type=int, default=1, help="Parallel grid points")
    sweep_parser.add_argument("--output", type=Path, default=None, help="CSV file for the results")

    return parser.parse_args(argv)


def exit_status(error: BaseException):
    """
    Map an exception to (exit code, remediation hint).
    """
    if isinstance(error, RealizationError):
        return EXIT_REALIZATION, (
            f"realization {error.index} failed; rerun with model.g_a/g_b scaled by "
            f"(1 + {error.delta_a:.6g}) / (1 + {error.delta_b:.6g}) to reproduce it"
        )
    if isinstance(error, TruncationError):
        hint = f"set model.cutoff = {error.suggested_cutoff}" if error.suggested_cutoff else "raise model.cutoff"
        return EXIT_TRUNCATION, f"{hint} or shorten grid.t_end"
    if isinstance(error, StiffnessError):
        return EXIT_STIFFNESS, "loosen grid.rtol / grid.atol or shorten grid.t_end"
    if isinstance(error, (ConfigError, ValidationError, LayoutError, ParameterError,
                          DisorderError, OracleDimensionError)):
        return EXIT_CONFIG, "fix the reported field; `validate` prints the resolved scenario"
    return EXIT_OTHER, "unexpected failure; rerun with --log-level DEBUG"


def _report(result):
    logger.info("=" * 70)
    logger.info(f"SCENARIO {result.config.name}")
    logger.info("=" * 70)
    metrics = result.metrics
    logger.info(f"Initial concurrence: {metrics['initial_value']:.6f}")
    logger.info(f"Min / max:           {metrics['min_value']:.6f} / {metrics['max_value']:.6f}")
    logger.info(f"Deaths / revivals:   {metrics['n_deaths']} / {metrics['n_revivals']}")
    for insight in result.insights:
        logger.info(f"  - {insight}")
    for key, path in result.files.items():
        logger.info(f"{key:<12} {path}")


def _run_config(config, args):
    if getattr(args, "override", None):
        config = apply_overrides(config, args.override)
    if getattr(args, "output_dir", None):
        config = with_output(config, directory=str(args.output_dir))
    result = run(config, workers=args.workers, show_progress=not args.quiet)
    _report(result)
    return EXIT_OK


def command_run(args):
    return _run_config(load_config(args.config), args)


def command_preset(args):
    preset = get_preset(args.name)
    if preset.placeholder_noise:
        logger.warning(f"{preset.name}: noise rates are defaults ({preset.note})")
    return _run_config(preset.config(args.variant), args)


def command_list_presets(args):
    frame = catalog_frame()
    print(frame.to_string(index=False))
    return EXIT_OK


def command_validate(args):
    config = load_config(args.config)
    print(format_config(config), end="")
    logger.info(f"{args.config}: OK (hash {config.scenario_hash()})")
    return EXIT_OK


def command_sweep(args):
    config = load_config(args.config) if args.config else get_preset(args.preset).config()
    param_grid = dict(parse_grid_spec(axis) for axis in args.axis)

    sweep = ParameterSweep(config, metric=args.metric)
    results = sweep.grid_search(param_grid, n_jobs=args.jobs, show_progress=not args.quiet)

    if args.output:
        results.to_csv(args.output, index=False)
        logger.info(f"Sweep results saved to: {args.output}")
    print(results.to_string(index=False))
    logger.info(f"Best parameters: {sweep.get_best_params()}")
    return EXIT_OK


COMMANDS = {
    "run": command_run,
    "preset": command_preset,
    "list-presets": command_list_presets,
    "validate": command_validate,
    "sweep": command_sweep,
}


def main(argv=None):
    args = parse_arguments(argv)
    setup_logger("jcsim", args.log_level)

    try:
        if args.workers is not None:
            resolve_workers(args.workers)
        return COMMANDS[args.command](args)
    except Exception as e:
        code, hint = exit_status(e)
        logger.error(f"{type(e).__name__}: {e}")
        logger.error(f"Hint: {hint}")
        if code == EXIT_OTHER:
            logger.debug("Traceback", exc_info=True)
        return code


if __name__ == "__main__":
    sys.exit(main())
