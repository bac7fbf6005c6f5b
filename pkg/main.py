#!/usr/bin/env python3
"""
carbon-gmam - Most probable transitions in the upper-ocean carbonate model

Command-line entry point: regime scan, single transitions, the nu sweep,
Monte Carlo bundles and composed time series.
"""
import argparse
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional

# Add project root to path
PROJECT_ROOT = Path(__file__).parent.absolute()
sys.path.insert(0, str(PROJECT_ROOT))

from pydantic import ValidationError

from config import get_config
from carbonate import ModelParams, load_params
from dynamics import Regime, find_cycles, find_fixed_point, find_thresholds, is_stable, scan_regimes
from errors import CarbonGmamError, ConfigError, NoCycleError, OutputError
from experiment import (
    ExperimentConfig,
    OutputWriter,
    RecordStatus,
    compose_transition_series,
    critical_nu,
    cx_tag,
    emit_outputs,
    load_config,
    nu_tag,
    run_sweep,
    system_at,
    transition_at,
)
from stochastic import bundle_concordance, choose_epsilon, transition_bundle
from utils.timeutils import StageTimer, format_duration

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_CONFIG = 2
EXIT_NOT_CONVERGED = 3
EXIT_IO = 4

logger = logging.getLogger('carbon_gmam')


# Setup logging
def setup_logging(level: Optional[str] = None):
    """Configure logging for the application."""
    config = get_config()
    log_level = getattr(logging, (level or config.log_level).upper(), logging.INFO)

    # Create formatters
    console_format = logging.Formatter(
        '%(asctime)s | %(levelname)-8s | %(name)s | %(message)s',
        datefmt='%H:%M:%S'
    )
    file_format = logging.Formatter(
        '%(asctime)s | %(levelname)-8s | %(name)s | %(funcName)s:%(lineno)d | %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )

    root_logger = logging.getLogger()
    root_logger.setLevel(logging.DEBUG)
    for handler in [h for h in root_logger.handlers if getattr(h, '_carbon_gmam', False)]:
        root_logger.removeHandler(handler)
        handler.close()

    # Console handler
    console_handler = logging.StreamHandler(sys.stdout)
    console_handler.setLevel(log_level)
    console_handler.setFormatter(console_format)
    console_handler._carbon_gmam = True
    root_logger.addHandler(console_handler)

    # File handler (empty LOG_FILE disables it)
    if config.log_file:
        log_path = config.resolve(config.log_file)
        os.makedirs(log_path.parent, exist_ok=True)
        file_handler = logging.FileHandler(log_path, encoding='utf-8')
        file_handler.setLevel(logging.DEBUG)  # Log everything to file
        file_handler.setFormatter(file_format)
        file_handler._carbon_gmam = True
        root_logger.addHandler(file_handler)

    # Reduce noise from libraries
    logging.getLogger('matplotlib').setLevel(logging.WARNING)
    logging.getLogger('numexpr').setLevel(logging.WARNING)

    return logger


def build_parser() -> argparse.ArgumentParser:
    """Command-line interface."""
    parser = argparse.ArgumentParser(
        prog='carbon-gmam',
        description='Minimum action transitions in the carbonate model',
    )
    parser.add_argument('--config', help='experiment JSON file (empty file = defaults)')
    parser.add_argument('--output', help='output directory')
    parser.add_argument('--seed', type=int, help='Monte Carlo seed (unsigned 64-bit)')
    parser.add_argument('--threads', type=int, help='worker processes')
    parser.add_argument('--log-level', help='console log level (DEBUG, INFO, ...)')

    sub = parser.add_subparsers(dest='command', required=True)

    scan = sub.add_parser('scan', help='classify regimes along c_x')
    scan.add_argument('--cx-min', type=float)
    scan.add_argument('--cx-max', type=float)
    scan.add_argument('--steps', type=int)

    path = sub.add_parser('path', help='most probable transition at one nu')
    path.add_argument('--nu', type=float, required=True)

    sub.add_parser('sweep', help='transitions over the nu grid')

    simulate = sub.add_parser('simulate', help='Monte Carlo transition bundle at one nu')
    simulate.add_argument('--nu', type=float, required=True)
    simulate.add_argument('--with-path', action='store_true',
                          help='also solve the transition and report concordance')

    compose = sub.add_parser('compose', help='composed transition time series at one nu')
    compose.add_argument('--nu', type=float, required=True)
    return parser


class RunContext:
    """Resolved configuration shared by the commands."""

    def __init__(self, args: argparse.Namespace):
        runtime = get_config()
        self.args = args
        self.experiment: ExperimentConfig = load_config(args.config)
        if args.seed is not None:
            if not 0 <= args.seed < 2 ** 64:
                raise ConfigError(f"seed {args.seed} is not an unsigned 64-bit integer", field='seed')
            sim = self.experiment.sim.model_copy(update={'seed': args.seed})
            self.experiment = self.experiment.model_copy(update={'sim': sim})

        self.threads = args.threads if args.threads is not None else runtime.threads
        if self.threads < 1:
            raise ConfigError(f"threads must be >= 1, got {self.threads}", field='threads')
        self.output_dir = Path(args.output or self.experiment.output_dir or runtime.output_dir)

        params_path = Path(self.experiment.params_file)
        if not params_path.exists():
            params_path = runtime.resolve(self.experiment.params_file)
        self.params: ModelParams = load_params(params_path)
        self.timer = StageTimer()

    def echo(self, **extra) -> dict:
        data = self.experiment.echo()
        data['params'] = self.params.model_dump()
        data.update(extra)
        return data

    def writer(self) -> OutputWriter:
        return OutputWriter(self.output_dir, self.args.command)


def cmd_scan(ctx: RunContext) -> int:
    args, exp = ctx.args, ctx.experiment
    updates = {k: v for k, v in
               (('cx_min', args.cx_min), ('cx_max', args.cx_max), ('steps', args.steps))
               if v is not None}
    try:
        scan = exp.scan.model_validate({**exp.scan.model_dump(), **updates})
    except ValidationError as e:
        raise ConfigError(f"scan options: {e.errors()[0]['msg']}", field='scan') from e
    lo, hi = get_config().scan.cx_window
    if scan.cx_min < lo or scan.cx_max > hi:
        raise ConfigError(f"scan range [{scan.cx_min}, {scan.cx_max}] outside [{lo}, {hi}]", field='scan')

    with ctx.timer.stage('scan'):
        reports = scan_regimes(scan.values(), ctx.params, ctx.threads, with_cycles=scan.export_cycles)
    with ctx.timer.stage('thresholds'):
        thresholds = find_thresholds(reports, ctx.params, ctx.threads)

    writer = ctx.writer()
    writer.scan(reports, thresholds)
    for r in reports:
        if r.stable_cycle is not None:
            writer.cycle(f"cycles/stable_{cx_tag(r.c_x)}", r.stable_cycle)
        if r.unstable_cycle is not None:
            writer.cycle(f"cycles/unstable_{cx_tag(r.c_x)}", r.unstable_cycle)
        if r.fixed_point is not None and r.regime is Regime.BISTABLE:
            writer.json(f"cycles/fixed_point_{cx_tag(r.c_x)}.json",
                        {'c': r.c_star, 'w': r.w_star, 'stable': r.fixed_point_stable})
    writer.finalize(ctx.echo(scan=scan.model_dump()), ctx.timer.as_dict())

    for key, value in thresholds.items():
        logger.info(f"📊 {key}: c_x = {value:.2f}")
    failed = [r for r in reports if r.regime is Regime.FAILED]
    return EXIT_NOT_CONVERGED if failed else EXIT_OK


def _exit_for(records) -> int:
    bad = [r for r in records
           if r.status is RecordStatus.FAILED or (r.ok and not r.converged)]
    if bad:
        logger.warning(f"⚠️  {len(bad)} record(s) failed or did not converge")
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_path(ctx: RunContext) -> int:
    nu = ctx.args.nu
    with ctx.timer.stage('path'):
        record = transition_at(nu, ctx.params, ctx.experiment, workers=ctx.threads)
    if record.status is RecordStatus.SKIPPED:
        logger.warning(f"nu = {nu} skipped: {record.message}")
    emit_outputs([record], [], ctx.output_dir, ctx.echo(nu=nu), ctx.timer.as_dict(), command='path')
    if record.ok:
        logger.info(
            f"🎯 nu = {nu}: action {record.action:.6g}, arrival c = {record.arrival_c:.1f}, "
            f"length {record.path_length:.1f}"
        )
    return _exit_for([record])


def cmd_sweep(ctx: RunContext) -> int:
    with ctx.timer.stage('sweep'):
        records = run_sweep(ctx.experiment, ctx.params, workers=ctx.threads)
    emit_outputs(records, [], ctx.output_dir, ctx.echo(), ctx.timer.as_dict(), command='sweep')
    nu_c = critical_nu(records)
    if nu_c is not None:
        logger.info(f"📈 Largest arrival jump at nu ≈ {nu_c:.3f}")
    return _exit_for(records)


def cmd_simulate(ctx: RunContext) -> int:
    nu, exp = ctx.args.nu, ctx.experiment
    system = system_at(ctx.params, exp.c_x, nu)
    fp = find_fixed_point(system)
    if not is_stable(system, fp):
        raise NoCycleError(f"nu = {nu}: fixed point unstable, no metastable state to leave")
    unstable, stable = find_cycles(system, fp, exp.cycle_points)

    with ctx.timer.stage('simulate'):
        if exp.bundle.adaptive_epsilon:
            bundle = choose_epsilon(
                system, exp.sim, fp, stable, unstable,
                min_transitions=exp.bundle.min_transitions,
                max_doublings=exp.bundle.max_doublings,
                workers=ctx.threads, bins=exp.bundle.bins,
            )
        else:
            bundle = transition_bundle(
                system, exp.sim, fp, stable, unstable, bins=exp.bundle.bins,
                workers=ctx.threads, min_transitions=exp.bundle.min_transitions,
            )

    extra = {'nu': nu}
    exit_code = EXIT_OK
    writer = ctx.writer()
    if ctx.args.with_path:
        with ctx.timer.stage('path'):
            record = transition_at(nu, ctx.params, exp, workers=ctx.threads)
        exit_code = _exit_for([record])
        if record.ok:
            extra['concordance'] = bundle_concordance(bundle, record.path.points, fp, stable)
            logger.info(f"🎯 Concordance with the minimum action path: {extra['concordance']:.2%}")
            writer.path(f"paths/path_{nu_tag(nu)}", record.path, {
                'nu': nu, 'action': record.action, 'iterations': record.iterations,
                'converged': record.converged, 'endpoint_index': record.endpoint_index,
                'n_points': record.path.n_points,
            })

    tag = nu_tag(nu)
    writer.bundle(f"bundle_{tag}", bundle, extra)
    writer.csv(
        f"transitions_{tag}.csv",
        ['path_id', 'transitioned', 'exit_time', 'arrival_time'],
        ([i, int(r.transitioned),
          '' if r.exit_time is None else r.exit_time,
          '' if r.arrival_time is None else r.arrival_time]
         for i, r in enumerate(bundle.records)),
    )
    writer.cycle(f"cycles/stable_{tag}", stable)
    writer.cycle(f"cycles/unstable_{tag}", unstable)
    writer.finalize(ctx.echo(nu=nu, with_path=ctx.args.with_path), ctx.timer.as_dict())
    return exit_code


def cmd_compose(ctx: RunContext) -> int:
    nu = ctx.args.nu
    with ctx.timer.stage('path'):
        record = transition_at(nu, ctx.params, ctx.experiment, workers=ctx.threads)
    series: List = []
    if record.ok and record.converged:
        with ctx.timer.stage('compose'):
            series.append(compose_transition_series(ctx.experiment, record, ctx.params))
    else:
        logger.warning(f"nu = {nu}: no converged transition to compose ({record.message})")
    emit_outputs([record], series, ctx.output_dir, ctx.echo(nu=nu), ctx.timer.as_dict(),
                 command='compose')
    return _exit_for([record]) if series else EXIT_NOT_CONVERGED


COMMANDS = {
    'scan': cmd_scan,
    'path': cmd_path,
    'sweep': cmd_sweep,
    'simulate': cmd_simulate,
    'compose': cmd_compose,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point."""
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level)

    logger.info("=" * 60)
    logger.info(f"🌊 carbon-gmam: {args.command}")
    logger.info("=" * 60)

    try:
        ctx = RunContext(args)
        logger.info(f"📂 Output: {ctx.output_dir} | 🧵 Workers: {ctx.threads}")
        code = COMMANDS[args.command](ctx)
    except ConfigError as e:
        logger.error(f"❌ Configuration error: {e}")
        return EXIT_CONFIG
    except OutputError as e:
        logger.error(f"❌ Output error: {e} (written so far: {e.partial_manifest.get('files', [])})")
        return EXIT_IO
    except OSError as e:
        logger.error(f"❌ I/O error: {e}")
        return EXIT_IO
    except CarbonGmamError as e:
        logger.error(f"❌ {type(e).__name__}: {e}")
        return EXIT_NOT_CONVERGED
    except Exception as e:
        logger.error(f"❌ Unexpected error: {e}", exc_info=True)
        return EXIT_UNEXPECTED

    elapsed = sum(ctx.timer.durations.values())
    logger.info(f"✅ Done in {format_duration(elapsed)} (exit {code})")
    return code


if __name__ == "__main__":
    sys.exit(main())
