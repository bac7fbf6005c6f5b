"""Experiment orchestration module for carbon-gmam."""
from .settings import (
    ExperimentConfig,
    ScanSettings,
    BundleSettings,
    ComposeSettings,
    load_config,
    parse_config,
)
from .sweep import (
    RecordStatus,
    SweepRecord,
    SWEEP_HEADER,
    system_at,
    transition_at,
    run_sweep,
    critical_nu,
)
from .compose import ComposedSeries, SeriesSegment, compose_transition_series
from .outputs import OutputWriter, emit_outputs, nu_tag, cx_tag

__all__ = [
    # Settings
    'ExperimentConfig',
    'ScanSettings',
    'BundleSettings',
    'ComposeSettings',
    'load_config',
    'parse_config',
    # Sweep
    'RecordStatus',
    'SweepRecord',
    'SWEEP_HEADER',
    'system_at',
    'transition_at',
    'run_sweep',
    'critical_nu',
    # Composed series
    'ComposedSeries',
    'SeriesSegment',
    'compose_transition_series',
    # Outputs
    'OutputWriter',
    'emit_outputs',
    'nu_tag',
    'cx_tag',
]
