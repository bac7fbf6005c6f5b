"""
Result files and the run manifest.

Every data file goes through OutputWriter, which records it for the
manifest. The manifest lists each file with its byte size and SHA-256 and is
itself deterministic; wall-clock timings go to a separate timings.json.
"""
import logging
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Union

import numpy as np

from config import APP_VERSION
from dynamics import LimitCycle, RegimeReport, Trajectory
from errors import OutputError
from gmam import DiscretePath, TransitionResult
from stochastic import TransitionBundle
from utils.files import describe_version, file_sha256, write_csv, write_json
from .compose import SERIES_HEADER, ComposedSeries
from .sweep import SWEEP_HEADER, SweepRecord

logger = logging.getLogger(__name__)

MANIFEST = "manifest.json"
TIMINGS = "timings.json"


def nu_tag(nu: float) -> str:
    return f"nu_{nu:.3f}"


def cx_tag(c_x: float) -> str:
    return f"cx_{c_x:.3f}"


class OutputWriter:
    """Writes result files under one directory and keeps the manifest."""

    def __init__(self, output_dir: Union[str, Path], command: str):
        self.output_dir = Path(output_dir)
        self.command = command
        self.files: List[Path] = []

    def _track(self, path: Path) -> Path:
        if path not in self.files:
            self.files.append(path)
        return path

    def _guard(self, name: str, writer, *args):
        path = self.output_dir / name
        try:
            writer(path, *args)
        except OSError as e:
            raise OutputError(
                f"failed to write {path}: {e}", partial_manifest=self.partial_manifest()
            ) from e
        return self._track(path)

    def csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
        return self._guard(name, write_csv, header, rows)

    def json(self, name: str, data: dict) -> Path:
        return self._guard(name, write_json, data)

    # Domain writers

    def sweep(self, records: Sequence[SweepRecord]) -> Path:
        return self.csv("sweep.csv", SWEEP_HEADER, (r.row() for r in records))

    def path(self, name: str, path: DiscretePath, metadata: dict) -> Path:
        alpha = path.alpha
        rows = ([i, float(a), float(c), float(w)] for i, (a, (c, w)) in enumerate(zip(alpha, path.points)))
        self.csv(f"{name}.csv", ["index", "alpha", "c", "w"], rows)
        return self.json(f"{name}.json", metadata)

    def result(self, name: str, result: TransitionResult, extra: Optional[dict] = None) -> Path:
        metadata = result.metadata()
        metadata["candidates"] = [
            {"endpoint_index": o.endpoint_index, "action": o.action, "converged": o.converged,
             "error": o.error}
            for o in result.candidates
        ]
        metadata.update(extra or {})
        return self.path(name, result.path, metadata)

    def cycle(self, name: str, cycle: LimitCycle) -> Path:
        self.csv(
            f"{name}.csv", ["index", "c", "w"],
            ([i, float(c), float(w)] for i, (c, w) in enumerate(cycle.points)),
        )
        return self.json(f"{name}.json", {
            "stability": cycle.stability.value,
            "period": cycle.period,
            "n_points": cycle.n_points,
            "perimeter": cycle.perimeter,
        })

    def series(self, series: ComposedSeries) -> Path:
        return self.csv(f"series_{nu_tag(series.nu)}.csv", SERIES_HEADER, series.rows())

    def trajectory(self, name: str, traj: Trajectory) -> Path:
        return self.csv(
            f"{name}.csv", ["t", "c", "w"],
            ([float(t), float(c), float(w)] for t, (c, w) in zip(traj.times, traj.states)),
        )

    def bundle(self, name: str, bundle: TransitionBundle, extra: Optional[dict] = None) -> Path:
        c_mid = 0.5 * (bundle.c_edges[1:] + bundle.c_edges[:-1])
        w_mid = 0.5 * (bundle.w_edges[1:] + bundle.w_edges[:-1])
        rows = (
            [int(i), int(j), float(c_mid[i]), float(w_mid[j]), float(bundle.histogram[i, j])]
            for i in range(len(c_mid)) for j in range(len(w_mid))
        )
        self.csv(f"{name}.csv", ["i", "j", "c", "w", "mass"], rows)
        metadata = bundle.metadata()
        metadata.update(extra or {})
        return self.json(f"{name}.json", metadata)

    def scan(self, reports: Sequence[RegimeReport], thresholds: Dict[str, float]) -> Path:
        self.csv(
            "scan.csv", ["c_x", "regime", "c_star", "w_star"],
            ([r.c_x, r.regime.value, r.c_star, r.w_star] for r in reports),
        )
        return self.json("scan_summary.json", {
            "thresholds": thresholds,
            "failed": {f"{r.c_x}": r.error for r in reports if r.error},
        })

    # Manifest

    def partial_manifest(self) -> dict:
        return {"files": [str(p.relative_to(self.output_dir)) for p in self.files]}

    def finalize(self, config_echo: dict, timings: Optional[dict] = None) -> dict:
        """
        Write timings.json and manifest.json.

        Returns:
            The manifest
        """
        entries = []
        for path in sorted(self.files):
            entries.append({
                "name": path.relative_to(self.output_dir).as_posix(),
                "bytes": path.stat().st_size,
                "sha256": file_sha256(path),
            })
        manifest = {
            "command": self.command,
            "version": describe_version(APP_VERSION),
            "config": config_echo,
            "files": entries,
            "timings_file": TIMINGS,
        }
        try:
            write_json(self.output_dir / TIMINGS, timings or {})
            write_json(self.output_dir / MANIFEST, manifest)
        except OSError as e:
            raise OutputError(f"failed to write the manifest: {e}", partial_manifest=manifest) from e
        logger.info(f"📁 Wrote {len(entries)} files to {self.output_dir}")
        return manifest


def emit_outputs(
    records: Sequence[SweepRecord],
    series: Sequence[ComposedSeries],
    output_dir: Union[str, Path],
    config_echo: dict,
    timings: Optional[dict] = None,
    command: str = "sweep",
) -> dict:
    """
    Write the sweep table, per-nu paths and cycles, composed series and manifest.

    Args:
        records: Sweep records (paths and cycles attached)
        series: Composed series to write
        output_dir: Target directory
        config_echo: Configuration recorded in the manifest
        timings: Wall-clock timings (written to timings.json)
        command: Name of the producing command

    Returns:
        The manifest

    Raises:
        OutputError: on I/O failure, carrying the partial manifest
    """
    writer = OutputWriter(output_dir, command)
    writer.sweep(records)
    for record in records:
        if not record.ok:
            continue
        tag = nu_tag(record.nu)
        writer.path(f"paths/path_{tag}", record.path, {
            "nu": record.nu,
            "action": record.action,
            "iterations": record.iterations,
            "converged": record.converged,
            "endpoint_index": record.endpoint_index,
            "n_points": record.path.n_points,
            "path_length": record.path_length,
            "arrival_c": record.arrival_c,
        })
        writer.cycle(f"cycles/stable_{tag}", record.stable_cycle)
        writer.cycle(f"cycles/unstable_{tag}", record.unstable_cycle)
        fp = np.asarray(record.fixed_point)
        writer.json(f"cycles/fixed_point_{tag}.json", {"c": float(fp[0]), "w": float(fp[1])})
    for s in series:
        writer.series(s)
    return writer.finalize(config_echo, timings)
