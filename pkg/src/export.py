"""
Artifact writer
Deterministic CSV tables, key-value reports and JSON manifests for every
pipeline stage. Floats carry 17 significant digits; nothing time-stamped is
written into an artifact.
"""

import json
import logging
import math
import os
from pathlib import Path
from typing import Dict, Iterable, List

import numpy as np
import pandas as pd

from .asymptotics import AsymptoticEvaluation
from .pde import Trajectory
from .scattering import FLOAT_FORMAT, ScatteringData, write_field_csv, write_scattering_csv

ASYMPTOTICS_COLUMNS = ["x", "t", "Re_q", "Im_q", "abs_q", "xi_order", "Im_nu1", "Im_nu2"]
COMPARISON_COLUMNS = ["t", "x", "abs_q_asy", "abs_q_pde", "abs_err", "rel_err"]


def _plain(value):
    """Convert numpy/complex values into JSON-friendly Python objects."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": _plain(float(value.real)), "im": _plain(float(value.imag))}
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, Path):
        return str(value)
    return value


def _format_value(value) -> str:
    if isinstance(value, (float, np.floating)):
        return FLOAT_FORMAT % value
    if isinstance(value, (complex, np.complexfloating)):
        return f"{FLOAT_FORMAT % value.real} {FLOAT_FORMAT % value.imag}"
    if value is None:
        return "NA"
    if isinstance(value, (list, tuple)):
        return "; ".join(str(v) for v in value) if value else "none"
    return str(value)


class ArtifactWriter:
    """Writes every artifact of an experiment below one output directory."""

    def __init__(self, output_dir: str = "output"):
        self.output_dir = Path(output_dir)
        self.logger = logging.getLogger(__name__)
        os.makedirs(self.output_dir, exist_ok=True)
        self.written: List[Path] = []

    def _target(self, name: str) -> Path:
        path = self.output_dir / name
        path.parent.mkdir(parents=True, exist_ok=True)
        self.written.append(path)
        return path

    def write_scattering(self, sd: ScatteringData, name: str = "scattering.csv") -> Path:
        path = write_scattering_csv(sd, self._target(name))
        self.logger.info(f"Scattering data written: {path}")
        return path

    def write_report(self, report: Dict, name: str) -> Path:
        """Structured key-value text, one `key = value` line per scalar entry."""
        path = self._target(name)
        lines = []
        for key in sorted(report):
            value = report[key]
            if isinstance(value, np.ndarray) and value.size > 1:
                continue
            lines.append(f"{key} = {_format_value(value)}")
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        self.logger.info(f"Report written: {path}")
        return path

    def write_manifest(self, manifest: Dict, name: str) -> Path:
        path = self._target(name)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(_plain(manifest), f, indent=2, sort_keys=True, ensure_ascii=False)
            f.write("\n")
        self.logger.info(f"Manifest written: {path}")
        return path

    def write_table(self, rows: Iterable[Dict], columns: List[str], name: str) -> Path:
        path = self._target(name)
        frame = pd.DataFrame(list(rows), columns=columns)
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, na_rep="NA")
        self.logger.info(f"Table written: {path} ({len(frame)} rows)")
        return path

    def write_evaluations(self, evaluations: Iterable[AsymptoticEvaluation], name: str = "asymptotics.csv") -> Path:
        return self.write_table((e.as_row() for e in evaluations), ASYMPTOTICS_COLUMNS, name)

    def write_comparison(self, rows: Iterable[Dict], name: str = "comparison.csv") -> Path:
        return self.write_table(rows, COMPARISON_COLUMNS, name)

    def write_trajectory(self, traj: Trajectory, extra: Dict = None, prefix: str = "trajectory") -> Path:
        """One `x,Re_u,Im_u` CSV per snapshot plus a manifest of times and diagnostics."""
        snapshots = []
        for i, f in enumerate(traj.fields):
            filename = f"{prefix}/u_{i:04d}.csv"
            write_field_csv(f, self._target(filename))
            snapshots.append({"index": i, "t": float(traj.times[i]), "file": filename,
                              "quasi_power": complex(traj.quasi_power[i])})
        manifest = {
            "format_version": 1,
            "snapshots": snapshots,
            "diagnostics": dict(traj.diagnostics),
        }
        if extra:
            manifest.update(extra)
        return self.write_manifest(manifest, f"{prefix}/manifest.json")

    def get_export_stats(self) -> Dict:
        return {
            "output_dir": str(self.output_dir),
            "files_written": len(self.written),
            "files": sorted(str(p.relative_to(self.output_dir)) for p in self.written),
        }
