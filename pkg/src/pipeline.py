import logging
import math
import os
from datetime import datetime
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from .asymptotics import AsymptoticEvaluation, evaluate_ray, leading_exponent
from .config import ExperimentConfig, worker_count
from .errors import AssumptionError, ConfigError, GridError, ValidationFailure
from .export import ArtifactWriter
from .pde import Trajectory, check_domain, evolve, point_value, residual
from .scattering import (
    ComplexField,
    ScatteringData,
    build_potential,
    closed_form_field,
    read_field_csv,
    reflection_coefficients,
    scattering_matrix,
    validate_assumptions,
)
from .validator import InvariantValidator, format_report


def fit_power_law(times, values) -> Tuple[Optional[float], Optional[float]]:
    """
    Least-squares slope of log(values) against log(times) and its standard error.

    Returns (None, None) when fewer than two positive values are available;
    the standard error is None with exactly two points.
    """
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    keep = (v > 0) & np.isfinite(v)
    if np.count_nonzero(keep) < 2:
        return None, None
    x, y = np.log(t[keep]), np.log(v[keep])
    slope, intercept = np.polyfit(x, y, 1)
    if x.size < 3:
        return float(slope), None
    fitted = slope * x + intercept
    variance = np.sum((y - fitted) ** 2) / (x.size - 2)
    stderr = math.sqrt(variance / np.sum((x - x.mean()) ** 2))
    return float(slope), float(stderr)


class ExperimentPipeline:
    """Runs the scatter, evolve, asymptotics, compare and validate stages of one experiment."""

    def __init__(self, config: ExperimentConfig, output_dir: str = None, max_workers: int = None):
        self.config = config
        self.output_dir = Path(output_dir or config.output_dir)
        self.writer = ArtifactWriter(self.output_dir)
        self.validator = InvariantValidator(seed=config.seed)
        self.max_workers = max_workers or worker_count()

        self.logger = logging.getLogger(__name__)
        if not self.logger.handlers and not logging.getLogger().handlers:
            self._setup_logging()

        self._scattering: Optional[ScatteringData] = None
        self._scatter_report: Optional[Dict] = None
        self._rays: Dict[float, List[AsymptoticEvaluation]] = {}

    def initial_field(self) -> ComplexField:
        """The t = 0 datum on the configured spatial grid."""
        spec = self.config.initial_datum
        grid = self.config.spatial_grid
        if spec.csv is not None:
            field = read_field_csv(spec.csv)
            same = field.grid.n == grid.n and np.allclose(
                [field.grid.x_min, field.grid.x_max], [grid.x_min, grid.x_max], rtol=1e-9, atol=1e-12
            )
            if not same:
                raise GridError(
                    f"Initial datum {spec.csv} is sampled on [{field.grid.x_min}, {field.grid.x_max}) "
                    f"with n={field.grid.n}; spatial_grid must match"
                )
            return ComplexField(grid, field.samples, 0.0)
        return closed_form_field(spec.expression, grid, **spec.params)

    def scattering_data(self) -> ScatteringData:
        """Scattering matrix and reflection coefficients of the initial datum (computed once)."""
        if self._scattering is None:
            model = self.config.model
            spectral = self.config.spectral_grid
            self.logger.debug("Step 1: building potential")
            potential = build_potential(self.initial_field(), model.kappa)
            self.logger.debug("Step 2: scattering matrix")
            sd = scattering_matrix(potential, spectral.zgrid, spectral.x_match, model.alpha, model.beta)
            self.logger.debug("Step 3: reflection coefficients")
            self._scattering = reflection_coefficients(sd)
        return self._scattering

    def run_scatter(self) -> Dict:
        """
        Compute and store the scattering data and the assumption report.

        Returns:
            The assumption report; raises AssumptionError after writing it when a hard check fails
        """
        self.logger.info(f"Scatter stage for experiment '{self.config.name}'")
        sd = self.scattering_data()
        report = validate_assumptions(sd)
        report.update({f"residual_{k}": v for k, v in sd.identity_residuals().items()})
        report["n_flags"] = len(sd.flags)

        self.writer.write_scattering(sd)
        self.writer.write_report(report, "scatter_report.txt")
        self._scatter_report = report

        if report["validation_status"] != "passed":
            message = "; ".join(report["issues"])
            self.logger.error(f"Scattering assumptions failed: {message}")
            raise AssumptionError(message)
        return report

    def _evolution_times(self) -> List[float]:
        cfg = self.config.evolution
        requested = set(self.config.evaluation.times)
        for _, t in self.config.evaluation.points:
            requested.add(t)
        return sorted(requested | {0.0, cfg.t_end})

    def run_evolve(self) -> Trajectory:
        """Integrate the configured PDE and store snapshots at every evaluation time."""
        cfg = self.config.evolution
        if cfg is None:
            raise ConfigError("The evolve stage needs an 'evolution' section")
        self.logger.info(f"Evolve stage: {cfg.system} system, dt={cfg.dt}, t_end={cfg.t_end}")
        traj = evolve(self.initial_field(), cfg, self._evolution_times())

        extra = {"system": cfg.system, "dt": cfg.dt, "n": cfg.grid.n, "x_max": cfg.grid.x_max,
                 "required_x_max": traj.diagnostics["required_x_max"]}
        if len(traj) >= 3:
            extra["residual"] = residual(traj, cfg)
        else:
            self.logger.warning("Fewer than 3 snapshots; PDE residual not computed")
        self.writer.write_trajectory(traj, extra)
        return traj

    def run_asymptotics(self) -> List[AsymptoticEvaluation]:
        """Leading-order values at every requested (x, t), grouped by ray."""
        if self._scatter_report is None:
            self.run_scatter()
        sd = self.scattering_data()
        evaluations: List[AsymptoticEvaluation] = []
        self._rays = {}
        rays = {}
        for xi, times in sorted(self.config.evaluation.rays().items()):
            self.logger.info(f"Asymptotics on ray xi={xi:.6g} at {len(times)} times")
            ray = evaluate_ray(sd, xi, times, self.config.strict_paper_constants, self.max_workers)
            evaluations.extend(ray)
            self._rays[xi] = ray
            first = ray[0].diagnostics
            rays[repr(xi)] = {
                "z1": first["z1"],
                "z2": first["z2"],
                "nu1": first["nu1"],
                "nu2": first["nu2"],
                "delta1": first["delta1"],
                "delta2": first["delta2"],
                "xi_order": ray[0].xi_order,
                "leading_exponent": leading_exponent(ray[0]),
            }

        self.writer.write_evaluations(evaluations)
        self.writer.write_manifest(
            {"strict_paper_constants": self.config.strict_paper_constants, "rays": rays},
            "asymptotics_manifest.json",
        )
        return evaluations

    def run_compare(self) -> Dict:
        """
        Compare the leading-order formula with the direct PDE solution at each (x, t).

        Returns:
            Summary with the log-log slopes of |q_pde − q_asy| and |q_asy| against t, per ray
        """
        cfg = self.config.evolution
        if cfg is None:
            raise ConfigError("The compare stage needs an 'evolution' section")
        # wrapped radiation would contaminate q_pde
        check_domain(self.initial_field(), cfg, strict=True)
        self.run_asymptotics()
        traj = self.run_evolve()

        rows = []
        summary = {"rays": {}}
        for xi, ray in sorted(self._rays.items()):
            entries = []
            for evaluation in ray:
                q_pde = point_value(traj.at(evaluation.t), evaluation.x)
                abs_err = abs(q_pde - evaluation.q_leading)
                entries.append({
                    "t": evaluation.t,
                    "x": evaluation.x,
                    "abs_q_asy": abs(evaluation.q_leading),
                    "abs_q_pde": abs(q_pde),
                    "abs_err": abs_err,
                    "rel_err": abs_err / abs(q_pde) if q_pde != 0 else float("nan"),
                })
            rows.extend(entries)

            times = [e["t"] for e in entries]
            error_slope, error_stderr = fit_power_law(times, [e["abs_err"] for e in entries])
            amplitude_slope, amplitude_stderr = fit_power_law(times, [e["abs_q_asy"] for e in entries])
            rel = [e["rel_err"] for e in entries]
            summary["rays"][repr(xi)] = {
                "error_slope": error_slope,
                "error_slope_stderr": error_stderr,
                "amplitude_slope": amplitude_slope,
                "amplitude_slope_stderr": amplitude_stderr,
                "xi_order": ray[0].xi_order,
                "leading_exponent": leading_exponent(ray[0]),
                "rel_err_decreasing": bool(all(b < a for a, b in zip(rel, rel[1:]))),
            }
            self.logger.info(
                f"xi={xi:.6g}: error slope {error_slope if error_slope is not None else 'NA'} "
                f"(predicted {ray[0].xi_order:.4f})"
            )

        self.writer.write_comparison(rows)
        self.writer.write_manifest(summary, "comparison_summary.json")
        return summary

    def run_validate(self) -> Dict:
        """Run every invariant suite, write the manifest and fail when any check fails."""
        manifest = self.validator.run_all(self.config.scattering_csv, self.config.model.kappa)
        self.writer.write_manifest(manifest, "validation_manifest.json")
        print(format_report(manifest))

        summary = self.validator.get_validation_summary(manifest)
        self.logger.info(f"Validation: {summary['failed_checks']} of {summary['total_checks']} checks failed")
        if manifest["failed"]:
            raise ValidationFailure(f"Invariant checks failed: {', '.join(manifest['failed'])}", manifest["failed"])
        return manifest

    def get_run_statistics(self) -> Dict:
        return self.writer.get_export_stats()

    def _setup_logging(self):
        """Attach a dated DEBUG file log and an INFO console log to this logger."""
        log_dir = os.path.join(self.output_dir, "logs")
        os.makedirs(log_dir, exist_ok=True)

        formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')

        file_handler = logging.FileHandler(
            os.path.join(log_dir, f"experiment_{datetime.now().strftime('%Y%m%d')}.log")
        )
        file_handler.setFormatter(formatter)
        file_handler.setLevel(logging.DEBUG)

        console_handler = logging.StreamHandler()
        console_handler.setFormatter(formatter)
        console_handler.setLevel(logging.INFO)

        self.logger.addHandler(file_handler)
        self.logger.addHandler(console_handler)
        self.logger.setLevel(logging.DEBUG)
