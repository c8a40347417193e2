import logging
import math
from typing import Callable, Dict, List, Optional

import numpy as np
from colorama import Fore, Style

from .asymptotics import (
    beta12,
    delta_at,
    model_jump,
    model_matrix,
    nu_profile,
)
from .pde import EvolutionConfig, evolve, linear_propagator
from .phase import stationary_points
from .scattering import (
    GridSpec1D,
    ScatteringData,
    born_approximation,
    build_potential,
    closed_form_field,
    read_scattering_csv,
    reflection_coefficients,
    scattering_matrix,
)
from .specfun import gamma_complex, parabolic_cylinder_D, parabolic_cylinder_D_pair

TOLERANCES = {
    "gamma_recurrence": 1e-12,
    "gamma_reflection": 1e-12,
    "weber_d0": 1e-10,
    "weber_residual": 1e-5,
    "weber_recurrence": 1e-8,
    "zero_potential": 1e-10,
    "det_S": 1e-6,
    "symmetry": 1e-6,
    "born_relative": 1e-2,
    "delta_jump": 1e-4,
    "beta_product": 1e-8,
    "model_jump": 1e-5,
    "constant_datum": 1e-8,
    "linear_propagator": 1e-8,
    "file_det_S": 1e-6,
    "file_jump_factor": 1e-6,
}


class SuiteResult:
    """Named checks of one suite; a check fails when its value exceeds its tolerance."""

    def __init__(self, name: str):
        self.name = name
        self.details: Dict[str, Dict] = {}
        self.failed: List[str] = []

    def check(self, key: str, value: float, tolerance_key: str = None):
        tolerance = TOLERANCES[tolerance_key or key]
        passed = math.isfinite(value) and value <= tolerance
        self.details[key] = {"value": float(value), "tolerance": tolerance, "passed": passed}
        if not passed:
            self.failed.append(f"{self.name}.{key}")

    def error(self, message: str):
        self.details["error"] = {"value": None, "tolerance": None, "passed": False, "message": message}
        self.failed.append(f"{self.name}.error")

    def as_dict(self) -> Dict:
        return {"status": "passed" if not self.failed else "failed", "details": self.details,
                "failed": list(self.failed)}


def _synthetic_fixture(kappa: int = 1) -> ScatteringData:
    z = np.linspace(-3.0, 3.0, 601)
    r = 0.2 * np.exp(-z ** 2) * np.exp(0.4j * z)
    rtilde = 0.15 * np.exp(-z ** 2) * np.exp(-0.3j * z)
    return ScatteringData.synthetic(z, r, rtilde, kappa=kappa, alpha=0.0, beta=1.0)


class InvariantValidator:
    """Runs the invariant suites and collects a pass/fail manifest."""

    def __init__(self, seed: int = 0):
        self.seed = seed
        self.logger = logging.getLogger(__name__)

    def validate_specfun(self) -> Dict:
        result = SuiteResult("specfun")
        rng = np.random.default_rng(self.seed)
        z = rng.uniform(-4.5, 6.0, 100) + 1j * rng.uniform(-5.0, 5.0, 100)

        recurrence, reflection = 0.0, 0.0
        for w in z:
            g = gamma_complex(w).value
            recurrence = max(recurrence, abs(gamma_complex(w + 1).value - w * g) / abs(w * g))
            product = g * gamma_complex(1 - w).value * np.sin(np.pi * w)
            reflection = max(reflection, abs(product - np.pi) / np.pi)
        result.check("gamma_recurrence", recurrence)
        result.check("gamma_reflection", reflection)

        k = 3.5 * np.sqrt(rng.uniform(0.0, 1.0, 100)) * np.exp(2j * np.pi * rng.uniform(0.0, 1.0, 100))
        a = rng.uniform(-2.0, 2.0, 100) + 1j * rng.uniform(-2.0, 2.0, 100)
        d0 = max(abs(parabolic_cylinder_D(0, w).value - np.exp(-w * w / 4)) for w in k)
        result.check("weber_d0", d0)

        step = 1e-4
        residual, recurrence = 0.0, 0.0
        for order, w in zip(a, k):
            value, _ = parabolic_cylinder_D_pair(order, w)
            slope_plus = parabolic_cylinder_D_pair(order, w + step)[1].value
            slope_minus = parabolic_cylinder_D_pair(order, w - step)[1].value
            second = (slope_plus - slope_minus) / (2 * step)
            scale = max(1.0, abs(value.value))
            residual = max(residual, abs(second - (w * w / 4 - 0.5 - order) * value.value) / scale)

            upper = parabolic_cylinder_D(order + 1, w).value
            lower = parabolic_cylinder_D(order - 1, w).value
            scale = max(1.0, abs(upper), abs(w * value.value), abs(order * lower))
            recurrence = max(recurrence, abs(upper - w * value.value + order * lower) / scale)
        result.check("weber_residual", residual)
        result.check("weber_recurrence", recurrence)
        return result.as_dict()

    def validate_scattering(self) -> Dict:
        result = SuiteResult("scattering")
        grid = GridSpec1D.symmetric(12.0, 512)
        zgrid = np.linspace(-6.0, 6.0, 257)

        zero = build_potential(closed_form_field("zero", grid), 1)
        sd = scattering_matrix(zero, zgrid)
        deviation = max(np.max(np.abs(sd.s11 - 1)), np.max(np.abs(sd.s22 - 1)),
                        np.max(np.abs(sd.s12)), np.max(np.abs(sd.s21)))
        result.check("zero_potential", deviation)

        zgrid = np.linspace(-6.0, 6.0, 49)
        for kappa in (1, -1):
            u0 = closed_form_field("gaussian", grid, amplitude=0.3)
            sd = reflection_coefficients(scattering_matrix(build_potential(u0, kappa), zgrid))
            result.check(f"det_S_kappa{kappa:+d}", sd.identity_residuals()["det_S"], "det_S")
            result.check(f"symmetry_kappa{kappa:+d}", max(sd.symmetry_residuals().values()), "symmetry")

        z_born = np.linspace(-2.0, 2.0, 11)
        weak = build_potential(closed_form_field("gaussian", grid, amplitude=1e-3), 1)
        sd = scattering_matrix(weak, z_born)
        born_s21, _ = born_approximation(weak, z_born)
        result.check("born_relative", float(np.max(np.abs(sd.s21 - born_s21) / np.abs(born_s21))))
        return result.as_dict()

    def validate_delta(self) -> Dict:
        result = SuiteResult("delta")
        sd = _synthetic_fixture()
        geom = stationary_points(-3.0, sd.alpha, sd.beta)
        profile = nu_profile(sd, geom)
        epsilon = 1e-6

        worst = 0.0
        for s in np.linspace(geom.z1, geom.z2, 22)[1:-1]:
            ratio = delta_at(s + 1j * epsilon, profile, tube=0.0) / delta_at(s - 1j * epsilon, profile, tube=0.0)
            r, rt = sd.interpolate_reflection([s])
            worst = max(worst, abs(ratio - (1 - r[0] * rt[0])))
        result.check("delta_jump", worst)
        return result.as_dict()

    def validate_model(self) -> Dict:
        result = SuiteResult("model")
        sd = ScatteringData.synthetic(np.linspace(-3.0, 3.0, 301), 0.2, 0.15, alpha=0.0, beta=1.0)
        geom = stationary_points(-3.0, 0.0, 1.0)
        profile = nu_profile(sd, geom)

        worst = 0.0
        for j in (1, 2):
            b12, b21 = beta12(profile, sd, geom, 10.0, j)
            nu = profile.endpoint(j)[1]
            worst = max(worst, abs(b12 * b21 - nu) / abs(nu))
        result.check("beta_product", worst)

        nu = -np.log(1 - 0.2 * 0.15) / (2 * np.pi)
        expected = model_jump(nu, 0.2)
        worst = 0.0
        for k in (-2.0, -1.0, 1.0, 2.0):
            upper = model_matrix(k, nu, 0.2, "upper")
            lower = model_matrix(k, nu, 0.2, "lower")
            worst = max(worst, float(np.max(np.abs(np.linalg.solve(lower, upper) - expected))))
        result.check("model_jump", worst)
        return result.as_dict()

    def validate_pde(self) -> Dict:
        result = SuiteResult("pde")
        grid = GridSpec1D.symmetric(10.0, 64)
        cfg = EvolutionConfig(grid, dt=0.005, t_end=1.0, alpha=1.0, beta=0.5, kappa=1)
        traj = evolve(closed_form_field("constant", grid, amplitude=1.0), cfg, show_progress=False)
        error = float(np.max(np.abs(traj.fields[-1].samples - np.exp(-2j))))
        result.check("constant_datum", error)

        grid = GridSpec1D.symmetric(20.0, 256)
        cfg = EvolutionConfig(grid, dt=0.01, t_end=1.0, alpha=0.5, beta=1.0, kappa=1)
        u0 = closed_form_field("gaussian", grid, amplitude=1e-6)
        traj = evolve(u0, cfg, show_progress=False)
        exact = linear_propagator(u0, cfg, 1.0).samples
        relative = float(np.max(np.abs(traj.fields[-1].samples - exact)) / np.max(np.abs(exact)))
        result.check("linear_propagator", relative)
        return result.as_dict()

    def validate_scattering_file(self, path, kappa: int) -> Dict:
        result = SuiteResult("scattering_file")
        sd = read_scattering_csv(path, kappa)
        residuals = sd.identity_residuals()
        result.check("det_S", residuals["det_S"], "file_det_S")
        result.check("jump_factor", residuals["jump_factor"], "file_jump_factor")
        return result.as_dict()

    def run_all(self, scattering_csv=None, kappa: int = 1) -> Dict:
        """
        Run every suite; a suite that raises is recorded as failed rather than aborting the run.

        Returns:
            Manifest with per-suite results, the failed check names and 'validation_status'
        """
        suites: Dict[str, Callable[[], Dict]] = {
            "specfun": self.validate_specfun,
            "scattering": self.validate_scattering,
            "delta": self.validate_delta,
            "model": self.validate_model,
            "pde": self.validate_pde,
        }
        if scattering_csv is not None:
            suites["scattering_file"] = lambda: self.validate_scattering_file(scattering_csv, kappa)

        results = {}
        for name, suite in suites.items():
            self.logger.info(f"Running {name} suite")
            try:
                results[name] = suite()
            except Exception as e:
                self.logger.error(f"Suite {name} raised: {e}")
                failed = SuiteResult(name)
                failed.error(str(e))
                results[name] = failed.as_dict()

        failed = [check for r in results.values() for check in r["failed"]]
        self.logger.info(f"Validation completed: {len(failed)} checks failed")
        return {
            "seed": self.seed,
            "suites": results,
            "failed": failed,
            "validation_status": "passed" if not failed else "failed",
        }

    def get_validation_summary(self, manifest: Dict) -> Dict:
        suites = manifest["suites"]
        checks = [c for s in suites.values() for c in s["details"].values()]
        return {
            "total_suites": len(suites),
            "passed_suites": sum(1 for s in suites.values() if s["status"] == "passed"),
            "total_checks": len(checks),
            "failed_checks": len(manifest["failed"]),
        }


def format_report(manifest: Dict, color: bool = True) -> str:
    """Console lines `PASS suite.check value <= tolerance`, coloured when requested."""
    lines: List[str] = []
    for suite, result in manifest["suites"].items():
        for check, detail in result["details"].items():
            passed = detail["passed"]
            label = "PASS" if passed else "FAIL"
            if color:
                label = (Fore.GREEN if passed else Fore.RED) + label + Style.RESET_ALL
            if detail.get("message"):
                lines.append(f"{label} {suite}.{check}: {detail['message']}")
            else:
                lines.append(f"{label} {suite}.{check} {detail['value']:.3e} <= {detail['tolerance']:.0e}")
    return "\n".join(lines)
