#!/usr/bin/env python3
"""
Scattering Module
Direct scattering for the nonlocal x-part Ψ_x = [[−iz, u], [κu*(−x), iz]] Ψ:
potential construction, Jost solutions, scattering matrix, reflection
coefficients and the checks on the standing assumptions.
"""

import dataclasses
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline

from .errors import (
    ConfigError,
    DecayContractError,
    GridError,
    NumericalError,
    SpectralSingularityError,
    StepSizeError,
)

logger = logging.getLogger(__name__)

JOST_RTOL = 1e-10
JOST_ATOL = 1e-10
DET_TOLERANCE = 1e-6
SINGULARITY_THRESHOLD = 1e-10
DECAY_TOLERANCE = 1e-8
SUPPORT_THRESHOLD = 1e-15
DEFAULT_BOX = (-6.0, 6.0, 0.0, 6.0)

SCATTERING_COLUMNS = [
    "z",
    "Re_s11", "Im_s11", "Re_s12", "Im_s12", "Re_s21", "Im_s21", "Re_s22", "Im_s22",
    "Re_r", "Im_r", "Re_rt", "Im_rt",
]
FLOAT_FORMAT = "%.17g"


@dataclass(frozen=True)
class GridSpec1D:
    """Uniform periodic grid x_j = x_min + j·h, j = 0..n−1, h = (x_max − x_min)/n."""

    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if not (isinstance(self.n, (int, np.integer)) and self.n > 0 and self.n % 2 == 0):
            raise GridError(f"Grid size must be a positive even integer, got {self.n}")
        if not self.x_min < self.x_max:
            raise GridError(f"Grid bounds out of order: [{self.x_min}, {self.x_max}]")

    @classmethod
    def symmetric(cls, x_max: float, n: int) -> "GridSpec1D":
        return cls(-float(x_max), float(x_max), int(n))

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / self.n

    @property
    def is_symmetric(self) -> bool:
        return self.x_min < 0 < self.x_max and math.isclose(self.x_min, -self.x_max, rel_tol=1e-14)

    @cached_property
    def x(self) -> np.ndarray:
        return self.x_min + self.h * np.arange(self.n)

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        return 2 * np.pi * np.fft.fftfreq(self.n, d=self.h)

    def reflected_index(self) -> np.ndarray:
        """Index map j → index of −x_j (periodic convention for the unpaired endpoint)."""
        if not self.is_symmetric:
            raise GridError(f"Reflection needs a grid symmetric about 0, got [{self.x_min}, {self.x_max}]")
        return (-np.arange(self.n)) % self.n


@dataclass
class ComplexField:
    """Complex samples of u(x) on a grid at a given time."""

    grid: GridSpec1D
    samples: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=complex)
        if self.samples.shape != (self.grid.n,):
            raise GridError(f"Expected {self.grid.n} samples, got shape {self.samples.shape}")

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    def decay_ratio(self) -> float:
        """max|u| over the outer 5% of points divided by max|u| (0 for the zero field)."""
        magnitude = np.abs(self.samples)
        peak = magnitude.max()
        if peak == 0:
            return 0.0
        edge = max(1, int(math.ceil(0.025 * self.grid.n)))
        outer = np.concatenate([magnitude[:edge], magnitude[-edge:]])
        return float(outer.max() / peak)

    def check_decay(self, tolerance: float = DECAY_TOLERANCE):
        ratio = self.decay_ratio()
        if ratio > tolerance:
            raise DecayContractError(
                f"Field does not decay at the boundary: edge/peak = {ratio:.3e} > {tolerance:.0e}"
            )

    def check_finite(self):
        if not np.all(np.isfinite(self.samples)):
            raise NumericalError("Field contains non-finite samples")


class _FieldInterpolant:
    """Periodic cubic spline of (u, v) evaluated at arbitrary x."""

    def __init__(self, grid: GridSpec1D, upper: np.ndarray, lower: np.ndarray):
        x = np.append(grid.x, grid.x_max)
        stacked = np.column_stack([upper.real, upper.imag, lower.real, lower.imag])
        stacked = np.vstack([stacked, stacked[:1]])
        self._spline = CubicSpline(x, stacked, axis=0, bc_type="periodic")

    def __call__(self, x: float) -> Tuple[complex, complex]:
        values = self._spline(x)
        return complex(values[0], values[1]), complex(values[2], values[3])


@dataclass
class PotentialField:
    """Off-diagonal entries of Q: upper = u(x), lower = κ·u*(−x)."""

    grid: GridSpec1D
    upper: np.ndarray
    lower: np.ndarray
    kappa: int

    @property
    def is_zero(self) -> bool:
        return not (np.any(self.upper) or np.any(self.lower))

    @cached_property
    def interpolant(self) -> _FieldInterpolant:
        return _FieldInterpolant(self.grid, self.upper, self.lower)

    def support(self) -> Tuple[float, float]:
        """Smallest interval outside of which both rows are negligible."""
        magnitude = np.maximum(np.abs(self.upper), np.abs(self.lower))
        active = np.nonzero(magnitude > SUPPORT_THRESHOLD * magnitude.max())[0]
        x = self.grid.x
        lo = max(self.grid.x_min, x[active[0]] - 2 * self.grid.h)
        hi = min(self.grid.x_max, x[active[-1]] + 2 * self.grid.h)
        return float(lo), float(hi)


def build_potential(u0: ComplexField, kappa: int) -> PotentialField:
    """
    Build the potential pair (u, κu*(−x)) from an initial field.

    Args:
        u0: Decaying field on a symmetric grid
        kappa: Sign of the nonlocal coupling, +1 or −1

    Returns:
        PotentialField whose lower row is the exact index-reflected conjugate
    """
    if kappa not in (1, -1):
        raise ConfigError(f"kappa must be +1 or -1, got {kappa}")
    u0.check_finite()
    index = u0.grid.reflected_index()
    u0.check_decay()
    upper = u0.samples.copy()
    lower = kappa * np.conj(upper[index])
    return PotentialField(u0.grid, upper, lower, kappa)


def _identity_batch(count: int) -> np.ndarray:
    return np.tile(np.eye(2, dtype=complex), (count, 1, 1))


def _conjugated_flow(p: PotentialField, zs: np.ndarray, span: Tuple[float, float]) -> np.ndarray:
    """Integrate Y_x = [[0, u e^{2izx}], [v e^{−2izx}, 0]] Y, Y = I at span[0], for every z at once."""
    count = zs.size
    if p.is_zero or span[0] == span[1]:
        return _identity_batch(count)

    interpolant = p.interpolant

    def rhs(x, y):
        Y = y.reshape(count, 2, 2)
        u, v = interpolant(x)
        phase = np.exp(2j * zs * x)
        out = np.empty_like(Y)
        out[:, 0, :] = (u * phase)[:, None] * Y[:, 1, :]
        out[:, 1, :] = (v / phase)[:, None] * Y[:, 0, :]
        return out.ravel()

    solution = solve_ivp(
        rhs, span, _identity_batch(count).ravel(), method="RK45", rtol=JOST_RTOL, atol=JOST_ATOL
    )
    if not solution.success:
        raise StepSizeError(f"Jost integration failed on {span}: {solution.message}")
    return solution.y[:, -1].reshape(count, 2, 2)


def _ungauge(Y: np.ndarray, zs: np.ndarray, x: float) -> np.ndarray:
    """Φ = e^{−izxσ3} Y e^{izxσ3}."""
    phi = Y.copy()
    phi[:, 0, 1] *= np.exp(-2j * zs * x)
    phi[:, 1, 0] *= np.exp(2j * zs * x)
    return phi


def jost_batch(p: PotentialField, zs: Sequence[float], side: str, x_match: float = 0.0) -> np.ndarray:
    """Φ⁻(x_match, z) (side='left') or Φ⁺(x_match, z) (side='right') for a vector of real z."""
    zs = np.asarray(zs, dtype=float).ravel()
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    if p.is_zero:
        return _identity_batch(zs.size)

    lo, hi = p.support()
    if side == "left":
        span = (min(lo, x_match), x_match)
    else:
        span = (max(hi, x_match), x_match)
    Y = _conjugated_flow(p, zs, span)
    return _ungauge(Y, zs, x_match)


def jost_solve(p: PotentialField, z: float, side: str, x_match: float = 0.0) -> np.ndarray:
    """
    Jost matrix at the matching point for one real spectral parameter.

    Args:
        p: Potential pair
        z: Real spectral parameter
        side: 'left' for Φ⁻ (normalised at x → −∞), 'right' for Φ⁺

    Returns:
        2×2 complex matrix with unit determinant
    """
    if not np.isfinite(z) or np.iscomplexobj(z) and np.imag(z) != 0:
        raise ValueError(f"jost_solve expects a real spectral parameter, got {z}")
    phi = jost_batch(p, [float(np.real(z))], side, x_match)[0]
    det = np.linalg.det(phi)
    if abs(det - 1) > 1e-8:
        logger.warning(f"Jost determinant drift {abs(det - 1):.2e} at z={z} ({side})")
    return phi


@dataclass
class ScatteringData:
    """Scattering coefficients and reflection coefficients on a real z grid."""

    zgrid: np.ndarray
    s11: np.ndarray
    s12: np.ndarray
    s21: np.ndarray
    s22: np.ndarray
    kappa: int
    alpha: float = 0.0
    beta: float = 0.0
    r: Optional[np.ndarray] = None
    rtilde: Optional[np.ndarray] = None
    time: float = 0.0
    flags: List[str] = field(default_factory=list)
    potential: Optional[PotentialField] = field(default=None, repr=False, compare=False)

    @classmethod
    def synthetic(cls, zgrid, r, rtilde, kappa: int = 1, alpha: float = 0.0, beta: float = 1.0) -> "ScatteringData":
        """Scattering data with prescribed r, r̃ and unit determinant (s11 = s22)."""
        zgrid = np.asarray(zgrid, dtype=float)
        r = np.broadcast_to(np.asarray(r, dtype=complex), zgrid.shape).copy()
        rtilde = np.broadcast_to(np.asarray(rtilde, dtype=complex), zgrid.shape).copy()
        s11 = 1.0 / np.sqrt(1.0 - r * rtilde)
        s22 = s11.copy()
        return cls(zgrid, s11, rtilde * s22, r * s11, s22, kappa, alpha, beta, r, rtilde)

    @property
    def has_reflection(self) -> bool:
        return self.r is not None and self.rtilde is not None

    @property
    def det(self) -> np.ndarray:
        return self.s11 * self.s22 - self.s12 * self.s21

    @property
    def rho(self) -> np.ndarray:
        """Product r·r̃ entering the jump factor 1 − ρ = 1/(s11 s22)."""
        self._require_reflection()
        return self.r * self.rtilde

    def _require_reflection(self):
        if not self.has_reflection:
            raise ValueError("Reflection coefficients not populated; call reflection_coefficients first")

    @property
    def is_symmetric_grid(self) -> bool:
        z = self.zgrid
        return bool(np.allclose(z, -z[::-1], rtol=0, atol=1e-12 * max(1.0, np.abs(z).max())))

    @cached_property
    def _reflection_splines(self) -> Tuple[CubicSpline, CubicSpline]:
        self._require_reflection()
        r = CubicSpline(self.zgrid, np.column_stack([self.r.real, self.r.imag]), axis=0)
        rt = CubicSpline(self.zgrid, np.column_stack([self.rtilde.real, self.rtilde.imag]), axis=0)
        return r, rt

    def interpolate_reflection(self, z) -> Tuple[np.ndarray, np.ndarray]:
        """Cubic interpolation of (r, r̃) at real z inside the grid."""
        z = np.asarray(z, dtype=float)
        if np.any(z < self.zgrid[0]) or np.any(z > self.zgrid[-1]):
            raise ValueError(f"Spectral points outside the grid [{self.zgrid[0]}, {self.zgrid[-1]}]")
        spline_r, spline_rt = self._reflection_splines
        r, rt = spline_r(z), spline_rt(z)
        return r[..., 0] + 1j * r[..., 1], rt[..., 0] + 1j * rt[..., 1]

    def identity_residuals(self) -> Dict[str, float]:
        residuals = {"det_S": float(np.max(np.abs(self.det - 1)))}
        if self.has_reflection:
            residuals["jump_factor"] = float(np.max(np.abs((1 - self.rho) - 1 / (self.s11 * self.s22))))
        return residuals

    def symmetry_residuals(self) -> Dict[str, float]:
        """Residuals of s11(z) = s11*(−z), s22(z) = s22*(−z), s12(z) = κ s21*(−z)."""
        if not self.is_symmetric_grid:
            raise ValueError("Symmetry residuals need a spectral grid symmetric about 0")
        flip = slice(None, None, -1)
        return {
            "s11": float(np.max(np.abs(self.s11 - np.conj(self.s11[flip])))),
            "s22": float(np.max(np.abs(self.s22 - np.conj(self.s22[flip])))),
            "s12": float(np.max(np.abs(self.s12 - self.kappa * np.conj(self.s21[flip])))),
        }


def scattering_matrix(p: PotentialField, zgrid: Sequence[float], x_match: float = 0.0,
                      alpha: float = 0.0, beta: float = 0.0) -> ScatteringData:
    """
    Assemble S(z) from Wronskians of the Jost columns at the matching point.

    Args:
        p: Potential pair
        zgrid: Sorted real spectral grid
        x_match: Matching point; S does not depend on it

    Returns:
        ScatteringData without reflection coefficients; determinant deviations are flagged
    """
    zs = np.asarray(zgrid, dtype=float).ravel()
    if not np.all(np.isfinite(zs)) or np.any(np.diff(zs) <= 0):
        raise ValueError("Spectral grid must be finite and strictly increasing")

    logger.info(f"Integrating Jost solutions for {zs.size} spectral points")
    phi_minus = jost_batch(p, zs, "left", x_match)
    phi_plus = jost_batch(p, zs, "right", x_match)

    # Ψ = Φ e^{−izxσ3}
    column_phase = np.exp(-1j * zs * x_match)
    psi_minus = phi_minus * np.stack([column_phase, 1 / column_phase], axis=-1)[:, None, :]
    psi_plus = phi_plus * np.stack([column_phase, 1 / column_phase], axis=-1)[:, None, :]

    def wronskian(a, b):
        return a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]

    s11 = wronskian(psi_minus[:, :, 0], psi_plus[:, :, 1])
    s12 = wronskian(psi_minus[:, :, 1], psi_plus[:, :, 1])
    s21 = wronskian(psi_plus[:, :, 0], psi_minus[:, :, 0])
    s22 = wronskian(psi_plus[:, :, 0], psi_minus[:, :, 1])

    sd = ScatteringData(zs, s11, s12, s21, s22, p.kappa, alpha, beta, potential=p)
    deviation = np.abs(sd.det - 1)
    for z, dev in zip(zs[deviation > DET_TOLERANCE], deviation[deviation > DET_TOLERANCE]):
        sd.flags.append(f"det S deviates by {dev:.3e} at z={z:.6g}")
    if sd.flags:
        logger.warning(f"{len(sd.flags)} spectral points exceed the determinant tolerance")
    return sd


def reflection_coefficients(sd: ScatteringData) -> ScatteringData:
    """r = s21/s11 and r̃ = s12/s22; refuses spectral singularities."""
    for name, values in (("s11", sd.s11), ("s22", sd.s22)):
        small = np.abs(values) < SINGULARITY_THRESHOLD
        if np.any(small):
            z = float(sd.zgrid[np.argmax(small)])
            raise SpectralSingularityError(f"Spectral singularity: |{name}| < {SINGULARITY_THRESHOLD} at z={z}", z=z)

    updated = dataclasses.replace(sd, r=sd.s21 / sd.s11, rtilde=sd.s12 / sd.s22, flags=list(sd.flags))
    residual = updated.identity_residuals()["jump_factor"]
    if residual > DET_TOLERANCE:
        updated.flags.append(f"1 - r*rtilde differs from 1/(s11 s22) by {residual:.3e}")
    return updated


def evolve_reflection(sd: ScatteringData, t0: float) -> ScatteringData:
    """Carry the scattering data to time t0: r → r·e^{iφ}, r̃ → r̃·e^{−iφ}, φ = (4αz² + 8βz³)t0."""
    if t0 < 0:
        raise ValueError(f"t0 must be non-negative, got {t0}")
    sd._require_reflection()
    phase = np.exp(1j * (4 * sd.alpha * sd.zgrid ** 2 + 8 * sd.beta * sd.zgrid ** 3) * t0)
    return dataclasses.replace(
        sd,
        s21=sd.s21 * phase,
        s12=sd.s12 / phase,
        r=sd.r * phase,
        rtilde=sd.rtilde / phase,
        time=sd.time + t0,
        flags=list(sd.flags),
    )


def born_approximation(p: PotentialField, zgrid: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    """First-order values s21 ≈ ∫v e^{−2izy} dy and s12 ≈ ∫u e^{2izy} dy."""
    zs = np.asarray(zgrid, dtype=float)
    kernel = np.exp(2j * np.outer(zs, p.grid.x))
    h = p.grid.h
    s21 = h * (np.conj(kernel) @ p.lower)
    s12 = h * (kernel @ p.upper)
    return s21, s12


def s11_complex(p: PotentialField, zs: Sequence[complex], rtol: float = 1e-9) -> np.ndarray:
    """s11(z) for Im z ≥ 0 from the upper-analytic columns Φ⁻₁ and Φ⁺₂ at x = 0."""
    zs = np.asarray(zs, dtype=complex).ravel()
    if np.any(zs.imag < 0):
        raise ValueError("s11 continues analytically only into the upper half-plane")
    if p.is_zero:
        return np.ones(zs.size, dtype=complex)

    interpolant = p.interpolant
    lo, hi = p.support()
    count = zs.size

    def left_rhs(x, y):
        a, b = y[:count], y[count:]
        u, v = interpolant(x)
        return np.concatenate([u * b, 2j * zs * b + v * a])

    def right_rhs(x, y):
        c, d = y[:count], y[count:]
        u, v = interpolant(x)
        return np.concatenate([-2j * zs * c + u * d, v * c])

    ones, zeros = np.ones(count, dtype=complex), np.zeros(count, dtype=complex)
    left = solve_ivp(left_rhs, (min(lo, 0.0), 0.0), np.concatenate([ones, zeros]),
                     method="RK45", rtol=rtol, atol=rtol * 1e-2)
    right = solve_ivp(right_rhs, (max(hi, 0.0), 0.0), np.concatenate([zeros, ones]),
                      method="RK45", rtol=rtol, atol=rtol * 1e-2)
    if not (left.success and right.success):
        raise StepSizeError("Jost column integration failed off the real axis")

    a, b = left.y[:count, -1], left.y[count:, -1]
    c, d = right.y[:count, -1], right.y[count:, -1]
    return a * d - c * b


def _box_contour(box: Tuple[float, float, float, float], per_side: int) -> np.ndarray:
    x0, x1, y0, y1 = box
    t = np.linspace(0.0, 1.0, per_side, endpoint=False)
    bottom = x0 + (x1 - x0) * t + 1j * y0
    right = x1 + 1j * (y0 + (y1 - y0) * t)
    top = x1 + (x0 - x1) * t + 1j * y1
    left = x0 + 1j * (y1 + (y0 - y1) * t)
    return np.concatenate([bottom, right, top, left])


def winding_number(p: PotentialField, box: Tuple[float, float, float, float] = DEFAULT_BOX,
                   per_side: int = 128, max_refinements: int = 4) -> Dict:
    """
    Count zeros of s11 inside a rectangle of the upper half-plane by the argument principle.

    Returns:
        Dict with 'winding_number', 'min_abs_s11' and 'samples'
    """
    for _ in range(max_refinements + 1):
        contour = _box_contour(box, per_side)
        values = s11_complex(p, contour)
        closed = np.append(values, values[0])
        steps = np.angle(closed[1:] / closed[:-1])
        if np.max(np.abs(steps)) < np.pi / 2:
            break
        per_side *= 2
    else:
        logger.warning("Winding-number contour still under-resolved after refinement")

    winding = int(round(float(np.sum(steps)) / (2 * np.pi)))
    return {
        "winding_number": winding,
        "min_abs_s11": float(np.min(np.abs(values))),
        "samples": int(contour.size),
    }


def validate_assumptions(sd: ScatteringData, box: Tuple[float, float, float, float] = DEFAULT_BOX) -> Dict:
    """
    Check |arg(1 − ρ)| < π, |Im ν| < 1/2 and the absence of zeros of s11 in ℂ₊.

    Returns:
        Report dict with per-z margins, winding number and 'validation_status'
    """
    sd._require_reflection()
    issues = []

    jump = 1 - sd.rho
    arg_margin = np.pi - np.abs(np.angle(jump))
    nu = -np.log(jump.astype(complex)) / (2 * np.pi)
    im_nu_margin = 0.5 - np.abs(nu.imag)

    if np.any(arg_margin <= 0):
        z = sd.zgrid[np.argmin(arg_margin)]
        issues.append(f"|arg(1 - r*rtilde)| >= pi at z={z:.6g}")
    if np.any(im_nu_margin <= 0):
        z = sd.zgrid[np.argmin(im_nu_margin)]
        issues.append(f"|Im nu| >= 1/2 at z={z:.6g}")

    winding = None
    if sd.potential is not None:
        contour = winding_number(sd.potential, box)
        winding = contour["winding_number"]
        if winding != 0:
            issues.append(f"s11 has {winding} zero(s) in the upper half-plane box {box}")
    else:
        logger.warning("No potential attached to the scattering data; winding number not computed")

    report = {
        "zgrid": sd.zgrid,
        "arg_margin": arg_margin,
        "im_nu_margin": im_nu_margin,
        "min_arg_margin": float(arg_margin.min()),
        "min_im_nu_margin": float(im_nu_margin.min()),
        "max_im_nu": float(np.max(nu.imag)),
        "winding_number": winding,
        "det_residual": sd.identity_residuals()["det_S"],
        "issues": issues + list(sd.flags),
        "validation_status": "passed" if not issues else "failed",
    }
    if sd.is_symmetric_grid:
        report["symmetry_residual"] = max(sd.symmetry_residuals().values())

    logger.info(f"Assumption check {report['validation_status']}: {len(issues)} issues found")
    return report


def _gaussian(x, amplitude=1.0, width=1.0, center=0.0, phase_slope=0.0):
    return amplitude * np.exp(-((x - center) / width) ** 2 + 1j * phase_slope * x)


def _sech(x, amplitude=1.0, width=1.0, center=0.0, phase_slope=0.0):
    return amplitude / np.cosh((x - center) / width) * np.exp(1j * phase_slope * x)


def _constant(x, amplitude=1.0):
    return np.full(x.shape, amplitude, dtype=complex)


def _zero(x):
    return np.zeros(x.shape, dtype=complex)


INITIAL_DATA = {
    "zero": _zero,
    "gaussian": _gaussian,
    "sech": _sech,
    "constant": _constant,
}


def closed_form_field(expression: str, grid: GridSpec1D, **params) -> ComplexField:
    """Sample a registered closed-form initial datum on the grid."""
    if expression not in INITIAL_DATA:
        raise ConfigError(f"Unknown initial datum '{expression}'. Available: {sorted(INITIAL_DATA)}")
    try:
        samples = INITIAL_DATA[expression](grid.x, **params)
    except TypeError as e:
        raise ConfigError(f"Bad parameters for initial datum '{expression}': {e}")
    return ComplexField(grid, samples, 0.0)


def write_scattering_csv(sd: ScatteringData, path) -> Path:
    """Write the scattering table with 17 significant digits."""
    sd._require_reflection()
    columns = {"z": sd.zgrid}
    for name, values in (("s11", sd.s11), ("s12", sd.s12), ("s21", sd.s21), ("s22", sd.s22),
                         ("r", sd.r), ("rt", sd.rtilde)):
        columns[f"Re_{name}"] = values.real
        columns[f"Im_{name}"] = values.imag
    path = Path(path)
    pd.DataFrame(columns, columns=SCATTERING_COLUMNS).to_csv(path, index=False, float_format=FLOAT_FORMAT)
    return path


def read_scattering_csv(path, kappa: int, alpha: float = 0.0, beta: float = 0.0) -> ScatteringData:
    frame = pd.read_csv(path, float_precision="round_trip")
    missing = [c for c in SCATTERING_COLUMNS if c not in frame.columns]
    if missing:
        raise ConfigError(f"Scattering CSV {path} lacks columns {missing}")

    def column(name):
        return frame[f"Re_{name}"].to_numpy() + 1j * frame[f"Im_{name}"].to_numpy()

    return ScatteringData(
        frame["z"].to_numpy(dtype=float), column("s11"), column("s12"), column("s21"), column("s22"),
        kappa, alpha, beta, r=column("r"), rtilde=column("rt"),
    )


def read_field_csv(path) -> ComplexField:
    """Read `x,Re_u,Im_u` (or `x,u` for real data) sampled on a uniform grid."""
    frame = pd.read_csv(path, float_precision="round_trip")
    if frame.shape[1] < 2:
        raise ConfigError(f"Field CSV {path} needs at least two columns")
    x = frame.iloc[:, 0].to_numpy(dtype=float)
    samples = frame.iloc[:, 1].to_numpy(dtype=float).astype(complex)
    if frame.shape[1] >= 3:
        samples = samples + 1j * frame.iloc[:, 2].to_numpy(dtype=float)

    if x.size < 2 or not np.allclose(np.diff(x), x[1] - x[0], rtol=1e-9, atol=0):
        raise GridError(f"Field CSV {path} is not sampled on a uniform grid")
    h = (x[-1] - x[0]) / (x.size - 1)
    grid = GridSpec1D(float(x[0]), float(x[-1] + h), int(x.size))
    return ComplexField(grid, samples, 0.0)


def write_field_csv(f: ComplexField, path) -> Path:
    path = Path(path)
    frame = pd.DataFrame({"x": f.x, "Re_u": f.samples.real, "Im_u": f.samples.imag})
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    return path
