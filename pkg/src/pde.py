#!/usr/bin/env python3
"""
PDE Module
Direct integration of the nonlocal Hirota equation
    i u_t + α[u_xx − 2κ u*(−x) u²] + iβ[u_xxx − 6κ u u*(−x) u_x] = 0
on a periodic grid: Fourier derivatives, exact linear propagator and
integrating-factor RK4 for the nonlinear terms.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Optional, Sequence

import numpy as np
from tqdm import tqdm

from .errors import BlowUpError, ConfigError, GridError, StepSizeError
from .scattering import ComplexField, GridSpec1D

logger = logging.getLogger(__name__)

SYSTEMS = ("nonlocal", "coupled")
BLOW_UP_THRESHOLD = 1e6
# RK4 stability interval on the imaginary axis is |λ dt| <= 2√2
STABILITY_LIMIT = 2.8
# radiation must not wrap around the periodic box before t_end
DOMAIN_FACTOR = 4.0


@dataclass(frozen=True)
class EvolutionConfig:
    """
    Discretisation of one evolution run.

    system='nonlocal' integrates the scalar equation with v = κu*(−x) recomputed every stage;
    system='coupled' integrates the AKNS pair (u, v) started from v(x, 0) = κu*(−x, 0).
    """

    grid: GridSpec1D
    dt: float
    t_end: float
    alpha: float
    beta: float
    kappa: int
    dealias: float = 2.0 / 3.0
    system: str = "nonlocal"
    support_threshold: float = 1e-2

    def __post_init__(self):
        if not self.dt > 0 or not math.isfinite(self.dt):
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if not self.t_end > 0:
            raise ConfigError(f"t_end must be positive, got {self.t_end}")
        if self.kappa not in (1, -1):
            raise ConfigError(f"kappa must be +1 or -1, got {self.kappa}")
        if not 0 < self.dealias <= 1:
            raise ConfigError(f"dealias fraction must lie in (0, 1], got {self.dealias}")
        if self.system not in SYSTEMS:
            raise ConfigError(f"system must be one of {SYSTEMS}, got {self.system!r}")
        if not 0 < self.support_threshold < 1:
            raise ConfigError(f"support threshold must lie in (0, 1), got {self.support_threshold}")
        if not self.grid.is_symmetric:
            raise GridError("Evolution needs a grid symmetric about x = 0")

    @cached_property
    def symbol(self) -> np.ndarray:
        """Linear symbol of u_t: −iαk² + iβk³."""
        k = self.grid.wavenumbers
        return -1j * self.alpha * k ** 2 + 1j * self.beta * k ** 3

    @cached_property
    def companion_symbol(self) -> np.ndarray:
        """Linear symbol of v_t in the coupled system: iαk² + iβk³."""
        k = self.grid.wavenumbers
        return 1j * self.alpha * k ** 2 + 1j * self.beta * k ** 3

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        k = np.abs(self.grid.wavenumbers)
        return k <= self.dealias * k.max()

    def stability_number(self, amplitude: float) -> float:
        """dt times the largest nonlinear rate for fields of the given amplitude."""
        k_cut = self.dealias * float(np.abs(self.grid.wavenumbers).max())
        a2 = amplitude ** 2
        return self.dt * (6 * abs(self.beta) * a2 * k_cut + 2 * abs(self.alpha) * a2)


@dataclass
class Trajectory:
    """Snapshots of u (and v for the coupled system) at the requested output times."""

    times: np.ndarray
    fields: List[ComplexField]
    companions: List[ComplexField]
    quasi_power: np.ndarray
    diagnostics: Dict[str, float] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.fields)

    def at(self, t: float) -> ComplexField:
        index = int(np.argmin(np.abs(self.times - t)))
        if not math.isclose(self.times[index], t, rel_tol=1e-12, abs_tol=1e-12):
            raise KeyError(f"No snapshot at t={t}")
        return self.fields[index]


def reflect_conjugate(f: ComplexField) -> ComplexField:
    """Return the field x ↦ conj(f(−x)) on the same symmetric grid."""
    index = f.grid.reflected_index()
    return ComplexField(f.grid, np.conj(f.samples[index]), f.time)


def _derivative(samples: np.ndarray, k: np.ndarray, order: int) -> np.ndarray:
    return np.fft.ifft((1j * k) ** order * np.fft.fft(samples, axis=-1), axis=-1)


def quasi_power(f: ComplexField) -> complex:
    """∫ u(x) conj(u(−x)) dx by the periodic trapezoidal rule."""
    index = f.grid.reflected_index()
    return complex(f.grid.h * np.sum(f.samples * np.conj(f.samples[index])))


def point_value(f: ComplexField, x: float) -> complex:
    """Trigonometric interpolant of the samples evaluated at x."""
    grid = f.grid
    n = grid.n
    coefficients = np.fft.fft(f.samples) / n
    k = grid.wavenumbers
    shift = x - grid.x_min
    phases = np.exp(1j * k * shift)
    # split the Nyquist mode symmetrically so real data stay real
    nyquist = n // 2
    phases[nyquist] = math.cos(k[nyquist] * shift)
    return complex(np.sum(coefficients * phases))


def linear_propagator(u0: ComplexField, cfg: EvolutionConfig, t: float) -> ComplexField:
    """Exact solution of i u_t + αu_xx + iβu_xxx = 0 at time u0.time + t (t may be negative)."""
    if u0.grid != cfg.grid:
        raise GridError("Initial field and evolution grid differ")
    samples = np.fft.ifft(np.fft.fft(u0.samples) * np.exp(cfg.symbol * t))
    return ComplexField(u0.grid, samples, u0.time + t)


class _Stepper:
    """Integrating-factor RK4 on the Fourier coefficients of one trajectory."""

    def __init__(self, cfg: EvolutionConfig):
        self.cfg = cfg
        self.k = cfg.grid.wavenumbers
        self.index = cfg.grid.reflected_index()
        self.mask = cfg.dealias_mask
        if cfg.system == "nonlocal":
            self.symbol = cfg.symbol[None, :]
        else:
            self.symbol = np.stack([cfg.symbol, cfg.companion_symbol])
        self._factors = {}

    def factors(self, h: float):
        key = round(h, 15)
        if key not in self._factors:
            half = np.exp(self.symbol * h / 2)
            self._factors[key] = (half, half * half)
        return self._factors[key]

    def nonlinear(self, state_hat: np.ndarray) -> np.ndarray:
        cfg = self.cfg
        physical = np.fft.ifft(state_hat * self.mask, axis=-1)
        u = physical[0]
        u_x = np.fft.ifft(1j * self.k * state_hat[0] * self.mask)
        if cfg.system == "nonlocal":
            v = cfg.kappa * np.conj(u[self.index])
            n_u = -2j * cfg.alpha * v * u ** 2 + 6 * cfg.beta * u * v * u_x
            return (np.fft.fft(n_u) * self.mask)[None, :]
        v = physical[1]
        v_x = np.fft.ifft(1j * self.k * state_hat[1] * self.mask)
        n_u = -2j * cfg.alpha * v * u ** 2 + 6 * cfg.beta * u * v * u_x
        n_v = 2j * cfg.alpha * u * v ** 2 + 6 * cfg.beta * u * v * v_x
        return np.stack([np.fft.fft(n_u), np.fft.fft(n_v)]) * self.mask

    def step(self, state_hat: np.ndarray, h: float) -> np.ndarray:
        half, full = self.factors(h)
        k1 = self.nonlinear(state_hat)
        k2 = self.nonlinear(half * (state_hat + 0.5 * h * k1))
        k3 = self.nonlinear(half * state_hat + 0.5 * h * k2)
        k4 = self.nonlinear(full * state_hat + h * half * k3)
        return full * state_hat + h / 6 * (full * k1 + 2 * half * (k2 + k3) + k4)


def _output_schedule(cfg: EvolutionConfig, output_times: Optional[Sequence[float]]) -> np.ndarray:
    if output_times is None:
        return np.array([0.0, cfg.t_end])
    times = np.asarray(sorted(set(float(t) for t in output_times)), dtype=float)
    if times.size == 0 or times[0] < 0 or times[-1] > cfg.t_end * (1 + 1e-12):
        raise ConfigError(f"Output times must lie in [0, {cfg.t_end}]")
    return times


def group_velocity_bound(u0: ComplexField, cfg: EvolutionConfig) -> float:
    """
    Largest |dω/dk| over the wavenumbers carrying the datum.

    The support is every k with |û(k)| >= support_threshold · max|û|; both the
    u branch (2αk − 3βk²) and the companion branch (−2αk − 3βk²) are bounded.
    """
    u_hat = np.abs(np.fft.fft(u0.samples))
    peak = float(u_hat.max())
    if peak == 0:
        return 0.0
    k = cfg.grid.wavenumbers[u_hat >= cfg.support_threshold * peak]
    speeds = np.maximum(np.abs(2 * cfg.alpha * k - 3 * cfg.beta * k ** 2),
                        np.abs(-2 * cfg.alpha * k - 3 * cfg.beta * k ** 2))
    return float(speeds.max())


def check_domain(u0: ComplexField, cfg: EvolutionConfig, strict: bool = False) -> float:
    """
    Check x_max >= DOMAIN_FACTOR · v_g · t_end and return the required half-width.

    Raises:
        ConfigError: strict is set and the grid is too small
    """
    required = DOMAIN_FACTOR * group_velocity_bound(u0, cfg) * cfg.t_end
    if cfg.grid.x_max < required:
        message = (f"x_max={cfg.grid.x_max:.6g} is below {required:.6g}; radiation wraps around "
                   f"the periodic box before t_end={cfg.t_end:.6g}")
        if strict:
            raise ConfigError(message)
        logger.warning(message)
    return required


def evolve(u0: ComplexField, cfg: EvolutionConfig, output_times: Sequence[float] = None,
           show_progress: bool = True) -> Trajectory:
    """
    Integrate from t = 0 and record snapshots.

    Args:
        u0: Initial field on cfg.grid
        cfg: Evolution configuration
        output_times: Snapshot times in [0, t_end] (default: 0 and t_end)
        show_progress: Display a tqdm bar over the time steps

    Returns:
        Trajectory with one ComplexField per output time and the quasi-power history
    """
    if u0.grid != cfg.grid:
        raise GridError("Initial field and evolution grid differ")
    u0.check_finite()

    amplitude = float(np.max(np.abs(u0.samples)))
    number = cfg.stability_number(amplitude)
    if number > STABILITY_LIMIT:
        raise StepSizeError(
            f"dt={cfg.dt} violates the RK4 stability bound for amplitude {amplitude:.3g} "
            f"({number:.3g} > {STABILITY_LIMIT})"
        )

    times = _output_schedule(cfg, output_times)
    required = check_domain(u0, cfg)
    stepper = _Stepper(cfg)
    v0 = cfg.kappa * np.conj(u0.samples[stepper.index])
    initial = u0.samples[None, :] if cfg.system == "nonlocal" else np.stack([u0.samples, v0])
    state_hat = np.fft.fft(initial, axis=-1)

    intervals = np.diff(np.concatenate([[0.0], times]))
    counts = [int(math.ceil(span / cfg.dt - 1e-9)) if span > 0 else 0 for span in intervals]
    logger.info(f"Evolving {cfg.system} system to t={times[-1]:.6g} in {sum(counts)} steps (n={cfg.grid.n})")

    fields, companions, powers = [], [], []
    current = 0.0
    peak = amplitude
    with tqdm(total=sum(counts), desc="evolve", unit="step", disable=not show_progress) as bar:
        for target, span, count in zip(times, intervals, counts):
            if count:
                h = span / count
                for _ in range(count):
                    state_hat = stepper.step(state_hat, h)
                    current += h
                    peak = _check_blow_up(state_hat[0], current, peak)
                    bar.update(1)
            current = float(target)
            physical = np.fft.ifft(state_hat, axis=-1)
            snapshot = ComplexField(cfg.grid, physical[0], current)
            fields.append(snapshot)
            if cfg.system == "coupled":
                companions.append(ComplexField(cfg.grid, physical[1], current))
            else:
                companions.append(ComplexField(cfg.grid, cfg.kappa * np.conj(physical[0][stepper.index]), current))
            powers.append(quasi_power(snapshot))

    powers = np.asarray(powers)
    drift = float(np.max(np.abs(powers - powers[0]))) if powers.size else 0.0
    logger.info(f"Quasi-power drift over the run: {drift:.3e}")
    diagnostics = {"quasi_power_drift": drift, "max_abs_u": peak, "required_x_max": required}
    return Trajectory(times, fields, companions, powers, diagnostics)


def _check_blow_up(u_hat: np.ndarray, t: float, peak: float) -> float:
    magnitude = float(np.max(np.abs(np.fft.ifft(u_hat))))
    if not math.isfinite(magnitude) or magnitude > BLOW_UP_THRESHOLD:
        logger.error(f"Blow-up at t={t:.6g}: max|u| = {magnitude:.3e}")
        raise BlowUpError(f"max|u| = {magnitude:.3e} exceeds {BLOW_UP_THRESHOLD:.0e} at t={t:.6g}")
    return max(peak, magnitude)


def residual(traj: Trajectory, cfg: EvolutionConfig) -> np.ndarray:
    """
    Per-snapshot L² norm of i u_t + α[u_xx − 2u²v] + iβ[u_xxx − 6uvu_x], with v = κu*(−x)
    for the nonlocal system and the integrated companion for the coupled one.

    u_t uses second-order differences over the snapshot times.
    """
    if len(traj) < 3:
        raise ValueError(f"Residual needs at least 3 snapshots, got {len(traj)}")
    k = cfg.grid.wavenumbers
    u = np.stack([f.samples for f in traj.fields])
    v = np.stack([f.samples for f in traj.companions])
    u_t = np.gradient(u, traj.times, axis=0, edge_order=2)
    u_x = _derivative(u, k, 1)
    u_xx = _derivative(u, k, 2)
    u_xxx = _derivative(u, k, 3)
    equation = (1j * u_t + cfg.alpha * (u_xx - 2 * u ** 2 * v)
                + 1j * cfg.beta * (u_xxx - 6 * u * v * u_x))
    return np.sqrt(cfg.grid.h * np.sum(np.abs(equation) ** 2, axis=1))
