#!/usr/bin/env python3
"""
Special Functions Module
Complex Gamma and parabolic cylinder functions D_a(k) of complex order,
the two kernels needed by the parabolic cylinder model problem.
"""

import cmath
import logging
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DomainError, GammaPoleError, StepSizeError

logger = logging.getLogger(__name__)

EPS = np.finfo(float).eps

# Lanczos approximation, g = 7, n = 9
LANCZOS_G = 7
LANCZOS_COEFFICIENTS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)

POLE_TOLERANCE = 1e-12
MAX_ORDER = 5.0
MAX_ARGUMENT = 50.0
SERIES_RADIUS = 4.0


@dataclass(frozen=True)
class SpecialValue:
    """A special-function value with an advisory absolute-error estimate."""

    value: complex
    err_est: float

    def __post_init__(self):
        if not math.isfinite(self.err_est) or self.err_est < 0:
            raise ValueError(f"err_est must be finite and non-negative, got {self.err_est}")

    def __complex__(self) -> complex:
        return complex(self.value)


def _nearest_pole(z: complex):
    """Return the nonpositive integer within POLE_TOLERANCE of z, or None."""
    n = round(z.real)
    if n <= 0 and abs(z - n) < POLE_TOLERANCE:
        return n
    return None


def _lanczos(z: complex) -> complex:
    # valid for Re z >= 1/2
    z = z - 1
    series = LANCZOS_COEFFICIENTS[0]
    for i in range(1, len(LANCZOS_COEFFICIENTS)):
        series += LANCZOS_COEFFICIENTS[i] / (z + i)
    t = z + LANCZOS_G + 0.5
    return math.sqrt(2 * math.pi) * cmath.exp((z + 0.5) * cmath.log(t) - t) * series


def gamma_complex(z: complex) -> SpecialValue:
    """
    Evaluate Γ(z) for complex z.

    Args:
        z: Complex argument, not a nonpositive integer

    Returns:
        SpecialValue holding Γ(z); relative accuracy ~1e-14 for |Im z| <= 10, |z| <= 20
    """
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise DomainError(f"Gamma argument is not finite: {z}")

    pole = _nearest_pole(z)
    if pole is not None:
        raise GammaPoleError(f"Gamma pole at {pole} (argument {z})")

    if z.real < 0.5:
        # reflection Γ(z)Γ(1−z) = π / sin(πz)
        value = math.pi / (cmath.sin(math.pi * z) * _lanczos(1 - z))
    else:
        value = _lanczos(z)

    err_est = 32 * EPS * abs(value) * (1.0 + abs(z))
    return SpecialValue(value, err_est)


def reciprocal_gamma(z: complex) -> complex:
    """1/Γ(z), entire; exactly zero at the poles of Γ."""
    z = complex(z)
    if _nearest_pole(z) is not None:
        return 0j
    return 1.0 / gamma_complex(z).value


def _kummer_pair(a: complex, b: complex, w: complex, max_terms: int = 800):
    """
    Sum Kummer's M(a, b, w) and dM/dw together.

    Returns (M, dM/dw, largest term magnitude, last term magnitude).
    """
    term = 1.0 + 0j
    total = term
    derivative = 0j
    largest = 1.0
    for n in range(max_terms):
        ratio = (a + n) / (b + n)
        derivative += term * ratio
        term = term * ratio * w / (n + 1)
        total += term
        largest = max(largest, abs(term))
        if term == 0:
            break
        if n > abs(w) and abs(term) <= EPS * 1e-2 * abs(total) and abs(term) <= EPS * 1e-2 * max(abs(derivative), 1.0):
            break
    else:
        logger.warning(f"Kummer series not converged after {max_terms} terms (w={w})")
    return total, derivative, largest, abs(term)


def _origin_values(a: complex) -> Tuple[complex, complex]:
    """D_a(0) and D_a'(0)."""
    sqrt_pi = math.sqrt(math.pi)
    log2 = math.log(2.0)
    value = cmath.exp(0.5 * a * log2) * sqrt_pi * reciprocal_gamma((1 - a) / 2)
    slope = -cmath.exp(0.5 * (a + 1) * log2) * sqrt_pi * reciprocal_gamma(-a / 2)
    return value, slope


def _series_pair(a: complex, k: complex) -> Tuple[SpecialValue, SpecialValue]:
    """Even/odd Maclaurin solutions of Weber's equation combined through D_a(0), D_a'(0)."""
    w = k * k / 2
    m_even, dm_even, big_even, last_even = _kummer_pair(-a / 2, 0.5, w)
    m_odd, dm_odd, big_odd, last_odd = _kummer_pair((1 - a) / 2, 1.5, w)
    gauss = cmath.exp(-k * k / 4)

    even = gauss * m_even
    even_prime = gauss * (-0.5 * k * m_even + k * dm_even)
    odd = k * gauss * m_odd
    odd_prime = gauss * (m_odd - 0.5 * k * k * m_odd + k * k * dm_odd)

    d0, dp0 = _origin_values(a)
    value = d0 * even + dp0 * odd
    slope = d0 * even_prime + dp0 * odd_prime

    scale = abs(gauss) * (abs(d0) * big_even + abs(dp0) * (1 + abs(k)) * big_odd)
    tail = abs(gauss) * (abs(d0) * last_even + abs(dp0) * (1 + abs(k)) * last_odd)
    err_value = 64 * EPS * scale + tail
    err_slope = (1 + abs(k)) ** 2 * err_value
    return SpecialValue(value, err_value), SpecialValue(slope, err_slope)


def _continued_pair(a: complex, k: complex) -> Tuple[SpecialValue, SpecialValue]:
    """Integrate Weber's equation along the ray from |k| = 4 out to k."""
    direction = k / abs(k)
    start_value, start_slope = _series_pair(a, SERIES_RADIUS * direction)

    def rhs(s, y):
        zeta = s * direction
        return [direction * y[1], direction * (0.25 * zeta * zeta - 0.5 - a) * y[0]]

    y0 = np.array([start_value.value, start_slope.value], dtype=complex)
    atol = 1e-14 * max(1.0, float(np.max(np.abs(y0))))
    solution = solve_ivp(rhs, (SERIES_RADIUS, abs(k)), y0, method="DOP853", rtol=1e-12, atol=atol)
    if not solution.success:
        raise StepSizeError(f"Weber continuation failed for a={a}, k={k}: {solution.message}")

    value, slope = solution.y[0, -1], solution.y[1, -1]
    path_max = float(np.max(np.abs(solution.y[0])))
    n_steps = max(solution.t.size - 1, 1)
    err_value = start_value.err_est + 1e-12 * path_max * n_steps
    err_slope = start_slope.err_est + 1e-12 * float(np.max(np.abs(solution.y[1]))) * n_steps
    return SpecialValue(complex(value), err_value), SpecialValue(complex(slope), err_slope)


def _check_domain(a: complex, k: complex):
    if not all(math.isfinite(v) for v in (a.real, a.imag, k.real, k.imag)):
        raise DomainError(f"Non-finite input to parabolic cylinder function: a={a}, k={k}")
    if abs(a) > MAX_ORDER or abs(k) > MAX_ARGUMENT:
        raise DomainError(
            f"Parabolic cylinder function outside its accuracy domain "
            f"(|a|={abs(a):.3g} <= {MAX_ORDER}, |k|={abs(k):.3g} <= {MAX_ARGUMENT} required)"
        )


def parabolic_cylinder_D_pair(a: complex, k: complex) -> Tuple[SpecialValue, SpecialValue]:
    """
    Evaluate D_a(k) and its derivative with respect to k.

    Args:
        a: Complex order, |a| <= 5
        k: Complex argument, |k| <= 50

    Returns:
        (D_a(k), dD_a/dk(k)) as SpecialValues
    """
    a, k = complex(a), complex(k)
    _check_domain(a, k)
    if abs(k) <= SERIES_RADIUS:
        return _series_pair(a, k)
    return _continued_pair(a, k)


def parabolic_cylinder_D(a: complex, k: complex) -> SpecialValue:
    """D_a(k), the solution of D'' + (1/2 − k²/4 + a) D = 0 decaying along the positive real axis."""
    return parabolic_cylinder_D_pair(a, k)[0]
