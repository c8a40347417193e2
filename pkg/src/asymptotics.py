#!/usr/bin/env python3
"""
Asymptotics Module
Leading-order long-time behaviour of u(x,t) along a ray ξ = x/t: the scalar
conjugation factor δ, the endpoint constants δ_j, the parabolic cylinder model
problem at each stationary point and the resulting two-term formula.
"""

import cmath
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from .errors import (
    BranchJumpError,
    DegeneratePhaseError,
    ProximityError,
    QuadratureError,
    SubcriticalityError,
)
from .phase import PhaseGeometry, stationary_phase_value, stationary_points
from .scattering import ScatteringData
from .specfun import gamma_complex, parabolic_cylinder_D_pair, reciprocal_gamma

logger = logging.getLogger(__name__)

SQRT_2PI = math.sqrt(2 * math.pi)
GL_NODES, GL_WEIGHTS = np.polynomial.legendre.leggauss(16)
QUAD_TOLERANCE = 1e-10
MAX_PANELS = 4096
MIN_PROFILE_NODES = 257


@dataclass
class NuProfile:
    """ν(s) = −(1/2π) log(1 − r(s) r̃(s)) on [z1, z2], principal branch."""

    z1: float
    z2: float
    nodes: np.ndarray
    nu: np.ndarray
    nu1: complex
    nu2: complex
    max_im_nu: float
    evaluate: Callable[[np.ndarray], np.ndarray] = field(repr=False)

    @property
    def is_zero(self) -> bool:
        return not np.any(self.nu)

    def endpoint(self, j: int) -> Tuple[float, complex]:
        if j not in (1, 2):
            raise ValueError(f"Endpoint index must be 1 or 2, got {j}")
        return (self.z1, self.nu1) if j == 1 else (self.z2, self.nu2)

    def __call__(self, s) -> np.ndarray:
        return self.evaluate(np.asarray(s, dtype=float))


@dataclass
class AsymptoticEvaluation:
    """Leading-order value of u at one (x, t) and the pieces it is made of."""

    x: float
    t: float
    q_leading: complex
    contrib1: complex
    contrib2: complex
    xi_order: float
    diagnostics: Dict[str, complex] = field(default_factory=dict)

    def as_row(self) -> Dict[str, float]:
        return {
            "x": self.x,
            "t": self.t,
            "Re_q": self.q_leading.real,
            "Im_q": self.q_leading.imag,
            "abs_q": abs(self.q_leading),
            "xi_order": self.xi_order,
            "Im_nu1": complex(self.diagnostics.get("nu1", 0)).imag,
            "Im_nu2": complex(self.diagnostics.get("nu2", 0)).imag,
        }


def _log_jump(sd: ScatteringData, s: np.ndarray) -> np.ndarray:
    r, rt = sd.interpolate_reflection(s)
    return np.log((1 - r * rt).astype(complex))


def nu_profile(sd: ScatteringData, geom: PhaseGeometry, n_nodes: int = None) -> NuProfile:
    """
    Tabulate ν on a refined grid over [z1, z2].

    Args:
        sd: Scattering data with reflection coefficients
        geom: Stationary points of the ray
        n_nodes: Number of profile nodes (defaults to four per spectral sample, at least 257)

    Returns:
        NuProfile, after checking branch continuity and |Im ν| < 1/2
    """
    if geom.z1 < sd.zgrid[0] or geom.z2 > sd.zgrid[-1]:
        raise ValueError(
            f"Stationary points [{geom.z1:.6g}, {geom.z2:.6g}] lie outside the spectral grid "
            f"[{sd.zgrid[0]:.6g}, {sd.zgrid[-1]:.6g}]"
        )
    if n_nodes is None:
        inside = int(np.count_nonzero((sd.zgrid >= geom.z1) & (sd.zgrid <= geom.z2)))
        n_nodes = max(MIN_PROFILE_NODES, 4 * inside + 1)

    nodes = np.linspace(geom.z1, geom.z2, n_nodes)
    log_jump = _log_jump(sd, nodes)

    jumps = np.abs(np.diff(log_jump.imag))
    if jumps.size and jumps.max() >= np.pi:
        where = nodes[np.argmax(jumps)]
        raise BranchJumpError(f"log(1 - r*rtilde) jumps by {jumps.max():.3f} near z={where:.6g}")

    nu = -log_jump / (2 * np.pi)
    max_abs_im = float(np.max(np.abs(nu.imag)))
    if max_abs_im >= 0.5:
        raise SubcriticalityError(f"|Im nu| reaches {max_abs_im:.4f} >= 1/2 on [{geom.z1:.6g}, {geom.z2:.6g}]")

    def evaluate(s):
        return -_log_jump(sd, s) / (2 * np.pi)

    logger.debug(f"nu profile on [{geom.z1:.6g}, {geom.z2:.6g}]: max Im nu = {nu.imag.max():.4g}")
    return NuProfile(geom.z1, geom.z2, nodes, nu, complex(nu[0]), complex(nu[-1]), float(nu.imag.max()), evaluate)


def _panel_sum(f, breaks: np.ndarray, panels: int) -> complex:
    total = 0j
    for a, b in zip(breaks[:-1], breaks[1:]):
        if b <= a:
            continue
        edges = np.linspace(a, b, panels + 1)
        mid = 0.5 * (edges[1:] + edges[:-1])
        half = 0.5 * (edges[1:] - edges[:-1])
        s = (mid[:, None] + half[:, None] * GL_NODES[None, :]).ravel()
        w = (half[:, None] * GL_WEIGHTS[None, :]).ravel()
        total += np.sum(w * f(s))
    return total


def _integrate(f, breaks: Sequence[float], tol: float = QUAD_TOLERANCE) -> complex:
    """Composite Gauss-Legendre on fixed breakpoints, doubling panels until two passes agree."""
    breaks = np.unique(np.asarray(breaks, dtype=float))
    panels = 1
    previous = _panel_sum(f, breaks, panels)
    while panels < MAX_PANELS:
        panels *= 2
        current = _panel_sum(f, breaks, panels)
        if abs(current - previous) <= tol * max(1.0, abs(current)):
            return current
        previous = current
    raise QuadratureError(f"Gauss-Legendre quadrature did not converge with {panels} panels")


def _graded_breaks(a: float, b: float, x0: float, finest: float) -> List[float]:
    """Breakpoints refined geometrically toward x0 down to a panel of size ~finest."""
    breaks = [a, b, x0]
    width = b - a
    step = 0.5 * width
    while step > finest:
        breaks.extend([x0 - step, x0 + step])
        step *= 0.5
    return [p for p in breaks if a <= p <= b]


def _segment_distance(z: complex, profile: NuProfile) -> float:
    if profile.z1 <= z.real <= profile.z2:
        return abs(z.imag)
    nearest = profile.z1 if z.real < profile.z1 else profile.z2
    return abs(z - nearest)


def delta_at(z: complex, profile: NuProfile, tube: float = None) -> complex:
    """
    δ(z) = exp(i ∫_{z1}^{z2} ν(s)/(s − z) ds) off the segment.

    Args:
        z: Evaluation point at distance >= tube from [z1, z2]
        profile: ν profile of the ray
        tube: Exclusion radius, default 1e-3·(z2 − z1)

    Returns:
        δ(z)
    """
    z = complex(z)
    if profile.is_zero:
        return 1.0 + 0j
    if tube is None:
        tube = 1e-3 * (profile.z2 - profile.z1)
    distance = _segment_distance(z, profile)
    if distance == 0 or distance < tube:
        raise ProximityError(f"z={z} is within {tube:.2e} of the jump segment; use delta_plus_minus")

    x0 = min(max(z.real, profile.z1), profile.z2)
    nu0 = complex(profile([x0])[0])

    def integrand(s):
        return (profile(s) - nu0) / (s - z)

    breaks = _graded_breaks(profile.z1, profile.z2, x0, max(distance, 1e-14))
    cauchy_log = cmath.log((z - profile.z2) / (z - profile.z1))
    return cmath.exp(1j * (nu0 * cauchy_log + _integrate(integrand, breaks)))


def delta_plus_minus(s: float, profile: NuProfile) -> Tuple[complex, complex]:
    """Boundary values δ±(s) at an interior point, from the principal value ± iπν(s)."""
    if not profile.z1 < s < profile.z2:
        raise ValueError(f"s={s} is not interior to [{profile.z1}, {profile.z2}]")
    nu_s = complex(profile([s])[0])

    def integrand(t):
        return (profile(t) - nu_s) / (t - s)

    principal = nu_s * math.log((profile.z2 - s) / (s - profile.z1))
    principal += _integrate(integrand, [profile.z1, s, profile.z2])
    base = 1j * principal
    return cmath.exp(base - math.pi * nu_s), cmath.exp(base + math.pi * nu_s)


def delta_expansion_coefficient(profile: NuProfile) -> complex:
    """Coefficient c in δ(z) = 1 + c/z + O(z⁻²): c = −i ∫ ν ds."""
    if profile.is_zero:
        return 0j
    return -1j * _integrate(profile, [profile.z1, profile.z2])


def local_power(z: complex, profile: NuProfile, j: int) -> complex:
    """Endpoint factor of δ: (z1 − z)^{−iν1} at z1 and (z − z2)^{iν2} at z2."""
    z = complex(z)
    if j == 1:
        return cmath.exp(-1j * profile.nu1 * cmath.log(profile.z1 - z))
    if j == 2:
        return cmath.exp(1j * profile.nu2 * cmath.log(z - profile.z2))
    raise ValueError(f"Endpoint index must be 1 or 2, got {j}")


def delta_boundary(profile: NuProfile, j: int) -> complex:
    """
    δ_j = lim δ(z)/local_power(z, j) as z → z_j, through the cutoff-regularised integral.

    With ℓ = min(1, z2 − z1) and χ_j the indicator of the length-ℓ piece of the
    segment next to z_j, log δ_j = ±iν_j log ℓ + i ∫ (ν(s) − χ_j(s) ν_j)/(s − z_j) ds.
    """
    if profile.is_zero:
        return 1.0 + 0j
    zj, nuj = profile.endpoint(j)
    cutoff = min(1.0, profile.z2 - profile.z1)
    if j == 1:
        edge = profile.z1 + cutoff
        sign = 1.0
    else:
        edge = profile.z2 - cutoff
        sign = -1.0

    def integrand(s):
        near = (s <= edge) if j == 1 else (s >= edge)
        return (profile(s) - np.where(near, nuj, 0.0)) / (s - zj)

    integral = _integrate(integrand, [profile.z1, edge, profile.z2], tol=1e-12)
    return cmath.exp(sign * 1j * nuj * math.log(cutoff) + 1j * integral)


def _rho_of(nu: complex) -> complex:
    return 1 - cmath.exp(-2 * math.pi * nu)


def _upper_beta(nu: complex, coefficient: complex) -> complex:
    """√(2π) e^{iπ/4} e^{−πν/2} / (c Γ(−iν))."""
    return SQRT_2PI * cmath.exp(1j * math.pi / 4 - math.pi * nu / 2) * reciprocal_gamma(-1j * nu) / coefficient


def _lower_beta(nu: complex, coefficient: complex) -> complex:
    """√(2π) e^{−iπ/4} e^{−πν/2} c / ((1 − e^{−2πν}) Γ(iν))."""
    return SQRT_2PI * cmath.exp(-1j * math.pi / 4 - math.pi * nu / 2) * coefficient * reciprocal_gamma(1j * nu) / _rho_of(nu)


def model_constants(nu: complex, vartheta: complex, scale: float = 1.0, orientation: int = 1) -> Tuple[complex, complex]:
    """
    (β12, β21) of the parabolic cylinder model problem.

    Args:
        nu: ν at the stationary point
        vartheta: Phase-normalised reflection value ϑ
        scale: Base of the anomalous power; the model coefficient is ϑ·scale^{∓Im ν}
        orientation: +1 when θ'' > 0 at the point, −1 when the local picture is mirrored

    Returns:
        (β12, β21) with β12·β21 = ν; (0, 0) when ν = 0
    """
    nu = complex(nu)
    if nu == 0:
        return 0j, 0j
    if vartheta == 0:
        raise ValueError("Nonzero nu requires a nonzero reflection value")
    if orientation == 1:
        coefficient = vartheta * scale ** (-nu.imag)
        return _upper_beta(nu, coefficient), _lower_beta(nu, coefficient)
    # mirrored point: the roles of the two off-diagonal constants swap
    coefficient = vartheta * scale ** nu.imag
    beta12 = SQRT_2PI * cmath.exp(-1j * math.pi / 4 - math.pi * nu / 2) * reciprocal_gamma(1j * nu) / coefficient
    beta21 = SQRT_2PI * cmath.exp(1j * math.pi / 4 - math.pi * nu / 2) * coefficient * reciprocal_gamma(-1j * nu) / _rho_of(nu)
    return beta12, beta21


def _local_scale(geom: PhaseGeometry, t: float, j: int) -> Tuple[float, int]:
    curvature = geom.curvature(j)
    if curvature == 0 or t <= 0:
        raise DegeneratePhaseError(f"Scaling factor 8(6*beta*z{j} + alpha)t vanishes (t={t})")
    return 8 * abs(curvature) * t, (1 if curvature > 0 else -1)


def vartheta(profile: NuProfile, sd: ScatteringData, geom: PhaseGeometry, t: float, j: int) -> complex:
    """
    ϑ(z_j) = r(z_j) δ_j⁻² e^{±i Re ν_j ln(8|α + 6βz_j| t)} e^{2itθ(z_j)}.

    The sign in the logarithmic phase is the orientation of the stationary point.
    """
    scale, orientation = _local_scale(geom, t, j)
    zj, nuj = profile.endpoint(j)
    rj = complex(sd.interpolate_reflection([zj])[0][0])
    if rj == 0:
        return 0j

    delta_j = delta_boundary(profile, j)
    phase = stationary_phase_value(geom, t, j)
    value = rj * delta_j ** -2 * cmath.exp(1j * orientation * nuj.real * math.log(scale) + 1j * phase)

    expected = abs(rj) * abs(delta_j) ** -2
    if abs(abs(value) - expected) > 1e-10 * max(1.0, expected):
        logger.warning(f"|vartheta| = {abs(value):.12g} differs from |r| |delta_j|^-2 = {expected:.12g}")
    return value


def beta12(profile: NuProfile, sd: ScatteringData, geom: PhaseGeometry, t: float, j: int,
           strict_paper_constants: bool = True) -> Tuple[complex, complex]:
    """Model constants (β12(z_j), β21(z_j)) at time t."""
    scale, orientation = _local_scale(geom, t, j)
    _, nuj = profile.endpoint(j)
    if nuj == 0:
        return 0j, 0j
    value = vartheta(profile, sd, geom, t, j)
    power_base = t if strict_paper_constants else scale
    b12, b21 = model_constants(nuj, value, power_base, orientation)

    product_error = abs(b12 * b21 - nuj)
    if product_error > 1e-8 * abs(nuj):
        logger.warning(f"beta12*beta21 - nu = {product_error:.3e} at z{j}")
    return b12, b21


def _closed_form_term(nu: complex, value: complex, geom: PhaseGeometry, t: float, j: int, strict: bool) -> complex:
    """Closed-form contribution of one stationary point."""
    if nu == 0 or value == 0:
        return 0j
    scale, orientation = _local_scale(geom, t, j)
    base = t if strict else scale
    root = math.sqrt(abs(geom.curvature(j)) * t)
    if orientation == 1:
        prefactor = base ** nu.imag * cmath.exp(1j * math.pi / 4 - math.pi * nu / 2)
        return math.sqrt(math.pi) * prefactor / (root * value * gamma_complex(-1j * nu).value)
    prefactor = base ** (-nu.imag) * cmath.exp(-1j * math.pi / 4 - math.pi * nu / 2)
    return math.sqrt(math.pi) * prefactor / (root * value * gamma_complex(1j * nu).value)


def error_order(nu1: complex, nu2: complex) -> float:
    """Exponent of the error term: −3/4, raised by max Im ν / 2 when that is positive."""
    top = max(complex(nu1).imag, complex(nu2).imag)
    return -0.75 + top / 2 if top > 0 else -0.75


def leading_exponent(evaluation: AsymptoticEvaluation) -> float:
    """Largest amplitude exponent among the two contributions."""
    return max(evaluation.diagnostics["exponent1"], evaluation.diagnostics["exponent2"])


def leading_order_q(sd: ScatteringData, profile: NuProfile, geom: PhaseGeometry, x: float, t: float,
                    strict_paper_constants: bool = True) -> AsymptoticEvaluation:
    """
    Leading-order asymptotics of u at (x, t) on the ray of geom.

    Args:
        sd: Scattering data at t = 0
        profile: ν profile for geom
        geom: Stationary points with geom.xi = x/t
        x, t: Evaluation point, t > 0

    Returns:
        AsymptoticEvaluation; contributions are 2β12(z_j)/√(8|α + 6βz_j| t)
    """
    if t <= 0:
        raise ValueError(f"t must be positive, got {t}")
    if not math.isclose(x / t, geom.xi, rel_tol=1e-10, abs_tol=1e-12):
        raise ValueError(f"x/t = {x / t} does not match the ray xi = {geom.xi}")

    contributions = []
    diagnostics = {}
    for j in (1, 2):
        scale, orientation = _local_scale(geom, t, j)
        _, nuj = profile.endpoint(j)
        if nuj == 0:
            b12 = b21 = value = delta_j = 0j
        else:
            delta_j = delta_boundary(profile, j)
            value = vartheta(profile, sd, geom, t, j)
            b12, b21 = beta12(profile, sd, geom, t, j, strict_paper_constants)
        laurent = 2 * b12 / math.sqrt(scale)
        closed_form = _closed_form_term(nuj, value, geom, t, j, strict_paper_constants)
        if abs(laurent - closed_form) > 1e-10 * max(1.0, abs(laurent)):
            logger.warning(f"Contribution routes disagree at z{j}: {laurent} vs {closed_form}")
        contributions.append(laurent)
        diagnostics.update({
            f"z{j}": geom.point(j),
            f"nu{j}": nuj,
            f"delta{j}": delta_j,
            f"vartheta{j}": value,
            f"beta12_{j}": b12,
            f"beta21_{j}": b21,
            f"closed_form_contrib{j}": closed_form,
            f"orientation{j}": orientation,
            f"exponent{j}": -0.5 + orientation * nuj.imag,
        })

    contrib1, contrib2 = contributions
    return AsymptoticEvaluation(
        x=float(x),
        t=float(t),
        q_leading=contrib1 + contrib2,
        contrib1=contrib1,
        contrib2=contrib2,
        xi_order=error_order(profile.nu1, profile.nu2),
        diagnostics=diagnostics,
    )


def evaluate_ray(sd: ScatteringData, xi: float, times: Sequence[float], strict_paper_constants: bool = True,
                 max_workers: int = None) -> List[AsymptoticEvaluation]:
    """Evaluate the leading-order formula at x = ξt for every t, in parallel."""
    geom = stationary_points(xi, sd.alpha, sd.beta)
    if geom.orientation < 0:
        raise DegeneratePhaseError("Leading-order formula is implemented for beta > 0")
    profile = nu_profile(sd, geom)

    def one(t):
        return leading_order_q(sd, profile, geom, xi * t, t, strict_paper_constants)

    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(one, times))


def _half_entries(k: complex, nu: complex, b12: complex, b21: complex, half: str) -> np.ndarray:
    a = 1j * nu
    if half == "upper":
        rot11, rot22 = cmath.exp(-3j * math.pi / 4), cmath.exp(-1j * math.pi / 4)
        w11, w22 = cmath.exp(-3 * math.pi * nu / 4), cmath.exp(math.pi * nu / 4)
    else:
        rot11, rot22 = cmath.exp(1j * math.pi / 4), cmath.exp(3j * math.pi / 4)
        w11, w22 = cmath.exp(math.pi * nu / 4), cmath.exp(-3 * math.pi * nu / 4)

    d, d_prime = (v.value for v in parabolic_cylinder_D_pair(a, rot11 * k))
    e, e_prime = (v.value for v in parabolic_cylinder_D_pair(-a, rot22 * k))

    m = np.zeros((2, 2), dtype=complex)
    m[0, 0] = w11 * d
    m[1, 1] = w22 * e
    if nu != 0:
        m[1, 0] = w11 / b12 * (rot11 * d_prime + 0.5j * k * d)
        m[0, 1] = w22 / b21 * (rot22 * e_prime - 0.5j * k * e)
    return m


def model_matrix(k: complex, nu_j: complex, vartheta_j: complex, half: str) -> np.ndarray:
    """
    Parabolic cylinder solution of the model problem in the requested half-plane.

    The upper and lower matrices solve dΨ/dk = (−(ik/2)σ3 + [[0, β12], [β21, 0]])Ψ and, on the real
    axis, Ψ_lower⁻¹ Ψ_upper = [[1 − ρ, −ρ/ϑ], [ϑ, 1]] with ρ = 1 − e^{−2πν}.
    """
    if half not in ("upper", "lower"):
        raise ValueError(f"half must be 'upper' or 'lower', got {half!r}")
    nu_j = complex(nu_j)
    b12, b21 = model_constants(nu_j, vartheta_j)
    return _half_entries(complex(k), nu_j, b12, b21, half)


def model_jump(nu_j: complex, vartheta_j: complex) -> np.ndarray:
    """Constant jump [[1 − ρ, −ρ/ϑ], [ϑ, 1]] expected between the two halves."""
    nu_j = complex(nu_j)
    if nu_j == 0:
        return np.eye(2, dtype=complex)
    rho = _rho_of(nu_j)
    return np.array([[1 - rho, -rho / vartheta_j], [vartheta_j, 1]], dtype=complex)
