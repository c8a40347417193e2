"""
Phase Module
Phase function θ(z) = zξ + 2αz² + 4βz³, its stationary points and the
sign chart of Re(2iθ) that decides the contour deformation.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegeneratePhaseError, PhaseIdentityError

logger = logging.getLogger(__name__)

ROOT_TOLERANCE = 1e-10


def theta(z, xi: float, alpha: float, beta: float):
    """θ(z) = zξ + 2αz² + 4βz³ (works on scalars and arrays)."""
    return z * xi + 2 * alpha * z ** 2 + 4 * beta * z ** 3


def theta_prime(z, xi: float, alpha: float, beta: float):
    return xi + 4 * alpha * z + 12 * beta * z ** 2


@dataclass(frozen=True)
class PhaseGeometry:
    """Stationary points z1 < z2 of θ for one ray ξ = x/t."""

    alpha: float
    beta: float
    xi: float
    z1: float
    z2: float
    discriminant: float
    orientation: int = 1

    def point(self, j: int) -> float:
        if j not in (1, 2):
            raise ValueError(f"Stationary point index must be 1 or 2, got {j}")
        return self.z1 if j == 1 else self.z2

    def curvature(self, j: int) -> float:
        """α + 6βz_j, i.e. θ''(z_j)/4."""
        return self.alpha + 6 * self.beta * self.point(j)

    def theta(self, z):
        return theta(z, self.xi, self.alpha, self.beta)


def stationary_points(xi: float, alpha: float, beta: float) -> PhaseGeometry:
    """
    Solve 12βz² + 4αz + ξ = 0 for the two real stationary points.

    Args:
        xi: Ray velocity x/t
        alpha: Second-order dispersion coefficient
        beta: Third-order dispersion coefficient, nonzero

    Returns:
        PhaseGeometry with z1 < z2 and orientation = sign(β)
    """
    if beta == 0:
        raise DegeneratePhaseError("beta must be nonzero for two stationary points")

    discriminant = alpha ** 2 - 3 * beta * xi
    if discriminant <= 0:
        raise DegeneratePhaseError(
            f"No separated stationary points: alpha^2 - 3*beta*xi = {discriminant:.6g} <= 0"
        )

    # larger-magnitude root first, the other through Vieta
    a, b, c = 12 * beta, 4 * alpha, xi
    root = 4 * math.sqrt(discriminant)
    q = -0.5 * (b + math.copysign(root, b if b != 0 else 1.0))
    first = q / a
    second = c / q if q != 0 else -first
    z1, z2 = sorted((first, second))

    orientation = 1 if beta > 0 else -1
    if orientation < 0:
        logger.debug(f"beta < 0: stationary points reordered for xi={xi}")

    geom = PhaseGeometry(alpha, beta, xi, z1, z2, discriminant, orientation)
    _check_roots(geom)
    return geom


def _check_roots(geom: PhaseGeometry):
    scale = 1.0 + abs(geom.xi) + 4 * abs(geom.alpha) * max(abs(geom.z1), abs(geom.z2))
    for z in (geom.z1, geom.z2):
        residual = abs(theta_prime(z, geom.xi, geom.alpha, geom.beta))
        if residual > ROOT_TOLERANCE * scale:
            logger.warning(f"Stationary point residual {residual:.3e} at z={z}")


def sign_re_itheta(z: complex, geom: PhaseGeometry) -> int:
    """Sign (+1, -1, 0) of Re(2iθ(z)); zero on the real axis."""
    z = complex(z)
    value = (2j * geom.theta(z)).real
    scale = 1.0 + abs(z) * (abs(geom.xi) + 2 * abs(geom.alpha) * abs(z) + 4 * abs(geom.beta) * abs(z) ** 2)
    if z.imag == 0 or abs(value) <= 1e-14 * scale:
        return 0
    return int(np.sign(value))


def stationary_phase_value(geom: PhaseGeometry, t: float, j: int) -> float:
    """
    Return 2tθ(z_j), checking it equals −4αt z_j² − 16βt z_j³.

    Raises PhaseIdentityError when the geometry is inconsistent.
    """
    z = geom.point(j)
    value = 2 * t * float(geom.theta(z))
    closed_form = -4 * geom.alpha * t * z ** 2 - 16 * geom.beta * t * z ** 3
    if abs(value - closed_form) > 1e-8 * (1 + abs(value)):
        raise PhaseIdentityError(
            f"Stationary phase identity violated at z{j}={z}: {value} vs {closed_form}"
        )
    return value
