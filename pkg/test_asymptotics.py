import cmath
import math

import numpy as np
import pytest
from scipy.integrate import trapezoid

from src.asymptotics import (
    beta12,
    delta_at,
    delta_boundary,
    delta_expansion_coefficient,
    delta_plus_minus,
    error_order,
    evaluate_ray,
    leading_exponent,
    leading_order_q,
    local_power,
    model_constants,
    model_jump,
    model_matrix,
    nu_profile,
    vartheta,
)
from src.errors import BranchJumpError, DegeneratePhaseError, ProximityError, SubcriticalityError
from src.phase import stationary_points
from src.scattering import (
    GridSpec1D,
    ScatteringData,
    build_potential,
    closed_form_field,
    reflection_coefficients,
    scattering_matrix,
)

ZGRID = np.linspace(-3.0, 3.0, 301)
RAY = stationary_points(-3.0, 0.0, 1.0)


def synthetic(r, rtilde, alpha=0.0, beta=1.0):
    return ScatteringData.synthetic(ZGRID, r, rtilde, alpha=alpha, beta=beta)


def constant_nu(c):
    """Synthetic data with ν ≡ c."""
    return synthetic(1.0, 1 - cmath.exp(-2 * math.pi * c))


@pytest.fixture(scope="module")
def gaussian_sd():
    grid = GridSpec1D.symmetric(12.0, 512)
    p = build_potential(closed_form_field("gaussian", grid, amplitude=0.3), 1)
    return reflection_coefficients(scattering_matrix(p, np.linspace(-3.0, 3.0, 121), alpha=0.0, beta=1.0))


@pytest.fixture(scope="module")
def varying_sd():
    r = 0.2 * np.exp(-ZGRID ** 2) * np.exp(0.4j * ZGRID)
    rtilde = 0.15 * np.exp(-ZGRID ** 2) * np.exp(-0.3j * ZGRID)
    return synthetic(r, rtilde)


def test_zero_reflection_gives_zero_nu():
    profile = nu_profile(synthetic(0.0, 0.0), RAY)
    assert profile.is_zero
    assert delta_at(2.0 + 1j, profile) == 1
    assert delta_boundary(profile, 1) == 1
    assert delta_expansion_coefficient(profile) == 0


def test_constant_jump_e():
    profile = nu_profile(synthetic(1.0, 1 - math.e), RAY)
    assert np.allclose(profile.nu, -1 / (2 * math.pi), rtol=0, atol=1e-14)
    assert profile.nu1 == pytest.approx(-1 / (2 * math.pi))


def test_subcriticality_violation():
    with pytest.raises(SubcriticalityError):
        nu_profile(synthetic(1.0, 2.0), RAY)


def test_branch_jump_detected():
    rtilde = 2.0 - 0.1j * ZGRID
    with pytest.raises(BranchJumpError):
        nu_profile(synthetic(1.0, rtilde), RAY)


def test_profile_needs_points_inside_grid():
    sd = ScatteringData.synthetic(np.linspace(-0.2, 0.2, 11), 0.1, 0.1, beta=1.0)
    with pytest.raises(ValueError):
        nu_profile(sd, RAY)


@pytest.mark.parametrize("z", [1.5, 0.2 + 0.7j, -2.0 - 0.4j])
def test_delta_constant_nu_closed_form(z):
    c = 0.1
    profile = nu_profile(constant_nu(c), RAY)
    expected = cmath.exp(1j * c * cmath.log((z - RAY.z2) / (z - RAY.z1)))
    assert abs(delta_at(z, profile) - expected) <= 1e-10


def test_delta_proximity():
    profile = nu_profile(constant_nu(0.1), RAY)
    with pytest.raises(ProximityError):
        delta_at(0.0 + 1e-5j, profile)
    with pytest.raises(ProximityError):
        delta_at(0.1, profile, tube=0.0)


def test_plemelj_jump_on_gaussian_data(gaussian_sd):
    profile = nu_profile(gaussian_sd, RAY)
    assert profile.max_im_nu < 0.5
    epsilon = 1e-6
    for s in np.linspace(RAY.z1, RAY.z2, 22)[1:-1]:
        ratio = delta_at(s + 1j * epsilon, profile, tube=0.0) / delta_at(s - 1j * epsilon, profile, tube=0.0)
        r, rt = gaussian_sd.interpolate_reflection([s])
        assert abs(ratio - (1 - r[0] * rt[0])) <= 1e-4


def test_boundary_values_match_off_axis_limits(varying_sd):
    profile = nu_profile(varying_sd, RAY)
    for s in (-0.3, 0.05, 0.41):
        plus, minus = delta_plus_minus(s, profile)
        r, rt = varying_sd.interpolate_reflection([s])
        assert abs(plus / minus - (1 - r[0] * rt[0])) <= 1e-10
        assert abs(plus - delta_at(s + 1e-7j, profile, tube=0.0)) <= 1e-5
        assert abs(minus - delta_at(s - 1e-7j, profile, tube=0.0)) <= 1e-5
    with pytest.raises(ValueError):
        delta_plus_minus(RAY.z2, profile)


def test_expansion_coefficient_at_infinity(varying_sd):
    profile = nu_profile(varying_sd, RAY)
    c = delta_expansion_coefficient(profile)
    log_jump = -2 * math.pi * profile.nu
    oracle = 1j / (2 * math.pi) * trapezoid(log_jump, profile.nodes)
    assert abs(c - oracle) <= 1e-6
    z = 1e4j
    assert abs(z * (delta_at(z, profile) - 1) - c) <= 1e-6


def test_delta_boundary_constant_nu():
    c = 0.1
    ray = stationary_points(-12.0, 0.0, 1.0)
    profile = nu_profile(constant_nu(c), ray)
    assert ray.z2 - ray.z1 == pytest.approx(2.0)
    assert abs(delta_boundary(profile, 1) - 2 ** (1j * c)) <= 1e-8
    assert abs(delta_boundary(profile, 2) - 2 ** (-1j * c)) <= 1e-8


@pytest.mark.parametrize("j", [1, 2])
def test_delta_boundary_is_limit_of_delta(varying_sd, j):
    profile = nu_profile(varying_sd, RAY)
    target = delta_boundary(profile, j)
    zj = RAY.point(j)
    direction = cmath.exp(1j * math.pi / 4) if j == 1 else cmath.exp(3j * math.pi / 4)
    errors = []
    for distance in (1e-2, 1e-3, 1e-4):
        z = zj + distance * direction
        errors.append(abs(delta_at(z, profile, tube=0.0) / local_power(z, profile, j) - target))
    assert errors[0] > errors[1] > errors[2]
    assert errors[-1] < 1e-3


def test_local_power_index():
    profile = nu_profile(constant_nu(0.1), RAY)
    with pytest.raises(ValueError):
        local_power(1.0, profile, 3)


def test_model_constants_vanish_without_reflection():
    assert model_constants(0, 0) == (0, 0)


@pytest.mark.parametrize("orientation", [1, -1])
def test_beta_product_identity(orientation):
    nu = 0.1 - 0.05j
    b12, b21 = model_constants(nu, cmath.exp(0.3j), 10.0, orientation)
    assert abs(b12 * b21 - nu) <= 1e-8 * abs(nu)


@pytest.mark.parametrize("orientation", [1, -1])
def test_beta_time_scaling(orientation):
    nu = 0.1 - 0.05j
    vt = cmath.exp(0.3j)
    ratio = abs(model_constants(nu, vt, 20.0, orientation)[0]) / abs(model_constants(nu, vt, 10.0, orientation)[0])
    assert ratio == pytest.approx(2 ** (orientation * nu.imag), rel=1e-12)


def test_vartheta_modulus_and_phase():
    sd = synthetic(0.2, 0.15)
    profile = nu_profile(sd, RAY)
    t = 10.0
    value = vartheta(profile, sd, RAY, t, 2)
    assert abs(value) == pytest.approx(0.2, rel=1e-10)

    later = vartheta(profile, sd, RAY, 2 * t, 2)
    expected = cmath.exp(1j * (profile.nu2.real * math.log(2) + 2 * t * RAY.theta(RAY.z2)))
    assert abs(later / value - expected) <= 1e-10


def test_vartheta_zero_reflection():
    sd = synthetic(0.0, 0.15)
    profile = nu_profile(sd, RAY)
    assert vartheta(profile, sd, RAY, 10.0, 1) == 0
    assert beta12(profile, sd, RAY, 10.0, 1) == (0, 0)


def test_beta12_product_on_data(varying_sd):
    profile = nu_profile(varying_sd, RAY)
    for j in (1, 2):
        b12, b21 = beta12(profile, varying_sd, RAY, 10.0, j)
        nu = profile.endpoint(j)[1]
        assert abs(b12 * b21 - nu) <= 1e-8 * abs(nu)


def test_leading_order_vanishes_without_reflection():
    sd = synthetic(0.0, 0.0)
    evaluation = leading_order_q(sd, nu_profile(sd, RAY), RAY, -30.0, 10.0)
    assert evaluation.q_leading == 0
    assert evaluation.xi_order == -0.75


def test_laurent_and_closed_form_agree_on_gaussian_data(gaussian_sd):
    profile = nu_profile(gaussian_sd, RAY)
    evaluation = leading_order_q(gaussian_sd, profile, RAY, -30.0, 10.0)
    assert evaluation.q_leading == evaluation.contrib1 + evaluation.contrib2
    for j, contrib in ((1, evaluation.contrib1), (2, evaluation.contrib2)):
        closed_form = evaluation.diagnostics[f"closed_form_contrib{j}"]
        assert abs(contrib - closed_form) <= 1e-10 * max(1.0, abs(contrib))
        b12 = evaluation.diagnostics[f"beta12_{j}"]
        scale = 8 * abs(RAY.curvature(j)) * 10.0
        assert contrib == pytest.approx(2 * b12 / math.sqrt(scale), rel=1e-12)


@pytest.mark.parametrize("strict", [True, False])
def test_contributions_scale_like_inverse_sqrt_t(strict):
    sd = synthetic(0.2, 0.15)
    profile = nu_profile(sd, RAY)
    scaled = []
    for t in (10.0, 20.0, 40.0):
        evaluation = leading_order_q(sd, profile, RAY, RAY.xi * t, t, strict_paper_constants=strict)
        scaled.append((abs(evaluation.contrib1) * math.sqrt(t), abs(evaluation.contrib2) * math.sqrt(t)))
    for first, second in scaled[1:]:
        assert first == pytest.approx(scaled[0][0], rel=1e-8)
        assert second == pytest.approx(scaled[0][1], rel=1e-8)


def test_error_order_branches():
    assert error_order(0.1, 0.2) == -0.75
    assert error_order(0.1 - 0.1j, 0.1 + 0.2j) == pytest.approx(-0.75 + 0.1)

    jump = 0.9 * cmath.exp(-0.6j)
    sd = synthetic(1.0, 1 - jump)
    evaluation = leading_order_q(sd, nu_profile(sd, RAY), RAY, -30.0, 10.0)
    im_nu = 0.6 / (2 * math.pi)
    assert evaluation.xi_order == pytest.approx(-0.75 + im_nu / 2)
    assert leading_exponent(evaluation) == pytest.approx(-0.5 + im_nu)


def test_leading_order_rejects_wrong_ray():
    sd = synthetic(0.2, 0.15)
    with pytest.raises(ValueError):
        leading_order_q(sd, nu_profile(sd, RAY), RAY, -20.0, 10.0)


def test_evaluate_ray_matches_pointwise(varying_sd):
    times = [10.0, 15.0, 20.0]
    ray = evaluate_ray(varying_sd, -3.0, times, max_workers=2)
    profile = nu_profile(varying_sd, RAY)
    assert [e.t for e in ray] == times
    for evaluation in ray:
        direct = leading_order_q(varying_sd, profile, RAY, -3.0 * evaluation.t, evaluation.t)
        assert evaluation.q_leading == pytest.approx(direct.q_leading, rel=1e-12)


def test_evaluate_ray_rejects_negative_beta():
    sd = synthetic(0.2, 0.15, beta=-1.0)
    with pytest.raises(DegeneratePhaseError):
        evaluate_ray(sd, 3.0, [10.0])


def test_model_matrix_without_reflection():
    for k in (-2.0, 1.0, 2.5):
        upper = model_matrix(k, 0.0, 0.0, "upper")
        lower = model_matrix(k, 0.0, 0.0, "lower")
        assert upper[0, 1] == 0 and upper[1, 0] == 0
        assert np.allclose(upper, lower, atol=1e-10)
    assert np.allclose(model_jump(0.0, 0.0), np.eye(2))


@pytest.mark.parametrize("k", [1 + 0.5j, 1 - 0.5j])
def test_model_matrix_unit_determinant(k):
    half = "upper" if k.imag > 0 else "lower"
    m = model_matrix(k, 0.1 - 0.02j, 0.2, half)
    assert abs(np.linalg.det(m) - 1) <= 1e-6


@pytest.mark.parametrize("nu, vt", [
    (-math.log(1 - 0.2 * 0.15) / (2 * math.pi), 0.2),
    (0.1 - 0.02j, 0.3 * cmath.exp(0.5j)),
])
def test_model_matrix_jump(nu, vt):
    expected = model_jump(nu, vt)
    for k in (-2.0, -1.0, 1.0, 2.0):
        upper = model_matrix(k, nu, vt, "upper")
        lower = model_matrix(k, nu, vt, "lower")
        assert np.max(np.abs(np.linalg.solve(lower, upper) - expected)) <= 1e-5


def test_model_matrix_half_checked():
    with pytest.raises(ValueError):
        model_matrix(1.0, 0.1, 0.2, "left")
