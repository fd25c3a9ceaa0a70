import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from isingholo import (
    BETA_C,
    ContourError,
    LatticeSpec,
    ModelParams,
    QuadratureConfig,
    ReconstructionError,
    ValidationError,
    brute_force_log_partition,
    coherence_series,
    free_energy_at_zero_field,
    log_partition_transfer,
    quadrature_error_bound,
    reconstruct_critical_ratio,
    reconstruct_ratio_infinite_line,
    reconstruct_ratio_periodic,
    simpson38,
)
from isingholo.coherence import coherence_values
from isingholo.holography import (
    critical_kernel,
    default_line_points,
    estimate_free_energy,
    line_kernel,
    periodic_kernel,
    require_positive,
    simpson38_weights,
    symmetric_line_kernel,
)


def exact_ratio(spec, beta, target, h):
    top = brute_force_log_partition(spec, ModelParams(beta, target)).log_mag
    bottom = brute_force_log_partition(spec, ModelParams(beta, h)).log_mag
    return math.exp(top - bottom)


# --- Simpson-3/8 -----------------------------------------------------------------


def test_simpson_constant():
    assert simpson38(np.ones(4), 2 * math.pi / 3) == pytest.approx(2 * math.pi, rel=1e-15)


def test_simpson_cubic_exact():
    u = np.linspace(0.0, 1.0, 4)
    # 1/3 is not representable, so only the last bit may differ
    assert simpson38(u**3, 1.0 / 3.0) == pytest.approx(0.25, abs=1e-15)
    assert simpson38(np.arange(4.0) ** 3, 1.0) == 81 / 4


def test_simpson_oscillation_cancels():
    u = np.linspace(0.0, 2 * math.pi, 394)
    assert abs(simpson38(np.exp(1j * u), u[1])) <= 1e-10


def test_simpson_weights_pattern():
    assert simpson38_weights(10).tolist() == [1, 3, 3, 2, 3, 3, 2, 3, 3, 1]
    with pytest.raises(ValidationError):
        simpson38_weights(5)


@settings(max_examples=100)
@given(
    st.lists(st.floats(-10, 10), min_size=4, max_size=4),
    st.floats(-3, 3),
    st.floats(0.1, 4),
    st.sampled_from([4, 7, 31, 394]),
)
def test_simpson_exact_on_cubics(coeffs, a, length, points):
    a0, a1, a2, a3 = coeffs
    b = a + length
    u = np.linspace(a, b, points)
    values = a0 + a1 * u + a2 * u**2 + a3 * u**3
    exact = a0 * length + a1 * (b**2 - a**2) / 2 + a2 * (b**3 - a**3) / 3 + a3 * (b**4 - a**4) / 4
    scale = max(1.0, sum(abs(c) for c in coeffs) * max(abs(a), abs(b), 1.0) ** 4 * length)
    assert abs(simpson38(values, length / (points - 1)) - exact) <= 1e-13 * scale


def test_simpson_is_order_independent():
    rng = np.random.default_rng(7)
    values = rng.normal(size=394) * 10.0 ** rng.integers(-8, 8, size=394)
    assert simpson38(values, 0.1) == simpson38(values.copy(), 0.1)


# --- kernels ---------------------------------------------------------------------


def test_kernel_identity_dense_grid():
    a = np.linspace(1e-3, 6.0, 400)[:, None]
    u = np.linspace(0.0, 2 * math.pi, 400)[None, :]
    w = a + 1j * u
    for fold in (1, 2, 4):
        folded = periodic_kernel(w, 0.0, fold)
        coth = critical_kernel(w, fold)
        assert (np.abs(folded - coth) / np.abs(coth)).max() <= 1e-14


def test_kernel_identity_real_axis():
    w = np.geomspace(1e-4, 30.0, 5000)
    rel = np.abs(periodic_kernel(w, 0.0) - 1.0 / np.tanh(w / 2)) * np.tanh(w / 2)
    assert rel.max() <= 1e-14


def test_symmetric_line_kernel_identity():
    w = np.linspace(0.2, 3.0, 50)[:, None] + 1j * np.linspace(-20, 20, 81)[None, :]
    for wt in (0.0, 0.05, -0.1):
        both = line_kernel(w, wt) + line_kernel(w, -wt)
        assert np.abs(both - symmetric_line_kernel(w, wt)).max() <= 1e-12 * np.abs(both).max()


# --- reconstruction examples --------------------------------------------------------


@pytest.mark.parametrize("beta,h", [(0.4, 0.3), (BETA_C, 0.1), (1.0, 0.5)])
def test_single_site_critical_ratio(beta, h):
    exact = 1 / math.cosh(beta * h)
    for points in (394, 1201):
        result = reconstruct_critical_ratio(coherence_series(LatticeSpec(1, 1), beta, h, points))
        assert abs(result.integral.real - exact) <= quadrature_error_bound(1, beta, h, 0.0, points) + 1e-13
        assert result.positive
    assert result.integral.real == pytest.approx(exact, rel=1e-8)


def test_strong_field_sanity():
    spec = LatticeSpec(2, 2)
    series = coherence_series(spec, 0.4, 2.0)
    result = reconstruct_critical_ratio(series)
    assert result.integral.real == pytest.approx(exact_ratio(spec, 0.4, 0.0, 2.0), rel=1e-12)
    assert np.abs(critical_kernel(0.8 + 1j * series.grid) - 1).max() < 2.5


def test_2x2_off_critical_target():
    spec, beta, h, target = LatticeSpec(2, 2), 0.4, 0.3, 0.1
    exact = exact_ratio(spec, beta, target, h)
    coarse = reconstruct_ratio_periodic(coherence_series(spec, beta, h, 394), target)
    bound = quadrature_error_bound(spec.area(), beta, h, target, 394)
    assert abs(coarse.integral.real - exact) <= bound
    fine = reconstruct_ratio_periodic(coherence_series(spec, beta, h, 1201), target)
    assert abs(fine.integral.real - exact) <= 1e-8 * exact


def test_folded_period_on_even_area():
    spec, beta, h = LatticeSpec(3, 4), 0.5, 0.4
    errors = {}
    for period in (2 * math.pi, math.pi):
        for target in (0.0, 0.1):
            series = coherence_series(spec, beta, h, 394, period)
            result = reconstruct_ratio_periodic(series, target) if target else reconstruct_critical_ratio(series)
            err = abs(result.integral.real - exact_ratio(spec, beta, target, h))
            assert err <= quadrature_error_bound(12, beta, h, target, 394, period) + 1e-14
            errors[period, target] = err
    # halving the period doubles the panel density at equal cost
    assert errors[math.pi, 0.0] < errors[2 * math.pi, 0.0]
    assert errors[math.pi, 0.1] < 1e-13


def test_p_refinement_is_richardson_consistent():
    spec, beta, h = LatticeSpec(3, 3), 0.4, 0.3
    exact = exact_ratio(spec, beta, 0.0, h)
    errors = [abs(reconstruct_critical_ratio(coherence_series(spec, beta, h, p)).integral.real - exact)
              for p in (97, 394, 1201)]
    assert errors[0] > errors[1] > errors[2]
    assert errors[2] < 1e-12


@settings(max_examples=25, deadline=None)
@given(
    st.tuples(st.integers(1, 4), st.integers(1, 4)).map(lambda t: LatticeSpec(*t)),
    st.floats(0.2, 0.8),
    st.floats(0.2, 0.6),
    st.floats(0.0, 0.9),
)
def test_convergence_in_p(spec, beta, h, frac):
    target = frac * h
    exact = exact_ratio(spec, beta, target, h)
    errs = {}
    for p in (97, 394, 1201):
        result = reconstruct_ratio_periodic(coherence_series(spec, beta, h, p), target)
        errs[p] = abs(result.integral.real - exact)
        assert errs[p] <= quadrature_error_bound(spec.area(), beta, h, target, p) + 1e-13
    floor = 1e-13
    if errs[394] > floor:
        assert errs[1201] < errs[394]
    if errs[97] > floor:
        assert errs[394] < errs[97]


def test_stiffness_as_field_shrinks():
    spec, beta = LatticeSpec(4, 4), 0.4
    errors = []
    for h in (0.4, 0.2, 0.1):
        result = reconstruct_critical_ratio(coherence_series(spec, beta, h, 97))
        errors.append(abs(result.integral.real - exact_ratio(spec, beta, 0.0, h)))
    assert errors[0] < errors[1] < errors[2]


@pytest.mark.parametrize("spec", [LatticeSpec(2, 2), LatticeSpec(3, 5), LatticeSpec(4, 4), LatticeSpec(6, 8)])
def test_realness(spec):
    result = reconstruct_critical_ratio(coherence_series(spec, BETA_C, 0.3))
    assert result.residual_imag <= 1e-8


def test_free_energy_matches_direct():
    for spec in (LatticeSpec(2, 3), LatticeSpec(4, 4), LatticeSpec(5, 7)):
        got = free_energy_at_zero_field(spec, BETA_C, 0.3, QuadratureConfig(1201))
        direct = -log_partition_transfer(spec, ModelParams(BETA_C)).log_mag / spec.area()
        assert got == pytest.approx(direct, abs=1e-12)


def test_report_fields():
    est = estimate_free_energy(coherence_series(LatticeSpec(3, 3), 0.4, 0.3), 0.1)
    report = est.to_report()
    assert report["N"] == 3 and report["lambda_prime"] == 0.1 and report["points"] == 394
    assert report["f_per_site"] == est.f_per_site


def test_negative_ratio_is_reported_not_hidden():
    # 12 coarse panels cannot resolve magnetisations up to 96
    est = estimate_free_energy(coherence_series(LatticeSpec(8, 12), BETA_C, 0.1, 100))
    assert not est.result.positive and math.isnan(est.f_per_site)
    assert est.to_report()["f_per_site"] is None
    with pytest.raises(ReconstructionError):
        require_positive(est)


# --- contour preconditions ------------------------------------------------------------


@pytest.mark.parametrize("target", [0.3, -0.3, 0.5])
def test_contour_violation(target):
    series = coherence_series(LatticeSpec(2, 2), 0.4, 0.3, 31)
    with pytest.raises(ContourError):
        reconstruct_ratio_periodic(series, target)
    with pytest.raises(ContourError):
        quadrature_error_bound(4, 0.4, 0.3, target, 31)


def test_zero_field_series_cannot_reconstruct():
    series = coherence_series(LatticeSpec(2, 2), 0.4, 0.0, 31)
    with pytest.raises(ContourError):
        reconstruct_critical_ratio(series)


@pytest.mark.parametrize("target", [0.3, -0.3, 0.7])
def test_infinite_line_contour_violation(target):
    with pytest.raises(ContourError):
        reconstruct_ratio_infinite_line(LatticeSpec(2, 2), 0.4, -0.3, 0.3, target, 10.0)


def test_quadrature_config_validation():
    with pytest.raises(ValidationError):
        QuadratureConfig(points=395)
    with pytest.raises(ValidationError):
        QuadratureConfig(rule="trapezoid")


# --- infinite-line cross-check ------------------------------------------------------


def test_infinite_line_converges():
    spec, beta = LatticeSpec(2, 2), 0.4
    exact = exact_ratio(spec, beta, 0.0, 0.3)
    errors = [
        abs(reconstruct_ratio_infinite_line(spec, beta, -0.3, 0.3, 0.0, k * math.pi).integral.real - exact)
        for k in (10, 40, 160)
    ]
    assert errors[0] > errors[1] > errors[2]
    # tail error is O(1/u_max)
    assert errors[2] < errors[0] / 8


def test_infinite_line_symmetric_form():
    spec, beta, lam, u_max = LatticeSpec(2, 3), 0.5, 0.4, 6 * math.pi
    points = default_line_points(beta, lam, u_max)
    result = reconstruct_ratio_infinite_line(spec, beta, -lam, lam, 0.1, u_max, points)
    u = np.linspace(-u_max, u_max, points)
    values = coherence_values(spec, beta, lam, u)
    combined = simpson38(values * symmetric_line_kernel(beta * lam + 1j * u, 0.1 * beta), u[1] - u[0])
    combined /= 2 * math.pi
    assert abs(result.integral - combined) <= 1e-12 * abs(combined)


def test_default_line_points():
    p = default_line_points(0.4, 0.3, 10 * math.pi)
    assert p % 3 == 1
    assert 20 * math.pi / (p - 1) <= math.pi / 150 + 1e-15
