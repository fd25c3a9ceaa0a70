import cmath
import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from isingholo import (
    BETA_C,
    CoherenceSeries,
    LatticeSpec,
    ModelParams,
    ValidationError,
    brute_force_log_partition,
    coherence_at,
    coherence_series,
    verify_series,
)
from isingholo.coherence import coherence_values, fold_order, validate_points


def test_unity_at_origin():
    assert coherence_at(LatticeSpec(3, 3), 0.4, 0.3, 0.0) == 1 + 0j
    series = coherence_series(LatticeSpec(4, 5), 0.4, 0.3, 97)
    assert series.values[0] == 1 + 0j


@pytest.mark.parametrize("beta,h", [(0.4, 0.3), (BETA_C, 0.1), (1.1, -0.8)])
def test_single_site_closed_form(beta, h):
    u = np.linspace(-7, 7, 41)
    got = coherence_values(LatticeSpec(1, 1), beta, h, u)
    expected = np.array([cmath.cosh(beta * h + 1j * x) / math.cosh(beta * h) for x in u])
    assert np.abs(got - expected).max() < 1e-13


def test_matches_brute_force_ratio():
    spec, beta, h = LatticeSpec(3, 4), 0.5, 0.2
    norm = brute_force_log_partition(spec, ModelParams(beta, h))
    for u in (0.3, 1.7, 4.0):
        z = brute_force_log_partition(spec, ModelParams(beta, h + 1j * u / beta))
        assert coherence_at(spec, beta, h, u) == pytest.approx((z / norm).value(), abs=1e-13)


def test_series_grid():
    series = coherence_series(LatticeSpec(2, 3), 0.4, 0.3, 10, period=math.pi)
    assert series.points == 10
    assert series.grid[0] == 0 and series.grid[-1] == math.pi
    assert series.spacing == pytest.approx(math.pi / 9)


@pytest.mark.parametrize("spec", [LatticeSpec(2, 2), LatticeSpec(3, 3), LatticeSpec(6, 50)])
def test_well_formed_series(spec):
    report = verify_series(coherence_series(spec, BETA_C, 0.1))
    assert report.ok, report
    assert report.normalization_defect == 0
    assert report.magnitude_excess <= 1e-12
    assert report.conjugate_defect <= 1e-10
    assert report.periodicity_defect <= 1e-10


def test_pi_period_on_odd_area_is_flagged():
    spec = LatticeSpec(3, 3)
    series = coherence_series(spec, 0.4, 0.3, 97, period=math.pi)
    report = verify_series(series)
    # L(pi) = -L(0) exactly when the area is odd
    assert "periodicity" in report.flags
    assert report.periodicity_defect == pytest.approx(2.0, abs=1e-12)


def test_pi_period_on_even_area_passes():
    report = verify_series(coherence_series(LatticeSpec(2, 3), 0.4, 0.3, 97, period=math.pi))
    assert report.ok


def test_tampered_normalization():
    series = coherence_series(LatticeSpec(2, 2), 0.4, 0.3, 97)
    values = series.values.copy()
    values[0] = 0.5
    report = verify_series(replace(series, values=values))
    assert report.normalization_defect == pytest.approx(0.5)
    assert "normalization" in report.flags


def test_aliasing_warning():
    report = verify_series(coherence_series(LatticeSpec(4, 4), 0.4, 0.3, 16))
    assert report.aliasing_margin == 5 * 1 - 16
    assert report.warnings == ("aliasing",) and report.ok


@pytest.mark.parametrize("points", [0, 3, 5, 6, 393, 4.0, True])
def test_invalid_points(points):
    with pytest.raises(ValidationError):
        validate_points(points)
    with pytest.raises(ValidationError):
        coherence_series(LatticeSpec(2, 2), 0.4, 0.3, points)


def test_fold_order():
    assert fold_order(2 * math.pi) == 1
    assert fold_order(math.pi) == 2
    assert fold_order(math.pi / 2) == 4
    for bad in (1.0, 3 * math.pi, 0.0, -math.pi):
        with pytest.raises(ValidationError):
            fold_order(bad)


def test_complex_bath_field_rejected():
    with pytest.raises(ValidationError):
        coherence_series(LatticeSpec(2, 2), 0.4, 0.3 + 0.1j)


@settings(max_examples=40, deadline=None)
@given(
    st.tuples(st.integers(1, 4), st.integers(1, 4)).map(lambda t: LatticeSpec(*t)),
    st.floats(0.05, 1.2),
    st.floats(-1.0, 1.0),
)
def test_series_invariants(spec, beta, h):
    series = coherence_series(spec, beta, h, 31)
    report = verify_series(series)
    assert report.ok, report
    assert np.abs(series.values).max() <= 1 + 1e-12
