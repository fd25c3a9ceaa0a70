"""Partition-function ratios reconstructed from probe coherence alone.

The partition function of a finite lattice is an entire function of the
field, so Cauchy's theorem recovers ``Z(beta, lambda')`` from its values on
a contour.  For a bath with ``Z(lambda) = Z(-lambda)`` the contour is the
pair of vertical lines at ``+-lambda``; since the coherence is periodic in
``u`` the line integral folds onto one period:

    Z(lambda')/Z(lambda) = int_0^U du/(2 pi) L(u) n sinh(n w) / (cosh(n w) - cosh(n w'))

with ``w = beta*lambda + i u``, ``w' = beta*lambda'`` and ``U = 2 pi / n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coherence import (
    DEFAULT_POINTS,
    TWO_PI,
    CoherenceSeries,
    coherence_series,
    coherence_values,
    fold_order,
    validate_points,
)
from .errors import ContourError, ReconstructionError, ValidationError
from .ising import LatticeSpec, ModelParams, log_partition_transfer
from .logcomplex import LogComplex

RULE = "simpson-3/8"


@dataclass(frozen=True)
class QuadratureConfig:
    points: int = DEFAULT_POINTS
    period: float = TWO_PI
    rule: str = RULE

    def __post_init__(self):
        validate_points(self.points)
        if not (self.period > 0 and math.isfinite(self.period)):
            raise ValidationError(f"period must be positive, got {self.period!r}")
        if self.rule != RULE:
            raise ValidationError(f"only the {RULE} rule is supported, got {self.rule!r}")


@dataclass(frozen=True)
class ReconstructionResult:
    """Reconstructed ``Z(beta, target_field) / Z(beta, source_field)``.

    ``ratio`` holds the real part of the quadrature result; ``integral`` keeps
    the raw complex value and ``residual_imag = |Im|/|integral|``.
    """

    ratio: LogComplex
    target_field: float
    source_field: float
    residual_imag: float
    quadrature: QuadratureConfig
    integral: complex

    @property
    def positive(self) -> bool:
        return not self.ratio.is_zero and self.ratio.phase == 0.0


def simpson38_weights(count: int) -> np.ndarray:
    """Composite Simpson-3/8 weights (without the ``3h/8`` factor)."""
    validate_points(count)
    weights = np.full(count, 3.0)
    weights[0] = weights[-1] = 1.0
    weights[3:-1:3] = 2.0
    return weights


def simpson38(values, spacing: float) -> complex | float:
    """Composite Simpson-3/8 rule on a closed uniform grid of ``3k+1`` nodes.

    Products are summed with :func:`math.fsum`, so the result does not depend
    on summation order.
    """
    values = np.asarray(values)
    weighted = simpson38_weights(len(values)) * values
    scale = 3.0 * spacing / 8.0
    if np.iscomplexobj(weighted):
        return complex(math.fsum(weighted.real), math.fsum(weighted.imag)) * scale
    return math.fsum(weighted) * scale


def periodic_kernel(w, w_target, fold: int = 1):
    """``n sinh(n w) / (cosh(n w) - cosh(n w'))``: the Cauchy kernel folded onto ``2 pi / n``.

    The denominator is evaluated as ``2 sinh(n(w+w')/2) sinh(n(w-w')/2)``;
    the direct difference of cosines cancels catastrophically near ``w = w'``.
    """
    denominator = 2.0 * np.sinh(0.5 * fold * (w + w_target)) * np.sinh(0.5 * fold * (w - w_target))
    return fold * np.sinh(fold * w) / denominator


def critical_kernel(w, fold: int = 1):
    """:func:`periodic_kernel` at ``w' = 0``, written as ``n coth(n w / 2)``."""
    return fold / np.tanh(0.5 * fold * w)


def line_kernel(w, w_target):
    return 1.0 / (w - w_target)


def symmetric_line_kernel(w, w_target):
    """Combined kernel of the line pair at ``+-lambda`` for an even ``Z``."""
    return 2.0 * w / (w * w - w_target * w_target)


def _trapezoid_alias_bound(panels: int, area: int, decay: float) -> float:
    if panels <= area:
        return math.inf
    return 2.0 * math.exp(-(panels - area) * decay) / -math.expm1(-panels * decay)


def quadrature_error_bound(
    area: int, beta: float, h: float, target: float, points: int, period: float = TWO_PI
) -> float:
    """Upper bound on the absolute error of the reconstructed ratio.

    ``L(u)`` is a trigonometric polynomial with non-negative coefficients
    summing to one and frequencies ``|m| <= area``; the kernel coefficients
    decay as ``2 exp(-k beta (h - |target|))``.  On a periodic integrand
    Simpson-3/8 equals ``(9/8) T(du) - (1/8) T(3 du)`` (trapezoid sums), and a
    trapezoid sum with ``R`` panels per ``2 pi`` only aliases frequencies
    ``>= R - area``.  Rounding is not included.
    """
    validate_points(points)
    fold = fold_order(period)
    decay = beta * (h - abs(target))
    if not decay > 0:
        raise ContourError(f"|target| = {abs(target)!r} must be < h = {h!r}")
    fine = fold * (points - 1)
    return 1.125 * _trapezoid_alias_bound(fine, area, decay) + 0.125 * _trapezoid_alias_bound(
        fine // 3, area, decay
    )


def _result(integral: complex, target: float, source: float, quad: QuadratureConfig):
    magnitude = abs(integral)
    residual = abs(integral.imag) / magnitude if magnitude > 0 else math.inf
    return ReconstructionResult(
        LogComplex.from_complex(integral.real), target, source, residual, quad, integral
    )


def _check_series(series: CoherenceSeries, target: float) -> int:
    fold = fold_order(series.period)
    validate_points(series.points)
    if not abs(target) < series.field:
        raise ContourError(
            f"target field {target!r} must satisfy |target| < {series.field!r}, "
            "the field at which the coherence was measured"
        )
    return fold


def reconstruct_ratio_periodic(series: CoherenceSeries, target: float) -> ReconstructionResult:
    """``Z(beta, target) / Z(beta, h)`` from one period of coherence data."""
    target = float(target)
    fold = _check_series(series, target)
    w = series.beta * series.field + 1j * series.grid
    integrand = series.values * periodic_kernel(w, series.beta * target, fold)
    integral = simpson38(integrand, series.spacing) / TWO_PI
    return _result(integral, target, series.field, QuadratureConfig(series.points, series.period))


def reconstruct_critical_ratio(series: CoherenceSeries) -> ReconstructionResult:
    """``Z(beta, 0) / Z(beta, h)`` using the ``coth`` form of the kernel."""
    fold = _check_series(series, 0.0)
    w = series.beta * series.field + 1j * series.grid
    integrand = series.values * critical_kernel(w, fold)
    integral = simpson38(integrand, series.spacing) / TWO_PI
    return _result(integral, 0.0, series.field, QuadratureConfig(series.points, series.period))


def default_line_points(beta: float, gap: float, u_max: float) -> int:
    """Grid size resolving both ``pi/150`` and the kernel peak width ``beta*gap``."""
    spacing = min(math.pi / 150.0, beta * gap / 6.0)
    intervals = math.ceil(2.0 * u_max / spacing)
    return 3 * math.ceil(intervals / 3) + 1


def reconstruct_ratio_infinite_line(
    spec: LatticeSpec,
    beta: float,
    lambda1: float,
    lambda2: float,
    target: float,
    u_max: float,
    points: int | None = None,
    coupling: float = 1.0,
) -> ReconstructionResult:
    """``Z(beta, target) / Z(beta, lambda2)`` from the two-line Cauchy formula.

    Coherence is measured at both ``lambda1`` and ``lambda2`` on
    ``u in [-u_max, u_max]``; the normalisation ``Z(lambda1)/Z(lambda2)``
    comes from the exact transfer matrix.  The truncated tails leave an
    ``O(1/u_max)`` error, so this is a cross-check, not a production path.
    """
    lambda1, lambda2, target = float(lambda1), float(lambda2), float(target)
    if not lambda1 < target < lambda2:
        raise ContourError(
            f"target {target!r} must lie strictly between lambda1={lambda1!r} and lambda2={lambda2!r}"
        )
    if not (u_max > 0 and math.isfinite(u_max)):
        raise ValidationError(f"u_max must be positive and finite, got {u_max!r}")
    params = ModelParams(beta, 0.0, coupling)
    if points is None:
        points = default_line_points(params.beta, min(target - lambda1, lambda2 - target), u_max)
    validate_points(points)

    u = np.linspace(-u_max, u_max, points)
    spacing = 2.0 * u_max / (points - 1)
    w_target = params.beta * target
    upper = coherence_values(spec, params.beta, lambda2, u, coupling)
    lower = coherence_values(spec, params.beta, lambda1, u, coupling)
    upper_integral = simpson38(upper * line_kernel(params.beta * lambda2 + 1j * u, w_target), spacing)
    lower_integral = simpson38(lower * line_kernel(params.beta * lambda1 + 1j * u, w_target), spacing)

    log_upper = log_partition_transfer(spec, params.with_field(lambda2)).log_mag
    log_lower = log_partition_transfer(spec, params.with_field(lambda1)).log_mag
    integral = (upper_integral - math.exp(log_lower - log_upper) * lower_integral) / TWO_PI
    return _result(integral, target, lambda2, QuadratureConfig(points, 2.0 * u_max))


# --------------------------------------------------------------------------
# free energy


@dataclass(frozen=True)
class FreeEnergyEstimate:
    """Per-site free energy at ``target_field`` recovered from a coherence series.

    ``f_per_site = -(ln ratio + ln Z(beta, h)) / area`` in units of ``k_B T``;
    ``ln Z(beta, h)`` at the measured real field is the exact transfer-matrix
    value.  ``f_per_site`` is NaN when the reconstructed ratio is not positive.
    """

    spec: LatticeSpec
    beta: float
    field: float
    result: ReconstructionResult
    log_norm: float
    f_per_site: float

    def to_report(self) -> dict:
        quad = self.result.quadrature
        return {
            "N": self.spec.rows,
            "M": self.spec.cols,
            "beta": self.beta,
            "h": self.field,
            "lambda_prime": self.result.target_field,
            "points": quad.points,
            "period": quad.period,
            "ratio_log_mag": self.result.ratio.log_mag if not self.result.ratio.is_zero else None,
            "ratio_phase": self.result.ratio.phase,
            "residual_imag": self.result.residual_imag,
            "f_per_site": self.f_per_site if math.isfinite(self.f_per_site) else None,
        }


def estimate_free_energy(series: CoherenceSeries, target: float = 0.0) -> FreeEnergyEstimate:
    """Reconstruct ``f(target)`` from ``series`` plus the exact ``ln Z(beta, h)``."""
    if target == 0:
        result = reconstruct_critical_ratio(series)
    else:
        result = reconstruct_ratio_periodic(series, target)
    params = ModelParams(series.beta, series.field, series.coupling)
    log_norm = log_partition_transfer(series.spec, params).log_mag
    if result.positive:
        f = -(result.ratio.log_mag + log_norm) / series.spec.area()
    else:
        f = math.nan
    return FreeEnergyEstimate(series.spec, series.beta, series.field, result, log_norm, f)


def require_positive(estimate: FreeEnergyEstimate) -> FreeEnergyEstimate:
    if not estimate.result.positive:
        raise ReconstructionError(
            f"reconstructed ratio for {estimate.spec} is {estimate.result.integral!r}, not positive; "
            f"the {estimate.result.quadrature.points}-point grid is too coarse for this lattice "
            "(see verify_series aliasing margin)"
        )
    return estimate


def free_energy_at_zero_field(
    spec: LatticeSpec,
    beta: float,
    h: float,
    quad: QuadratureConfig = QuadratureConfig(),
    coupling: float = 1.0,
) -> float:
    """Per-site zero-field free energy (``k_B T`` units) reconstructed from coherence at ``h``."""
    series = coherence_series(spec, beta, h, quad.points, quad.period, coupling)
    return require_positive(estimate_free_energy(series)).f_per_site
