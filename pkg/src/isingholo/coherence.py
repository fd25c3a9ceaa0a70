"""Probe-spin coherence for a pure-dephasing probe coupled to an Ising bath.

With the bath at real field ``h`` and ``u = eta * t``, the probe coherence is
the partition-function ratio ``L(u) = Z(beta, h + i u / beta) / Z(beta, h)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .ising import LatticeSpec, ModelParams, log_partition_many

TWO_PI = 2.0 * math.pi
DEFAULT_POINTS = 394


def fold_order(period: float) -> int:
    """Integer ``n`` with ``period == 2*pi/n``; raises for any other period."""
    if not (period > 0 and math.isfinite(period)):
        raise ValidationError(f"period must be positive and finite, got {period!r}")
    n = round(TWO_PI / period)
    if n < 1 or not math.isclose(n * period, TWO_PI, rel_tol=1e-12):
        raise ValidationError(f"period must be 2*pi/n for a positive integer n, got {period!r}")
    return n


def validate_points(points: int) -> None:
    if isinstance(points, bool) or not isinstance(points, (int, np.integer)):
        raise ValidationError(f"points must be an integer, got {points!r}")
    if points < 4 or points % 3 != 1:
        raise ValidationError(
            f"points must be >= 4 and congruent to 1 mod 3 for Simpson-3/8, got {points}"
        )


def coherence_values(
    spec: LatticeSpec, beta: float, h: float, u, coupling: float = 1.0
) -> np.ndarray:
    """Coherence ``L(u)`` for an array of ``u`` values, normalised by ``Z(beta, h)``."""
    h = _real_field(h)
    params = ModelParams(beta, h, coupling)
    u = np.atleast_1d(np.asarray(u, dtype=np.float64))
    fields = np.concatenate([[h + 0j], h + 1j * u / params.beta])
    log_mag, phase = log_partition_many(spec, params, fields)
    return _ratio(log_mag[1:], phase[1:], log_mag[0], phase[0])


def coherence_at(spec: LatticeSpec, beta: float, h: float, u: float, coupling: float = 1.0) -> complex:
    """``<S+(t)>`` at ``eta*t = u``; exactly ``1`` at ``u = 0``."""
    if u == 0:
        _real_field(h)
        ModelParams(beta, h, coupling)
        return 1 + 0j
    return complex(coherence_values(spec, beta, h, [u], coupling)[0])


def _ratio(log_mag, phase, norm_mag, norm_phase) -> np.ndarray:
    zero = np.isneginf(log_mag)
    exponent = np.where(zero, 0.0, log_mag - norm_mag) + 1j * (phase - norm_phase)
    return np.where(zero, 0j, np.exp(exponent))


def _real_field(h) -> float:
    h = complex(h)
    if h.imag != 0:
        raise ValidationError(f"the bath field must be real, got {h!r}")
    return h.real


@dataclass(frozen=True)
class CoherenceSeries:
    """Coherence sampled on the closed uniform grid ``u_k = k*period/(P-1)``."""

    spec: LatticeSpec
    beta: float
    field: float
    period: float
    values: np.ndarray = field(repr=False)
    eta: float = 1.0
    coupling: float = 1.0

    @property
    def points(self) -> int:
        return len(self.values)

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(0.0, self.period, self.points)

    @property
    def spacing(self) -> float:
        return self.period / (self.points - 1)


def coherence_series(
    spec: LatticeSpec,
    beta: float,
    h: float,
    points: int = DEFAULT_POINTS,
    period: float = TWO_PI,
    coupling: float = 1.0,
) -> CoherenceSeries:
    """Sample the coherence over one period, both endpoints included.

    The first grid point doubles as the normalisation, so ``values[0]`` is
    exactly 1.
    """
    validate_points(points)
    fold_order(period)
    h = _real_field(h)
    params = ModelParams(beta, h, coupling)
    grid = np.linspace(0.0, period, points)
    log_mag, phase = log_partition_many(spec, params, h + 1j * grid / params.beta)
    values = _ratio(log_mag, phase, log_mag[0], phase[0])
    return CoherenceSeries(spec, params.beta, h, float(period), values, coupling=coupling)


@dataclass(frozen=True)
class SeriesDiagnostics:
    """Invariant defects of a :class:`CoherenceSeries`.

    ``aliasing_margin`` compares the grid against the coherence bandwidth:
    ``L`` is a trigonometric polynomial whose frequencies are magnetisations
    (|m| <= area), and the coarse panel set of the Simpson-3/8 rule only
    separates frequencies below ``n*(P-1)/3`` for period ``2*pi/n``.  A
    non-positive margin means high-magnetisation components can alias into
    the reconstruction; it is reported under ``warnings`` because it is a
    property of the grid, not a broken invariant.
    """

    normalization_defect: float
    magnitude_excess: float
    conjugate_defect: float
    periodicity_defect: float
    grid_ok: bool
    aliasing_margin: int
    flags: tuple[str, ...]
    warnings: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.flags


def verify_series(series: CoherenceSeries, tol: float = 1e-10) -> SeriesDiagnostics:
    """Measure every structural invariant of ``series`` without modifying it."""
    values = np.asarray(series.values)
    normalization = abs(values[0] - 1.0)
    excess = max(0.0, float(np.abs(values).max()) - 1.0)
    conjugate = float(np.abs(values[::-1] - np.conj(values)).max())
    periodicity = abs(values[-1] - values[0])
    grid_ok = len(values) >= 4 and len(values) % 3 == 1
    try:
        n = fold_order(series.period)
        margin = n * (len(values) - 1) // 3 - series.spec.area()
    except ValidationError:
        margin = -series.spec.area()

    flags = []
    if normalization > tol:
        flags.append("normalization")
    if excess > 1e-12:
        flags.append("magnitude")
    if conjugate > tol:
        flags.append("conjugate-symmetry")
    if periodicity > tol:
        flags.append("periodicity")
    if not grid_ok:
        flags.append("grid")
    warnings = ("aliasing",) if margin <= 0 else ()
    return SeriesDiagnostics(
        normalization, excess, conjugate, periodicity, grid_ok, margin, tuple(flags), warnings
    )
