"""Central charge from finite-size scaling of critical free energies.

Strip geometry (width N, length M >> N):   f = A - pi c / (6 N^2)
Torus at fixed area S, aspect x = M/N:      F = A S - (pi c / 6)(x + 1/x) + ...
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import RankDeficiencyError, ValidationError
from .holography import QuadratureConfig, estimate_free_energy, require_positive
from .coherence import coherence_series
from .ising import LatticeSpec, ModelParams, log_partition_transfer

DIRECT = "direct"
RECONSTRUCTED = "reconstructed"


@dataclass(frozen=True)
class FreeEnergyPoint:
    spec: LatticeSpec
    f: float
    method: str = DIRECT

    def __post_init__(self):
        if not math.isfinite(self.f):
            raise ValidationError(f"free energy for {self.spec} is not finite: {self.f!r}")

    @property
    def F_total(self) -> float:
        return self.f * self.spec.area()


@dataclass(frozen=True)
class CentralChargeFit:
    slope: float
    intercept: float
    c: float
    slope_stderr: float
    c_stderr: float
    intercept_stderr: float
    residuals: np.ndarray = field(repr=False)
    points: tuple[FreeEnergyPoint, ...] = field(repr=False, default=())

    def to_report(self) -> dict:
        return {
            "slope": self.slope,
            "slope_stderr": self.slope_stderr,
            "intercept": self.intercept,
            "c": self.c,
            "c_stderr": self.c_stderr,
            "points": [
                {"N": p.spec.rows, "M": p.spec.cols, "f": p.f, "residual": float(r)}
                for p, r in zip(self.points, self.residuals)
            ],
        }


def ols(x, y) -> tuple[float, float, float, float, np.ndarray]:
    """Unweighted least squares ``y = slope*x + intercept``.

    Returns slope, intercept, their standard errors (residual variance with
    n-2 degrees of freedom) and the residuals.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = len(x)
    if n < 3:
        raise ValidationError(f"a fit with standard errors needs >= 3 points, got {n}")
    xm = x.mean()
    sxx = float(np.sum((x - xm) ** 2))
    if sxx <= 1e-14 * max(1.0, float(np.sum(x * x))):
        raise RankDeficiencyError("regressor takes a single value; slope is undetermined")
    ym = y.mean()
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    intercept = float(ym - slope * xm)
    residuals = y - (slope * x + intercept)
    variance = float(np.sum(residuals**2)) / (n - 2)
    slope_err = math.sqrt(variance / sxx)
    intercept_err = math.sqrt(variance * (1.0 / n + xm * xm / sxx))
    return slope, intercept, slope_err, intercept_err, residuals


def fit_central_charge_strip(points: Sequence[FreeEnergyPoint]) -> CentralChargeFit:
    """Regress ``f`` on ``1/N^2`` at fixed length; ``c = -6 slope / pi``."""
    points = tuple(points)
    if len(points) < 3:
        raise ValidationError(f"strip fit needs >= 3 lattices, got {len(points)}")
    lengths = {p.spec.cols for p in points}
    if len(lengths) != 1:
        raise ValidationError(f"strip fit needs a common length, got cols {sorted(lengths)}")
    x = [1.0 / p.spec.rows**2 for p in points]
    slope, intercept, slope_err, intercept_err, res = ols(x, [p.f for p in points])
    scale = 6.0 / math.pi
    return CentralChargeFit(
        slope, intercept, -scale * slope, slope_err, scale * slope_err, intercept_err, res, points
    )


@dataclass(frozen=True)
class ElongationRow:
    spec: LatticeSpec
    x: float
    ln_x: float
    F_total: float
    f_per_site: float

    @property
    def ln_abs_F(self) -> float:
        return math.log(abs(self.F_total))


def _common_area(points: Sequence[FreeEnergyPoint]) -> int:
    areas = {p.spec.area() for p in points}
    if len(areas) != 1:
        raise ValidationError(f"points must share one area, got {sorted(areas)}")
    return areas.pop()


def elongation_curve(points: Sequence[FreeEnergyPoint]) -> list[ElongationRow]:
    """``(ln x, F_total)`` table at fixed area, sorted by ``x = cols/rows``."""
    if not points:
        raise ValidationError("no points supplied")
    _common_area(points)
    rows = [
        ElongationRow(p.spec, p.spec.aspect_ratio(), math.log(p.spec.aspect_ratio()), p.F_total, p.f)
        for p in points
    ]
    return sorted(rows, key=lambda r: (r.x, r.spec.rows))


def fit_central_charge_aspect(points: Sequence[FreeEnergyPoint]) -> CentralChargeFit:
    """Regress ``F_total`` on ``-(pi/6)(x + 1/x)`` at fixed area; ``c`` is the slope.

    The torus formula neglects higher-order shape corrections, so this
    estimate is coarser than :func:`fit_central_charge_strip`.  The
    intercept estimates ``A * area``.
    """
    points = tuple(points)
    _common_area(points)
    ratios = {round(p.spec.aspect_ratio(), 12) for p in points}
    if len(ratios) < 3:
        raise ValidationError(f"aspect fit needs >= 3 distinct aspect ratios, got {len(ratios)}")
    x = [-(math.pi / 6.0) * (p.spec.aspect_ratio() + 1.0 / p.spec.aspect_ratio()) for p in points]
    slope, intercept, slope_err, intercept_err, res = ols(x, [p.F_total for p in points])
    return CentralChargeFit(slope, intercept, slope, slope_err, slope_err, intercept_err, res, points)


def direct_point(spec: LatticeSpec, beta: float, coupling: float = 1.0) -> FreeEnergyPoint:
    """Zero-field ``f`` straight from the transfer matrix (the oracle pipeline)."""
    log_z = log_partition_transfer(spec, ModelParams(beta, 0.0, coupling)).log_mag
    return FreeEnergyPoint(spec, -log_z / spec.area(), DIRECT)


def reconstructed_point(
    spec: LatticeSpec,
    beta: float,
    h: float,
    quad: QuadratureConfig = QuadratureConfig(),
    coupling: float = 1.0,
) -> FreeEnergyPoint:
    """Zero-field ``f`` reconstructed from simulated coherence at field ``h``."""
    series = coherence_series(spec, beta, h, quad.points, quad.period, coupling)
    estimate = require_positive(estimate_free_energy(series))
    return FreeEnergyPoint(spec, estimate.f_per_site, RECONSTRUCTED)
