"""Cross-checks of every evaluation path against brute-force enumeration."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .coherence import coherence_series
from .holography import reconstruct_critical_ratio, reconstruct_ratio_periodic
from .ising import (
    BETA_C,
    LatticeSpec,
    ModelParams,
    brute_force_log_partition,
    log_partition_transfer,
)
from .logcomplex import wrap_phase

PARTITION_BETAS = (0.1, 0.3, BETA_C, 0.7, 1.0)
PARTITION_FIELDS = (
    0.0,
    0.1,
    -0.3,
    1.0,
    0.3j,
    0.5 + 0.2j,
    -0.4 - 0.7j,
    0.2 + 1.5j,
    0.05 + 3.0j,
    0.1 + 6.0j,
)
RECONSTRUCTION_BETAS = (0.3, BETA_C, 0.7)
RECONSTRUCTION_FIELDS = (0.3, 0.6)
RECONSTRUCTION_POINTS = 1201


def lattices_up_to(area_limit: int) -> list[LatticeSpec]:
    return [
        LatticeSpec(rows, cols)
        for rows in range(1, area_limit + 1)
        for cols in range(1, area_limit // rows + 1)
    ]


def log_deviation(value, reference) -> float:
    """Relative log-space distance: ``max(|d log_mag|, |d phase|) / max(1, |log ref|)``."""
    d_mag = abs(value.log_mag - reference.log_mag)
    d_phase = abs(wrap_phase(value.phase - reference.phase))
    return max(d_mag, d_phase) / max(1.0, abs(complex(reference.log_mag, reference.phase)))


@dataclass
class OracleReport:
    partition_max: float = 0.0
    partition_worst: str = ""
    partition_checks: int = 0
    reconstruction_max: float = 0.0
    reconstruction_worst: str = ""
    reconstruction_checks: int = 0
    partition_tol: float = 1e-10
    reconstruction_tol: float = 1e-8
    lines: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return (
            self.partition_max <= self.partition_tol
            and self.reconstruction_max <= self.reconstruction_tol
        )


def run_oracle(
    area_limit: int = 16,
    partition_tol: float = 1e-10,
    reconstruction_tol: float = 1e-8,
    points: int = RECONSTRUCTION_POINTS,
) -> OracleReport:
    """Brute force vs transfer matrix vs coherence reconstruction on small tori."""
    report = OracleReport(partition_tol=partition_tol, reconstruction_tol=reconstruction_tol)
    specs = lattices_up_to(area_limit)

    for spec in specs:
        for beta in PARTITION_BETAS:
            for h in PARTITION_FIELDS:
                params = ModelParams(beta, h)
                dev = log_deviation(
                    log_partition_transfer(spec, params), brute_force_log_partition(spec, params)
                )
                report.partition_checks += 1
                if not dev < report.partition_max:
                    report.partition_max = dev
                    report.partition_worst = f"{spec} beta={beta:.6g} h={h}"

    for spec in specs:
        for beta in RECONSTRUCTION_BETAS:
            for h in RECONSTRUCTION_FIELDS:
                series = coherence_series(spec, beta, h, points)
                exact_norm = brute_force_log_partition(spec, ModelParams(beta, h)).log_mag
                checks = [(0.0, reconstruct_critical_ratio(series))]
                checks.append((h / 3.0, reconstruct_ratio_periodic(series, h / 3.0)))
                for target, result in checks:
                    exact = brute_force_log_partition(spec, ModelParams(beta, target)).log_mag
                    expected = math.exp(exact - exact_norm)
                    got = result.integral.real
                    dev = abs(got - expected) / expected
                    report.reconstruction_checks += 1
                    if not dev < report.reconstruction_max:
                        report.reconstruction_max = dev
                        report.reconstruction_worst = (
                            f"{spec} beta={beta:.6g} h={h} lambda'={target:.6g}"
                        )

    report.lines = [
        f"transfer vs brute force: {report.partition_checks} checks, "
        f"max rel deviation {report.partition_max:.3e} (tol {partition_tol:.0e}) "
        f"at {report.partition_worst}",
        f"reconstruction vs brute force: {report.reconstruction_checks} checks, "
        f"max rel deviation {report.reconstruction_max:.3e} (tol {reconstruction_tol:.0e}) "
        f"at {report.reconstruction_worst}",
    ]
    return report
