"""Exact partition functions of the nearest-neighbour Ising model on a torus.

The Hamiltonian on an ``rows x cols`` torus is

    H = -J * sum_{i,j} (s[i,j] s[i+1,j] + s[i,j] s[i,j+1]) - h * sum_{i,j} s[i,j]

with indices taken modulo the lattice size.  The sums are implemented
literally, so a length-2 direction counts each of its bonds twice and a
length-1 direction contributes a constant ``s*s = 1`` per site.

Two independent evaluation routes are provided:

* :func:`brute_force_log_partition` enumerates all ``2**(rows*cols)``
  configurations (oracle scale, area <= 20);
* :func:`log_partition_transfer` raises the column transfer matrix to the
  ``cols``-th power with per-product rescaling.  By default the transfer
  matrix is first block-diagonalised by the cyclic translation symmetry of
  a column, which is exact for any uniform (complex) field.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from scipy import integrate

from .errors import CapacityError, ValidationError
from .logcomplex import LogComplex

BETA_C = 0.5 * math.log(1.0 + math.sqrt(2.0))
"""Onsager critical inverse temperature of the square lattice (J = 1)."""

MAX_ROWS = 14
MAX_BRUTE_FORCE_AREA = 20
DEFAULT_MEMORY_BUDGET = 8 * 2**30

THREADS_ENV = "ISINGHOLO_THREADS"

# fields per batched sector product
_CHUNK_BYTES = 48 * 2**20


def worker_threads() -> int:
    """Thread count for grid evaluations, read from ``ISINGHOLO_THREADS``."""
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValidationError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    return max(1, n)


@dataclass(frozen=True)
class LatticeSpec:
    """An ``rows x cols`` torus (periodic in both directions)."""

    rows: int
    cols: int

    def __post_init__(self):
        for name in ("rows", "cols"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise ValidationError(f"{name} must be an integer, got {value!r}")
            if value < 1:
                raise ValidationError(f"{name} must be >= 1, got {value}")
            object.__setattr__(self, name, int(value))

    def area(self) -> int:
        return self.rows * self.cols

    def aspect_ratio(self) -> float:
        return self.cols / self.rows

    def swapped(self) -> LatticeSpec:
        return LatticeSpec(self.cols, self.rows)

    def __str__(self) -> str:
        return f"{self.rows}x{self.cols}"


@dataclass(frozen=True)
class ModelParams:
    """Coupling ``J``, inverse temperature ``beta`` and (complex) field ``h``."""

    beta: float
    field: complex = 0j
    coupling: float = 1.0

    def __post_init__(self):
        beta = float(self.beta)
        if not math.isfinite(beta) or beta <= 0:
            raise ValidationError(f"beta must be finite and > 0, got {self.beta!r}")
        coupling = float(self.coupling)
        if not math.isfinite(coupling):
            raise ValidationError(f"coupling must be finite, got {self.coupling!r}")
        field = complex(self.field)
        if not (math.isfinite(field.real) and math.isfinite(field.imag)):
            raise ValidationError(f"field must be finite, got {self.field!r}")
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "coupling", coupling)
        object.__setattr__(self, "field", field)

    @property
    def field_is_real(self) -> bool:
        return self.field.imag == 0.0

    def with_field(self, field: complex) -> ModelParams:
        return replace(self, field=complex(field))


# --------------------------------------------------------------------------
# brute force


@lru_cache(maxsize=64)
def _energy_histogram(rows: int, cols: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Counts of configurations per (bond sum, magnetisation) pair."""
    area = rows * cols
    shifts = np.arange(area, dtype=np.int64)
    keys = []
    chunk = 1 << 16
    offset = area  # bond sums lie in [-2*area, 2*area]
    stride = 2 * area + 1
    for start in range(0, 1 << area, chunk):
        configs = np.arange(start, min(start + chunk, 1 << area), dtype=np.int64)
        spins = (1 - 2 * ((configs[:, None] >> shifts) & 1)).astype(np.int64)
        spins = spins.reshape(-1, rows, cols)
        vertical = (spins * np.roll(spins, -1, axis=1)).sum(axis=(1, 2))
        horizontal = (spins * np.roll(spins, -1, axis=2)).sum(axis=(1, 2))
        mag = spins.sum(axis=(1, 2))
        bonds = vertical + horizontal
        keys.append((bonds + 2 * offset) * stride + (mag + offset))
    uniq, counts = np.unique(np.concatenate(keys), return_counts=True)
    bonds = uniq // stride - 2 * offset
    mag = uniq % stride - offset
    return bonds, mag, counts


def brute_force_log_partition(spec: LatticeSpec, params: ModelParams) -> LogComplex:
    """log Z by exhaustive enumeration of all spin configurations.

    Configurations are grouped by their (bond sum, magnetisation) pair before
    summing, which is exact and keeps the reduction order fixed.
    """
    if spec.area() > MAX_BRUTE_FORCE_AREA:
        raise CapacityError(
            f"brute force is limited to area <= {MAX_BRUTE_FORCE_AREA}, got {spec.area()}"
        )
    bonds, mag, counts = _energy_histogram(spec.rows, spec.cols)
    beta_j = params.beta * params.coupling
    beta_h = params.beta * params.field
    exponents = beta_j * bonds + beta_h * mag + np.log(counts)
    shift = exponents.real.max()
    total = np.sum(np.exp(exponents - shift))
    if params.field_is_real:
        total = complex(total.real, 0.0)
    if total == 0:
        return LogComplex.zero()
    return LogComplex(shift + math.log(abs(total)), np.angle(total))


# --------------------------------------------------------------------------
# transfer matrix


def _column_spins(width: int, configs: np.ndarray) -> np.ndarray:
    return 1 - 2 * ((configs[:, None] >> np.arange(width)) & 1)


def _row_terms(spins: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """In-column bond sum (literal periodic sum) and magnetisation."""
    bond = (spins * np.roll(spins, -1, axis=1)).sum(axis=1)
    return bond, spins.sum(axis=1)


def _check_width(rows: int) -> None:
    if rows > MAX_ROWS:
        raise CapacityError(f"transfer matrix width {rows} exceeds the limit of {MAX_ROWS}")


def build_transfer_matrix(
    rows: int, params: ModelParams, max_bytes: int = DEFAULT_MEMORY_BUDGET
) -> np.ndarray:
    """Dense symmetrised column-to-column transfer matrix of dimension ``2**rows``.

    ``T[s, t] = exp(bJ s.t + bJ/2 (bond(s) + bond(t)) + bh/2 (mag(s) + mag(t)))``.
    Real-valued for real ``h``, complex otherwise; symmetric in both cases.
    """
    if rows < 1:
        raise ValidationError(f"rows must be >= 1, got {rows}")
    _check_width(rows)
    dim = 1 << rows
    itemsize = 8 if params.field_is_real else 16
    # ~3 temporaries of the final size are alive at once
    if 3 * dim * dim * itemsize > max_bytes:
        raise CapacityError(
            f"dense transfer matrix for rows={rows} needs ~{3 * dim * dim * itemsize} bytes, "
            f"budget is {max_bytes}"
        )
    spins = _column_spins(rows, np.arange(dim)).astype(np.float64)
    bond, mag = _row_terms(spins)
    beta_j = params.beta * params.coupling
    field = params.field.real if params.field_is_real else params.field
    local = 0.5 * (beta_j * bond + params.beta * field * mag)
    # l_i + l_j is formed first so that T == T.T holds bit for bit
    exponent = beta_j * (spins @ spins.T) + (local[:, None] + local[None, :])
    return np.exp(exponent)


@dataclass(frozen=True)
class _Sector:
    """Block of the transfer matrix in one translation eigenspace.

    The field-independent core is stored; the full block is
    ``w[:, None] * core * w[None, :]`` with ``w = exp((bJ*bond + bh*mag)/2)``.
    """

    core: np.ndarray
    bond: np.ndarray
    mag: np.ndarray
    multiplicity: int


def _necklaces(width: int) -> tuple[np.ndarray, np.ndarray]:
    """Orbit representatives of cyclic shifts of ``width`` bits, with orbit sizes."""
    size = 1 << width
    mask = size - 1
    configs = np.arange(size, dtype=np.int64)
    rotations = np.empty((width, size), dtype=np.int64)
    current = configs
    for d in range(width):
        rotations[d] = current
        current = ((current >> 1) | ((current & 1) << (width - 1))) & mask
    reps = np.unique(rotations.min(axis=0))
    if width == 1:
        return reps, np.ones(len(reps), dtype=np.int64)
    fixed = rotations[1:, reps] == reps[None, :]
    periods = np.where(fixed.any(axis=0), fixed.argmax(axis=0) + 1, width)
    return reps, periods


@lru_cache(maxsize=32)
def _sectors(width: int, beta: float, coupling: float) -> tuple[_Sector, ...]:
    """Translation-sector blocks of the width-``width`` transfer matrix.

    For orbit representatives a, b compatible with momentum k = 2*pi*q/width,
    ``T_k[a, b] = sqrt(p_a p_b)/width * sum_d exp(-i k d) T[a, S^d b]``.
    Reflection maps momentum k to -k, so sectors q and width-q have equal
    traces of every power and only q <= width/2 is kept (with multiplicity 2).
    """
    reps, periods = _necklaces(width)
    spins = _column_spins(width, reps).astype(np.float64)
    bond, mag = _row_terms(spins)
    beta_j = beta * coupling
    shifted = np.empty((width, len(reps), len(reps)))
    for d in range(width):
        np.exp(beta_j * (spins @ np.roll(spins, d, axis=1).T), out=shifted[d])
    momentum = np.fft.fft(shifted, axis=0)
    del shifted
    norm = np.sqrt(np.outer(periods, periods)) / width
    sectors = []
    for q in range(width // 2 + 1):
        keep = (q * periods) % width == 0
        core = momentum[q][np.ix_(keep, keep)] * norm[np.ix_(keep, keep)]
        if q == 0:
            # momentum-zero block of a real symmetric matrix is real
            core = np.ascontiguousarray(core.real)
        multiplicity = 1 if (q == 0 or 2 * q == width) else 2
        sectors.append(_Sector(core, bond[keep], mag[keep], multiplicity))
    return tuple(sectors)


def _normalise(mats: np.ndarray) -> np.ndarray:
    """Divide each matrix by its largest |entry| in place; return log of the factors."""
    scale = np.abs(mats).max(axis=(1, 2))
    scale = np.where(scale > 0, scale, 1.0)
    mats /= scale[:, None, None]
    return np.log(scale)


def _log_trace_power(mats: np.ndarray, power: int) -> tuple[np.ndarray, np.ndarray]:
    """``Tr(A**power) = exp(log_scale) * trace`` for a stack of square matrices.

    Binary powering; every product is rescaled by its max-magnitude entry.
    The last product is never formed, only its diagonal.
    """
    if power < 1:
        raise ValidationError(f"power must be >= 1, got {power}")
    base = np.array(mats, dtype=np.complex128, copy=True)
    base_log = _normalise(base)
    acc = None
    acc_log = None
    while True:
        if power & 1:
            if acc is None:
                acc, acc_log = base.copy(), base_log.copy()
            elif power == 1:
                trace = np.einsum("bij,bji->b", acc, base)
                return acc_log + base_log, trace
            else:
                acc = acc @ base
                acc_log = acc_log + base_log + _normalise(acc)
        power >>= 1
        if not power:
            break
        base = base @ base
        base_log = 2.0 * base_log + _normalise(base)
    return acc_log, np.einsum("bii->b", acc)


def _combine_sectors(
    logs: np.ndarray, traces: np.ndarray, multiplicities: np.ndarray, real: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Sum per-sector traces (shape ``(sectors, fields)``) in log space.

    Returns (log_mag, phase); an exactly vanishing total gives log_mag = -inf.
    """
    top = logs.max(axis=0)
    total = np.sum(multiplicities[:, None] * traces * np.exp(logs - top), axis=0)
    total = np.where(real, total.real + 0j, total)
    zero = total == 0
    safe = np.where(zero, 1.0, total)
    log_mag = np.where(zero, -np.inf, top + np.log(np.abs(safe)))
    phase = np.where(zero, 0.0, np.angle(safe))
    return log_mag, phase


def _fields_chunk(sectors, length, beta, coupling, fields) -> tuple[np.ndarray, np.ndarray]:
    beta_j = beta * coupling
    logs = np.empty((len(sectors), len(fields)))
    traces = np.empty((len(sectors), len(fields)), dtype=np.complex128)
    for i, sector in enumerate(sectors):
        local = np.exp(0.5 * (beta_j * sector.bond[None, :] + beta * np.outer(fields, sector.mag)))
        mats = local[:, :, None] * sector.core[None, :, :] * local[:, None, :]
        logs[i], traces[i] = _log_trace_power(mats, length)
    mult = np.array([s.multiplicity for s in sectors], dtype=np.float64)
    return _combine_sectors(logs, traces, mult, fields.imag == 0)


def _orient(spec: LatticeSpec) -> tuple[int, int]:
    width, length = sorted((spec.rows, spec.cols))
    if width > MAX_ROWS:
        raise CapacityError(
            f"both dimensions of {spec} exceed the transfer-matrix limit of {MAX_ROWS}"
        )
    return width, length


def log_partition_many(
    spec: LatticeSpec, params: ModelParams, fields
) -> tuple[np.ndarray, np.ndarray]:
    """log Z at many complex fields sharing ``spec``, ``beta`` and ``coupling``.

    ``params.field`` is ignored.  Returns arrays ``(log_mag, phase)``; a
    vanishing partition function is reported as ``log_mag = -inf``.
    Evaluation is split into fixed-size chunks (independent of the thread
    count), so results are bit-reproducible.
    """
    width, length = _orient(spec)
    fields = np.atleast_1d(np.asarray(fields, dtype=np.complex128))
    if not np.all(np.isfinite(fields)):
        raise ValidationError("fields must be finite")
    sectors = _sectors(width, params.beta, params.coupling)
    largest = max(s.core.shape[0] for s in sectors)
    chunk = max(1, _CHUNK_BYTES // (4 * 16 * largest * largest))
    pieces = [fields[i : i + chunk] for i in range(0, len(fields), chunk)]

    def run(piece):
        return _fields_chunk(sectors, length, params.beta, params.coupling, piece)

    threads = min(worker_threads(), len(pieces))
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(run, pieces))
    else:
        results = [run(p) for p in pieces]
    log_mag = np.concatenate([r[0] for r in results])
    phase = np.concatenate([r[1] for r in results])
    return log_mag, phase


def log_partition_transfer(
    spec: LatticeSpec, params: ModelParams, method: str = "sectors"
) -> LogComplex:
    """log Tr(T**length) using the shorter lattice edge as the column width.

    ``method="sectors"`` (default) works in translation eigenspaces;
    ``method="dense"`` powers the full ``2**width`` matrix and exists as a
    cross-check.
    """
    if method == "sectors":
        log_mag, phase = log_partition_many(spec, params, [params.field])
        return LogComplex(log_mag[0], phase[0])
    if method != "dense":
        raise ValidationError(f"unknown method {method!r}")
    width, length = _orient(spec)
    matrix = build_transfer_matrix(width, params)
    log_scale, trace = _log_trace_power(matrix[None], length)
    log_mag, phase = _combine_sectors(
        log_scale[None], trace[None], np.ones(1), np.array([params.field_is_real])
    )
    return LogComplex(log_mag[0], phase[0])


# --------------------------------------------------------------------------
# bulk reference


def onsager_log_partition_density(beta: float, coupling: float = 1.0) -> float:
    """Bulk ``ln Z / area`` of the zero-field square lattice (Onsager).

    Evaluates ``ln(2 cosh 2K) + (1/pi) int_0^{pi/2} ln[(1 + sqrt(1 - k^2 sin^2 t))/2] dt``
    with ``K = beta*J`` and ``k = 2 sinh 2K / cosh^2 2K`` by adaptive quadrature.
    """
    k_coupling = beta * coupling
    modulus = 2.0 * math.sinh(2 * k_coupling) / math.cosh(2 * k_coupling) ** 2

    def integrand(theta):
        inner = max(0.0, 1.0 - (modulus * math.sin(theta)) ** 2)
        return math.log(0.5 * (1.0 + math.sqrt(inner)))

    value, _ = integrate.quad(integrand, 0.0, 0.5 * math.pi, epsabs=1e-14, epsrel=1e-13, limit=200)
    return math.log(2.0 * math.cosh(2 * k_coupling)) + value / math.pi
