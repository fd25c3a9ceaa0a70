"""Overflow-safe polar representation of complex numbers."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

TWO_PI = 2.0 * math.pi


def wrap_phase(phase: float) -> float:
    """Map an angle into (-pi, pi]."""
    wrapped = math.remainder(phase, TWO_PI)
    if wrapped <= -math.pi:
        wrapped += TWO_PI
    return wrapped


@dataclass(frozen=True)
class LogComplex:
    """A complex number stored as ``exp(log_mag) * exp(1j * phase)``.

    ``log_mag == -inf`` encodes an exact zero (e.g. a partition function
    evaluated on a Lee-Yang zero).
    """

    log_mag: float
    phase: float = 0.0

    def __post_init__(self):
        if math.isnan(self.log_mag) or math.isnan(self.phase):
            raise ValueError("LogComplex components must not be NaN")
        if self.log_mag == math.inf:
            raise ValueError("LogComplex magnitude must be finite")
        object.__setattr__(self, "log_mag", float(self.log_mag))
        phase = 0.0 if self.log_mag == -math.inf else wrap_phase(float(self.phase))
        object.__setattr__(self, "phase", phase)

    @classmethod
    def zero(cls) -> LogComplex:
        return cls(-math.inf, 0.0)

    @classmethod
    def from_complex(cls, z: complex) -> LogComplex:
        z = complex(z)
        if z == 0:
            return cls.zero()
        return cls(math.log(abs(z)), cmath.phase(z))

    @classmethod
    def from_log(cls, log_value: complex) -> LogComplex:
        """Build from a complex logarithm ``log|z| + 1j*arg z``."""
        log_value = complex(log_value)
        return cls(log_value.real, log_value.imag)

    @property
    def is_zero(self) -> bool:
        return self.log_mag == -math.inf

    def log(self) -> complex:
        """Principal complex logarithm; raises on zero."""
        if self.is_zero:
            raise ValueError("logarithm of zero")
        return complex(self.log_mag, self.phase)

    def value(self) -> complex:
        if self.is_zero:
            return 0j
        return cmath.rect(math.exp(self.log_mag), self.phase)

    def conjugate(self) -> LogComplex:
        return LogComplex(self.log_mag, -self.phase)

    def __mul__(self, other: LogComplex) -> LogComplex:
        if not isinstance(other, LogComplex):
            return NotImplemented
        if self.is_zero or other.is_zero:
            return LogComplex.zero()
        return LogComplex(self.log_mag + other.log_mag, self.phase + other.phase)

    def __truediv__(self, other: LogComplex) -> LogComplex:
        if not isinstance(other, LogComplex):
            return NotImplemented
        if other.is_zero:
            raise ZeroDivisionError("division by a zero LogComplex")
        if self.is_zero:
            return LogComplex.zero()
        return LogComplex(self.log_mag - other.log_mag, self.phase - other.phase)
