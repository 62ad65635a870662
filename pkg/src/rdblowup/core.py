"""Shared parameter container and error types.

Everything downstream is parametrized by the two coupling exponents and the
second diffusivity; they are bundled once here so validation happens in one
place.
"""
from __future__ import annotations

from dataclasses import dataclass


class ConfigurationError(ValueError):
    """Inconsistent or out-of-range configuration (bad exponents, mismatched
    quadrature scale, unknown config key, ...)."""


class DomainCoverageError(ValueError):
    """A quadrature node or evaluation point falls outside the represented
    grid with non-negligible weight."""


class NoCaptureError(RuntimeError):
    """The shooting search box does not enclose a capture point (boundary
    winding number is zero)."""


class OracleMismatchError(AssertionError):
    """A closed-form quantity disagrees with its independent numerical
    oracle beyond tolerance."""


@dataclass(frozen=True)
class Params:
    """Coupling exponents and diffusivity ratio of the reaction-diffusion pair.

    The first component diffuses with unit coefficient, the second with
    coefficient ``mu``; the sources are ``|v|^(p-1) v`` and ``|u|^(q-1) u``.
    """

    p: float
    q: float
    mu: float = 1.0

    def __post_init__(self) -> None:
        if not self.p > 1.0:
            raise ConfigurationError(f"p={self.p} violates p > 1")
        if not self.q > 1.0:
            raise ConfigurationError(f"q={self.q} violates q > 1")
        if not self.mu > 0.0:
            raise ConfigurationError(f"mu={self.mu} violates mu > 0")

    @property
    def pq1(self) -> float:
        """The gap pq - 1 that sets every similarity exponent."""
        return self.p * self.q - 1.0

    @property
    def alpha_u(self) -> float:
        """Decay exponent of the first component: (p+1)/(pq-1)."""
        return (self.p + 1.0) / self.pq1

    @property
    def alpha_v(self) -> float:
        """Decay exponent of the second component: (q+1)/(pq-1)."""
        return (self.q + 1.0) / self.pq1


def signed_power(w, r):
    """|w|^(r-1) w, the odd continuation of the r-th power to negative w.

    Accepts scalars or arrays; r need not be an integer.
    """
    import numpy as np

    w = np.asarray(w)
    return np.sign(w) * np.abs(w) ** r


def resample_values(values, y0, step, targets):
    """Six-point Lagrange interpolation of uniform-grid samples.

    ``values`` live on nodes ``y0 + j*step``; returns interpolated values at
    ``targets``.  Exact for polynomials up to degree 5; targets outside the
    grid are evaluated on the nearest boundary window (extrapolation, the
    caller is responsible for keeping that region negligible).  Preserves
    the dtype of ``values``.
    """
    import numpy as np

    values = np.asarray(values)
    t = np.asarray(targets, dtype=values.dtype)
    n = values.shape[0]
    if n < 6:
        raise ConfigurationError(f"resampling needs at least 6 samples, got {n}")
    u = (t - values.dtype.type(y0)) / values.dtype.type(step)
    base = np.floor(u).astype(np.int64) - 2
    np.clip(base, 0, n - 6, out=base)
    xi = u - base
    out = np.zeros_like(t)
    offsets = np.arange(6)
    for i in range(6):
        li = np.ones_like(t)
        for j in range(6):
            if j != i:
                li *= (xi - j) / (i - j)
        out += li * values[base + i]
    return out
