"""Weighted Hermite bases, Gaussian weights, and quadrature inner products.

The linearized dynamics live in L^2 spaces weighted by Gaussians
``rho_eta(y) = (4 pi eta)^(-1/2) exp(-y^2 / (4 eta))`` with ``eta`` equal to
one of the two diffusivities.  The natural orthogonal family for ``rho_eta``
is the monic scaled Hermite family ``H_n(y; eta)`` with leading coefficient 1
and ``H_2 = y^2 - 2 eta``.  This module provides those polynomials, the
quadrature that integrates them exactly, and expansion/inner-product helpers.

All types are immutable after construction and safe to share between threads.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .core import ConfigurationError

__all__ = [
    "Weight",
    "Poly",
    "Quadrature",
    "hermite_weighted",
    "gauss_quadrature",
    "inner_product",
    "hermite_expand",
    "hermite_norm_sq",
    "ou_apply",
]

DEFAULT_ORDER = 80


@dataclass(frozen=True)
class Weight:
    """Normalized Gaussian weight with scale ``eta > 0``."""

    eta: float

    def __post_init__(self) -> None:
        if not self.eta > 0.0:
            raise ConfigurationError(f"weight eta={self.eta} must be positive")

    def density(self, y):
        """Evaluate the probability density at ``y`` (scalar or array)."""
        y = np.asarray(y, dtype=float)
        return np.exp(-(y * y) / (4.0 * self.eta)) / math.sqrt(4.0 * math.pi * self.eta)


@dataclass(frozen=True)
class Poly:
    """Dense polynomial in one variable; ``coeffs[k]`` multiplies ``y**k``.

    The zero polynomial is ``Poly(())``; otherwise the trailing coefficient
    is nonzero.
    """

    coeffs: tuple

    def __post_init__(self) -> None:
        coeffs = tuple(float(c) for c in self.coeffs)
        while coeffs and coeffs[-1] == 0.0:
            coeffs = coeffs[:-1]
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def __call__(self, y):
        y = np.asarray(y)
        out = np.zeros_like(y, dtype=y.dtype if y.dtype.kind == "f" else float)
        for c in reversed(self.coeffs):
            out = out * y + c
        return out

    def __mul__(self, other: "Poly") -> "Poly":
        if not self.coeffs or not other.coeffs:
            return Poly(())
        return Poly(tuple(np.polynomial.polynomial.polymul(self.coeffs, other.coeffs)))

    def __add__(self, other: "Poly") -> "Poly":
        return Poly(tuple(np.polynomial.polynomial.polyadd(self.coeffs or (0.0,), other.coeffs or (0.0,))))

    def scale(self, a: float) -> "Poly":
        return Poly(tuple(a * c for c in self.coeffs))

    def derivative(self) -> "Poly":
        return Poly(tuple(k * c for k, c in enumerate(self.coeffs) if k > 0))


@dataclass(frozen=True)
class Quadrature:
    """Gauss rule for ``integral f(y) rho_eta(y) dy``.

    ``order`` nodes integrate polynomials of degree <= 2*order - 1 exactly.
    Weights are positive and sum to 1 (the density is normalized).
    """

    nodes: tuple
    weights: tuple
    eta: float
    order: int

    def integrate(self, values) -> float:
        values = np.asarray(values, dtype=float)
        return float(np.dot(values, self.weights))


def gauss_quadrature(eta: float, order: int = DEFAULT_ORDER) -> Quadrature:
    """Build the Gauss rule for the weight ``rho_eta``.

    Nodes and weights come from the symmetric tridiagonal Jacobi matrix of
    the monic orthogonal family (Golub-Welsch): for the standard normal
    weight the off-diagonal entries are ``sqrt(k)``; rescaling nodes by
    ``sqrt(2 eta)`` maps to the ``rho_eta`` normalization.
    """
    if not eta > 0.0:
        raise ConfigurationError(f"quadrature eta={eta} must be positive")
    if order < 1:
        raise ConfigurationError(f"quadrature order={order} must be >= 1")
    if order == 1:
        return Quadrature(nodes=(0.0,), weights=(1.0,), eta=float(eta), order=1)
    diag = np.zeros(order)
    off = np.sqrt(np.arange(1, order, dtype=float))
    x = eigh_tridiagonal(diag, off, eigvals_only=True)
    # The rule is symmetric; enforce it exactly.
    x = 0.5 * (x - x[::-1])
    # Weights via the Christoffel function: w_k = 1 / sum_j phi_j(x_k)^2 with
    # phi_j orthonormal for the standard normal weight.  Stays positive where
    # squaring the eigenvector first component underflows.
    phi_prev = np.ones_like(x)
    phi = x.copy()
    christoffel = phi_prev**2 + phi**2
    for j in range(1, order - 1):
        phi, phi_prev = (x * phi - math.sqrt(j) * phi_prev) / math.sqrt(j + 1), phi
        christoffel += phi**2
    weights = 1.0 / christoffel
    weights = 0.5 * (weights + weights[::-1])
    weights = weights / weights.sum()
    nodes = x * math.sqrt(2.0 * eta)
    return Quadrature(
        nodes=tuple(nodes.tolist()),
        weights=tuple(weights.tolist()),
        eta=float(eta),
        order=int(order),
    )


def hermite_weighted(n: int, eta: float) -> Poly:
    """Monic Hermite polynomial of degree ``n`` orthogonal under ``rho_eta``.

    Explicit sum: ``H_n(y; eta) = sum_j (-1)^j n! / ((n-2j)! j!) eta^j y^(n-2j)``,
    e.g. ``H_2 = y^2 - 2 eta`` and ``H_4 = y^4 - 12 eta y^2 + 12 eta^2``.
    """
    if n < 0:
        raise ConfigurationError(f"hermite degree n={n} must be nonnegative")
    if not eta > 0.0:
        raise ConfigurationError(f"hermite eta={eta} must be positive")
    coeffs = [0.0] * (n + 1)
    for j in range(n // 2 + 1):
        k = n - 2 * j
        coeffs[k] = (-1.0) ** j * math.factorial(n) / (math.factorial(k) * math.factorial(j)) * eta**j
    return Poly(tuple(coeffs))


def hermite_norm_sq(n: int, eta: float) -> float:
    """Closed-form squared norm ``<H_n, H_n>_{rho_eta} = (2 eta)^n n!``."""
    return (2.0 * eta) ** n * math.factorial(n)


FuncLike = Union[Poly, Callable, Sequence, np.ndarray]


def _values_at_nodes(f: FuncLike, quad: Quadrature) -> np.ndarray:
    if isinstance(f, Poly):
        return f(np.asarray(quad.nodes))
    if callable(f):
        return np.asarray(f(np.asarray(quad.nodes)), dtype=float)
    values = np.asarray(f, dtype=float)
    if values.shape != (quad.order,):
        raise ConfigurationError(
            f"sampled function has shape {values.shape}, expected ({quad.order},) "
            "matching the quadrature nodes"
        )
    return values


def inner_product(f: FuncLike, g: FuncLike, w: Weight, quad: Quadrature) -> float:
    """Weighted inner product ``integral f g rho_eta dy`` by Gauss quadrature.

    ``f`` and ``g`` may be ``Poly``, callables evaluable at the nodes, or
    arrays already sampled at the nodes.  Exact (to rounding) when the
    product is a polynomial of degree <= 2*order - 1.
    """
    if quad.eta != w.eta:
        raise ConfigurationError(
            f"quadrature eta={quad.eta} does not match weight eta={w.eta}"
        )
    fv = _values_at_nodes(f, quad)
    gv = _values_at_nodes(g, quad)
    return quad.integrate(fv * gv)


def hermite_expand(f: Poly, w: Weight, max_deg: int, quad: Quadrature) -> list:
    """Coefficients ``c_k`` with ``f = sum_k c_k H_k(.; eta)``, k <= max_deg.

    Uses ``c_k = <f, H_k> / (2 eta)^k k!``; the quadrature must have slack
    for the product degree, i.e. ``max_deg <= 2*order - 1 - max_deg``.
    """
    if f.degree > max_deg:
        raise ConfigurationError(
            f"degree overflow: deg(f)={f.degree} exceeds max_deg={max_deg}"
        )
    if max_deg > 2 * quad.order - 1 - max_deg:
        raise ConfigurationError(
            f"degree overflow: max_deg={max_deg} beyond quadrature order {quad.order}"
        )
    out = []
    for k in range(max_deg + 1):
        hk = hermite_weighted(k, w.eta)
        out.append(inner_product(f, hk, w, quad) / hermite_norm_sq(k, w.eta))
    return out


def ou_apply(f: Poly, eta: float) -> Poly:
    """Apply the generator ``eta d^2/dy^2 - (y/2) d/dy`` coefficient-wise.

    The monic family diagonalizes it: ``ou_apply(H_n, eta) = -(n/2) H_n``,
    exactly at the coefficient level.
    """
    n = f.degree
    if n < 0:
        return Poly(())
    out = [0.0] * (n + 1)
    for k, c in enumerate(f.coeffs):
        if k >= 2:
            out[k - 2] += eta * k * (k - 1) * c
        out[k] += -0.5 * k * c
    return Poly(tuple(out))
