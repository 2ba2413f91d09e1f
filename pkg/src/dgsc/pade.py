"""The polynomial pair (f, g) whose ratio f(z, 1)/g(z) is the p/(p+1) Padé
approximant of e^z, and the non-physical roots of g(z) - f(z, 1).

With R = P_{p+1} - P_p and s = (-1)^{p+1}/2,

    f(z, xi) = s * sum_{k=1}^{p+1} 2^k z^{p+1-k} R^{(k)}(xi)
    g(z)     = z^{p+1} + s * sum_{k=1}^{p+1} 2^k z^{p+1-k} R^{(k)}(-1)

so g is monic of degree p+1 and f has degree p in both z and xi.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import polynomial as nppoly

from dgsc.polynomials import (
    Basis,
    PolyCoeffs,
    _check_p,
    durand_kerner,
    exp_series,
    radau_right,
)


@dataclass(frozen=True)
class FGPair:
    """f and g for one polynomial degree.

    ``f_matrix[k, j]`` is the coefficient of ``z**j * P_k(xi)`` in f, so row k
    holds the monomial coefficients of phi_k(z) and column j the Legendre
    coefficients of the xi-polynomial multiplying z**j.
    """

    p: int
    g: PolyCoeffs
    f_matrix: np.ndarray

    @property
    def f_legendre(self) -> list[PolyCoeffs]:
        return [PolyCoeffs(Basis.MONOMIAL, row) for row in self.f_matrix]

    @property
    def f_downwind(self) -> np.ndarray:
        """Monomial coefficients (in z) of f(z, 1); P_k(1) = 1 for every k."""
        return self.f_matrix.sum(axis=0)

    def g_of(self, z):
        return nppoly.polyval(z, self.g.coeffs)

    def f_of(self, z, xi):
        z = np.asarray(z)
        zpow = z[..., None] ** np.arange(self.p + 1)
        legendre_coeffs = zpow @ self.f_matrix.T  # ... x (p+1)
        vander = np.stack(
            [np.polynomial.legendre.legval(xi, np.eye(self.p + 1)[k]) for k in range(self.p + 1)],
            axis=-1,
        )
        return np.sum(legendre_coeffs * vander, axis=-1)

    def shape_coefficients(self, z) -> np.ndarray:
        """Legendre coefficients (in xi) of f(z, xi), vectorised over z."""
        z = np.asarray(z)
        return (z[..., None] ** np.arange(self.p + 1)) @ self.f_matrix.T


@lru_cache(maxsize=None)
def _build_fg(p: int) -> FGPair:
    r = radau_right(p)
    s = (-1.0) ** (p + 1) / 2.0
    f = np.zeros((p + 1, p + 1))
    g = np.zeros(p + 2)
    g[p + 1] = 1.0
    for k in range(1, p + 2):
        dk = r.deriv(k)
        j = p + 1 - k
        f[:, j] = s * 2.0**k * dk.padded(p + 1)
        g[j] += s * 2.0**k * dk(-1.0)
    f.setflags(write=False)
    return FGPair(p=p, g=PolyCoeffs(Basis.MONOMIAL, g), f_matrix=f)


def build_fg(p: int) -> FGPair:
    _check_p(p)
    return _build_fg(p)


def pade_defect(p: int, terms: int) -> np.ndarray:
    """Taylor coefficients of g(z) e^z - f(z, 1) for orders 0..terms-1.

    The first 2p+2 entries vanish (up to rounding); entry 2p+2 does not.
    """
    if terms < 2 * p + 4:
        raise ValueError(f"need at least {2 * p + 4} terms for p={p}")
    fg = build_fg(p)
    series = np.convolve(fg.g.coeffs, exp_series(terms))[:terms]
    fd = fg.f_downwind
    series[: fd.size] -= fd
    return series


def nonphysical_roots(p: int) -> np.ndarray:
    """The p nonzero roots mu_m of g(z) - f(z, 1), sorted by real part."""
    fg = build_fg(p)
    diff = fg.g.coeffs.copy()
    diff[: p + 1] -= fg.f_downwind
    # z = 0 is a simple root; drop the (rounding-level) constant term and divide by z
    roots = durand_kerner(diff[1:])
    return roots[np.lexsort((roots.imag, roots.real))]


def mu_min(p: int) -> float:
    """Smallest real part among the non-physical roots."""
    return float(nonphysical_roots(p).real.min())
