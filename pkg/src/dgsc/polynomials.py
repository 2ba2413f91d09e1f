"""Legendre and right-Radau polynomial algebra on the canonical element [-1, 1].

Coefficient arithmetic (basis changes, derivatives, antiderivatives) is done
exactly on coefficient vectors; quadrature is only used for integrals against
non-polynomial data elsewhere in the package.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
from numpy.polynomial import legendre as npleg
from numpy.polynomial import polynomial as nppoly

from dgsc.errors import ConvergenceError

MAX_DEGREE = 6
EXACT_CONVERSION_DEGREE = 24


class Basis(enum.Enum):
    MONOMIAL = "monomial"
    LEGENDRE = "legendre"


@lru_cache(maxsize=None)
def _legendre_to_monomial_table(n: int) -> tuple[tuple[Fraction, ...], ...]:
    """Row k: exact monomial coefficients of P_k, for k < n."""
    rows = [[Fraction(1)], [Fraction(0), Fraction(1)]]
    for k in range(1, n - 1):
        # (k+1) P_{k+1} = (2k+1) x P_k - k P_{k-1}
        nxt = [Fraction(0)] * (k + 2)
        for i, c in enumerate(rows[k]):
            nxt[i + 1] += Fraction(2 * k + 1, k + 1) * c
        for i, c in enumerate(rows[k - 1]):
            nxt[i] -= Fraction(k, k + 1) * c
        rows.append(nxt)
    return tuple(tuple(r) for r in rows[:n])


@lru_cache(maxsize=None)
def _monomial_to_legendre_table(n: int) -> tuple[tuple[Fraction, ...], ...]:
    """Row m: exact Legendre coefficients of x^m, by back substitution."""
    leg = _legendre_to_monomial_table(n)
    rows: list[list[Fraction]] = []
    for m in range(n):
        rest = [Fraction(0)] * (m + 1)
        rest[m] = Fraction(1)
        out = [Fraction(0)] * (m + 1)
        for k in range(m, -1, -1):
            c = rest[k] / leg[k][k]
            out[k] = c
            for i in range(k + 1):
                rest[i] -= c * leg[k][i]
        rows.append(out)
    return tuple(tuple(r) for r in rows)


def _convert(coeffs: np.ndarray, table) -> np.ndarray:
    """Apply an exact change-of-basis table; the result is correctly rounded."""
    n = coeffs.size
    out = [Fraction(0)] * n
    for k, c in enumerate(coeffs):
        if c:
            fc = Fraction(float(c))
            for i, t in enumerate(table[k]):
                out[i] += t * fc
    return np.array([float(v) for v in out])


def _change_basis(coeffs: np.ndarray, to_monomial: bool) -> np.ndarray:
    n = coeffs.size
    if n > EXACT_CONVERSION_DEGREE + 1:
        return npleg.leg2poly(coeffs) if to_monomial else npleg.poly2leg(coeffs)
    table = _legendre_to_monomial_table(n) if to_monomial else _monomial_to_legendre_table(n)
    if np.iscomplexobj(coeffs):
        return _convert(coeffs.real, table) + 1j * _convert(coeffs.imag, table)
    return _convert(coeffs, table)


@dataclass(frozen=True, eq=False)
class PolyCoeffs:
    """Dense coefficients of a univariate polynomial.

    ``coeffs[i]`` multiplies ``x**i`` (monomial basis) or ``P_i`` (Legendre
    basis). Trailing zeros are stripped on construction so that ``degree`` is
    meaningful; the zero polynomial keeps a single zero coefficient.
    """

    basis: Basis
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs))
        if not np.iscomplexobj(c):
            c = c.astype(float)
        nz = np.flatnonzero(c)
        c = c[: nz[-1] + 1] if nz.size else c[:1] * 0
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def __eq__(self, other):
        if not isinstance(other, PolyCoeffs):
            return NotImplemented
        return self.basis is other.basis and np.array_equal(self.coeffs, other.coeffs)

    __hash__ = None

    @property
    def degree(self) -> int:
        if self.coeffs.size == 1 and self.coeffs[0] == 0:
            return -1
        return self.coeffs.size - 1

    def __call__(self, x):
        if self.basis is Basis.LEGENDRE:
            return npleg.legval(x, self.coeffs)
        return nppoly.polyval(x, self.coeffs)

    def to_monomial(self) -> PolyCoeffs:
        if self.basis is Basis.MONOMIAL:
            return self
        return PolyCoeffs(Basis.MONOMIAL, _change_basis(self.coeffs, True))

    def to_legendre(self) -> PolyCoeffs:
        if self.basis is Basis.LEGENDRE:
            return self
        return PolyCoeffs(Basis.LEGENDRE, _change_basis(self.coeffs, False))

    def deriv(self, m: int = 1) -> PolyCoeffs:
        der = npleg.legder if self.basis is Basis.LEGENDRE else nppoly.polyder
        return PolyCoeffs(self.basis, der(self.coeffs, m) if self.coeffs.size > 1 else [0.0])

    def integ(self, lbnd: float = -1.0) -> PolyCoeffs:
        """Antiderivative vanishing at ``lbnd``."""
        integ = npleg.legint if self.basis is Basis.LEGENDRE else nppoly.polyint
        return PolyCoeffs(self.basis, integ(self.coeffs, 1, lbnd=lbnd))

    def padded(self, n: int) -> np.ndarray:
        """Coefficient vector zero-padded (or checked) to length ``n``."""
        if self.coeffs.size > n:
            raise ValueError(f"polynomial of degree {self.degree} does not fit in {n} coefficients")
        out = np.zeros(n, dtype=self.coeffs.dtype)
        out[: self.coeffs.size] = self.coeffs
        return out


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, values: np.ndarray, axis: int = -1):
        """Apply the rule to samples taken at ``nodes`` along ``axis``."""
        return np.tensordot(values, self.weights, axes=([axis], [0]))


def legendre_eval(k: int, xi):
    """P_k(xi) by the three-term recurrence (P_k(1) = 1 normalization)."""
    if k < 0:
        raise ValueError("Legendre index must be non-negative")
    xi = np.asarray(xi, dtype=float)
    p_prev = np.ones_like(xi)
    if k == 0:
        return p_prev if p_prev.ndim else float(p_prev)
    p = xi.copy()
    for n in range(1, k):
        p_prev, p = p, ((2 * n + 1) * xi * p - n * p_prev) / (n + 1)
    return p if p.ndim else float(p)


def legendre_deriv_eval(k: int, xi):
    """dP_k/dxi via P'_{n+1} = P'_{n-1} + (2n+1) P_n, valid on the closed interval."""
    if k < 0:
        raise ValueError("Legendre index must be non-negative")
    xi = np.asarray(xi, dtype=float)
    d_prev = np.zeros_like(xi)  # P'_0
    if k == 0:
        return d_prev if d_prev.ndim else float(d_prev)
    d = np.ones_like(xi)  # P'_1
    for n in range(1, k):
        d_prev, d = d, d_prev + (2 * n + 1) * legendre_eval(n, xi)
    return d if d.ndim else float(d)


def _check_p(p: int):
    if not 1 <= p <= MAX_DEGREE:
        raise ValueError(f"polynomial degree p must be in 1..{MAX_DEGREE}, got {p}")


def radau_right(p: int) -> PolyCoeffs:
    """The right Radau polynomial P_{p+1} - P_p in the Legendre basis."""
    _check_p(p)
    c = np.zeros(p + 2)
    c[p], c[p + 1] = -1.0, 1.0
    return PolyCoeffs(Basis.LEGENDRE, c)


def radau_antiderivative(p: int, k: int) -> PolyCoeffs:
    """k-fold repeated antiderivative of P_{p+1} - P_p, each with lower limit -1."""
    if k < 0:
        raise ValueError("antiderivative order must be non-negative")
    r = radau_right(p)
    c = npleg.legint(r.coeffs, k, lbnd=-1.0) if k else r.coeffs
    return PolyCoeffs(Basis.LEGENDRE, c)


def _safeguarded_newton(fun, dfun, lo, hi, tol=1e-13, maxiter=100):
    flo = fun(lo)
    x = 0.5 * (lo + hi)
    for _ in range(maxiter):
        fx = fun(x)
        if abs(fx) <= tol:
            return x
        if np.sign(fx) == np.sign(flo):
            lo, flo = x, fx
        else:
            hi = x
        dfx = dfun(x)
        step = x - fx / dfx if dfx != 0 else lo - 1.0
        x = step if lo < step < hi else 0.5 * (lo + hi)
        if hi - lo < 4 * np.finfo(float).eps:
            return x
    raise ConvergenceError(f"Newton/bisection did not converge in {maxiter} iterations")


@lru_cache(maxsize=None)
def _radau_roots(p: int) -> tuple[float, ...]:
    r = radau_right(p)
    dr = r.deriv()
    # R = (xi - 1) q with q having p simple roots in (-1, 1); bracket q on a
    # Chebyshev grid clustered at the ends where Radau roots crowd.
    m = 24 * (p + 1)
    grid = -np.cos(np.pi * np.arange(m + 1) / m)
    grid = grid[grid < 1.0]
    q = lambda x: r(x) / (x - 1.0)
    dq = lambda x: (dr(x) - q(x)) / (x - 1.0)
    vals = q(grid)
    roots = []
    for i in np.flatnonzero(np.sign(vals[:-1]) != np.sign(vals[1:])):
        if vals[i] == 0:
            roots.append(float(grid[i]))
            continue
        roots.append(_safeguarded_newton(q, dq, grid[i], grid[i + 1]))
    if len(roots) != p:
        raise ConvergenceError(f"found {len(roots)} interior Radau roots for p={p}, expected {p}")
    return tuple(sorted(roots)) + (1.0,)


def radau_roots(p: int) -> np.ndarray:
    """Roots of P_{p+1} - P_p in (-1, 1], ascending; the last root is exactly 1."""
    _check_p(p)
    return np.array(_radau_roots(p))


@lru_cache(maxsize=None)
def _gauss(n: int) -> tuple[tuple[float, ...], tuple[float, ...]]:
    i = np.arange(1, n + 1)
    x = np.cos(np.pi * (i - 0.25) / (n + 0.5))
    for _ in range(100):
        dx = legendre_eval(n, x) / legendre_deriv_eval(n, x)
        x = x - dx
        if np.max(np.abs(dx)) < 1e-14:
            x = x - legendre_eval(n, x) / legendre_deriv_eval(n, x)
            break
    else:
        raise ConvergenceError(f"Gauss-Legendre nodes for n={n} did not converge")
    w = 2.0 / ((1.0 - x**2) * legendre_deriv_eval(n, x) ** 2)
    order = np.argsort(x)
    return tuple(x[order]), tuple(w[order])


def gauss_rule(n: int) -> QuadratureRule:
    """n-node Gauss-Legendre rule on [-1, 1], exact through degree 2n - 1."""
    if not 1 <= n <= 64:
        raise ValueError("Gauss rule size must be in 1..64")
    if n == 1:
        return QuadratureRule(np.array([0.0]), np.array([2.0]))
    x, w = _gauss(n)
    return QuadratureRule(np.array(x), np.array(w))


def legendre_vandermonde(xi, p: int) -> np.ndarray:
    """Matrix V[i, k] = P_k(xi[i]) for k = 0..p."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    return np.stack([legendre_eval(k, xi) for k in range(p + 1)], axis=-1)


def exp_series(n: int) -> np.ndarray:
    """Taylor coefficients 1/j! of e^z for j < n."""
    return np.array([1.0 / math.factorial(j) for j in range(n)])


def durand_kerner(coeffs, tol: float = 1e-12, maxiter: int = 500) -> np.ndarray:
    """All complex roots of a polynomial given by ascending monomial coefficients.

    Simultaneous (Weierstrass) iteration from points on a circle of radius
    ``1 + max|a_i / a_n|``, followed by a Newton polish of each root.
    """
    a = np.trim_zeros(np.asarray(coeffs, dtype=complex), "b")
    n = a.size - 1
    if n < 1:
        return np.zeros(0, dtype=complex)
    a = a / a[-1]
    radius = 1.0 + np.max(np.abs(a[:-1]))
    z = radius * np.exp(1j * (2 * np.pi * np.arange(n) / n + 0.4))
    for _ in range(maxiter):
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        delta = nppoly.polyval(z, a) / np.prod(diff, axis=1)
        z = z - delta
        if np.max(np.abs(delta) / np.maximum(1.0, np.abs(z))) < tol:
            break
    else:
        raise ConvergenceError(f"Durand-Kerner did not converge in {maxiter} iterations (degree {n})")
    da = nppoly.polyder(a)
    for _ in range(2):
        d = nppoly.polyval(z, da)
        ok = d != 0
        z[ok] = z[ok] - nppoly.polyval(z[ok], a) / d[ok]
    return z
