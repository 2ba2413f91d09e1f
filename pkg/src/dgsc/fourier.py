"""Numerical frequencies of the DG scheme and their verification.

On a uniform periodic mesh every polynomial Fourier solution has the form
U_j(xi, t) = e^{kappa_n x_j} * f(omega h, xi)/g(omega h) * e^{-a omega t},
with omega a root of g(omega h) e^{kappa_n h} - f(omega h, 1) = 0 and
kappa_n = 2 pi i n / L. One root per kappa_n tracks kappa_n (physical); the
other p sit near mu_m / h and are damped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as nppoly

from dgsc.dg_core import DgState, Mesh, semidiscrete_rhs
from dgsc.errors import DgscError, PoleError
from dgsc.pade import build_fg, mu_min, pade_defect
from dgsc.polynomials import durand_kerner

POLE_TOL = 1e-12
TIE_TOL = 1e-6


@dataclass(frozen=True)
class FrequencySet:
    n: int
    kappa: complex
    h: float
    roots: np.ndarray
    physical_index: int
    physical_offset: complex | None = None

    @property
    def physical(self) -> complex:
        return complex(self.roots[self.physical_index])

    @property
    def physical_error(self) -> float:
        """|omega_0 - kappa|, from the cancellation-free offset when available."""
        if self.physical_offset is not None:
            return abs(self.physical_offset)
        return abs(self.physical - self.kappa)

    @property
    def nonphysical(self) -> np.ndarray:
        return np.delete(self.roots, self.physical_index)


def wavenumber(n: int, length: float) -> complex:
    return 2j * math.pi * n / length


def _physical_offset(p: int, h: float, kappa: complex, maxiter: int = 8) -> complex | None:
    """omega_0 - kappa without cancellation, for |kappa h| <= 1.

    At z = kappa h the root polynomial Q(z) = e^{kappa h} g(z) - f(z, 1)
    equals g(z) e^z - f(z, 1), whose Taylor series starts at z^{2p+2}; summing
    that series gives Q(kappa h) accurately, and Newton on the shifted
    polynomial Q(kappa h + delta) then resolves delta to full relative precision.
    """
    z = complex(kappa) * h
    if abs(z) > 1.0:
        return None
    fg = build_fg(p)
    terms = 2 * p + 40
    tail = pade_defect(p, terms)[2 * p + 2 :]
    q0 = complex(np.sum(tail * z ** np.arange(2 * p + 2, terms)))
    poly = np.exp(z) * fg.g.coeffs.astype(complex)
    poly[: p + 1] -= fg.f_downwind
    shifted = [q0]
    deriv = poly
    for k in range(1, poly.size):
        deriv = nppoly.polyder(deriv)
        shifted.append(nppoly.polyval(z, deriv) / math.factorial(k))
    shifted = np.array(shifted)
    dshifted = nppoly.polyder(shifted)
    delta = 0j
    for _ in range(maxiter):
        step = nppoly.polyval(delta, shifted) / nppoly.polyval(delta, dshifted)
        delta -= step
        if abs(step) <= 1e-15 * abs(delta):
            break
    return delta / h


def frequencies(p: int, h: float, kappa: complex, n: int = -1) -> FrequencySet:
    """All p+1 numerical frequencies for wavenumber ``kappa`` on cells of size h."""
    if h <= 0:
        raise ValueError("cell size must be positive")
    fg = build_fg(p)
    shift = np.exp(kappa * h)
    poly = shift * fg.g.coeffs.astype(complex)
    poly[: p + 1] -= fg.f_downwind
    z = durand_kerner(poly)
    roots = z / h
    dist = np.abs(roots - kappa)
    order = np.argsort(dist)
    if abs(roots[order[0]] - roots[order[1]]) < TIE_TOL:
        raise DgscError(f"physical root is ambiguous for kappa={kappa}, h={h}")
    phys = int(order[0])
    offset = _physical_offset(p, h, kappa)
    if offset is not None and abs(offset) * h < 1e-3:
        roots[phys] = kappa + offset
    else:
        offset = None
    return FrequencySet(
        n=n, kappa=complex(kappa), h=float(h), roots=roots, physical_index=phys, physical_offset=offset
    )


def spectrum(p: int, mesh: Mesh) -> list[FrequencySet]:
    """Frequency sets for n = 0..N-1 on a uniform mesh."""
    if not mesh.is_uniform():
        raise ValueError("the frequency condition needs a uniform mesh")
    h = float(mesh.h[0])
    return [frequencies(p, h, wavenumber(n, mesh.length), n) for n in range(mesh.n_cells)]


def mode_coefficients(p: int, h: float, omega: complex) -> np.ndarray:
    """Legendre coefficients of f(omega h, xi) / g(omega h)."""
    fg = build_fg(p)
    z = complex(omega) * h
    gz = nppoly.polyval(z, fg.g.coeffs)
    if abs(gz) < POLE_TOL:
        raise PoleError(f"g(omega h) vanishes at omega h = {z}")
    return fg.shape_coefficients(z) / gz


def mode_vector(p: int, mesh: Mesh, kappa: complex, omega: complex) -> np.ndarray:
    """Global coefficients e^{kappa x_j} * mode_coefficients(omega), shape (N, p+1)."""
    h = float(mesh.h[0])
    return np.exp(kappa * mesh.left)[:, None] * mode_coefficients(p, h, omega)[None, :]


def operator_residual(p: int, mesh: Mesh, a: float, fset: FrequencySet) -> np.ndarray:
    """||RHS(v) + a omega v||_inf / ||v||_inf for the mode v of every root."""
    if not mesh.is_uniform():
        raise ValueError("mode construction needs a uniform mesh")
    out = []
    for omega in fset.roots:
        v = mode_vector(p, mesh, fset.kappa, omega)
        r = semidiscrete_rhs(DgState(p, v), mesh, a) + a * omega * v
        out.append(float(np.max(np.abs(r)) / np.max(np.abs(v))))
    return np.array(out)


def product_condition_residual(p: int, mesh: Mesh, omega: complex) -> complex:
    """prod_j f(omega h_j, 1) / g(omega h_j) - 1 (zero for an admissible omega)."""
    fg = build_fg(p)
    z = complex(omega) * mesh.h
    gz = nppoly.polyval(z, fg.g.coeffs)
    if np.any(np.abs(gz) < POLE_TOL):
        raise PoleError("g(omega h_j) vanishes on some cell")
    ratios = nppoly.polyval(z, fg.f_downwind) / gz
    return complex(np.prod(ratios) - 1.0)


def damping_time(p: int, h: float, a: float = 1.0) -> float:
    """(2p+1) h |log h| / (a mu_min): time for the slowest non-physical mode
    to decay to the O(h^{2p+1}) level."""
    return (2 * p + 1) * h * abs(math.log(h)) / (a * mu_min(p))
