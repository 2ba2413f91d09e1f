"""Initial data and the projections that turn it into a DgState."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable

import numpy as np

from dgsc.dg_core import DgState, Mesh
from dgsc.errors import ProjectionError
from dgsc.polynomials import gauss_rule, legendre_vandermonde


class ICKind(enum.Enum):
    FOURIER_SUM = "fourier_sum"
    CALLABLE = "callable"


@dataclass(frozen=True)
class InitialCondition:
    """u_0 on a periodic domain, either a finite Fourier sum or a callable.

    A Fourier sum is ``sum_n A_n exp(2 pi i n x / L)`` and is evaluated
    analytically, so it is periodic by construction. A callable is evaluated
    as given on the domain; the advected solution wraps ``x - a t`` back into
    ``[x_L, x_R]``, so a callable must itself be periodic for ``t > 0``.
    """

    kind: ICKind
    domain: tuple[float, float] = (-1.0, 1.0)
    modes: tuple[tuple[int, complex], ...] = ()
    func: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        if self.kind is ICKind.FOURIER_SUM:
            table = dict(self.modes)
            for n, amp in table.items():
                if abs(complex(table.get(-n, 0.0)) - np.conj(amp)) > 1e-14 * max(1.0, abs(amp)):
                    raise ValueError(f"Fourier amplitudes are not conjugate-symmetric at n={n}")
        elif self.func is None:
            raise ValueError("a callable initial condition needs func")

    @classmethod
    def fourier(cls, modes, domain=(-1.0, 1.0)) -> InitialCondition:
        return cls(ICKind.FOURIER_SUM, tuple(domain), tuple((int(n), complex(a)) for n, a in modes))

    @classmethod
    def sine(cls, n: int, domain=(-1.0, 1.0), amplitude: float = 1.0) -> InitialCondition:
        """amplitude * sin(2 pi n x / L)."""
        half = amplitude / 2j
        return cls.fourier([(n, half), (-n, -half)], domain)

    @classmethod
    def from_callable(cls, func, domain=(-1.0, 1.0)) -> InitialCondition:
        return cls(ICKind.CALLABLE, tuple(domain), func=func)

    @property
    def length(self) -> float:
        return self.domain[1] - self.domain[0]

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind is ICKind.CALLABLE:
            return np.asarray(self.func(x), dtype=float) * np.ones_like(x)
        out = np.zeros(x.shape, dtype=complex)
        for n, amp in self.modes:
            out += amp * np.exp(2j * np.pi * n * x / self.length)
        return out.real

    def exact(self, x, t: float, a: float = 1.0) -> np.ndarray:
        """Exact solution u_0(x - a t) of the periodic advection problem."""
        s = np.asarray(x, dtype=float) - a * t
        if self.kind is ICKind.CALLABLE:
            lo, hi = self.domain
            outside = (s < lo) | (s > hi)
            s = np.where(outside, lo + np.mod(s - lo, self.length), s)
        return self(s)

    def scaled(self, factor: float) -> InitialCondition:
        if self.kind is ICKind.CALLABLE:
            f = self.func
            return InitialCondition.from_callable(lambda x: factor * f(x), self.domain)
        return InitialCondition.fourier([(n, factor * amp) for n, amp in self.modes], self.domain)


def parse_initial(descriptor: str, domain=(-1.0, 1.0)) -> InitialCondition:
    """Build an initial condition from ``"sine:<n>"`` or ``"cosine:<n>"``.

    ``n`` is the Fourier index on the domain, so ``"sine:4"`` on [-1, 1)
    is sin(4 pi x).
    """
    kind, _, arg = descriptor.partition(":")
    n = int(arg) if arg else 1
    if kind == "sine":
        return InitialCondition.sine(n, domain)
    if kind == "cosine":
        return InitialCondition.fourier([(n, 0.5), (-n, 0.5)], domain)
    raise ValueError(f"unknown initial condition {descriptor!r}; expected 'sine:<n>' or 'cosine:<n>'")


def projection_quadrature(p: int):
    return gauss_rule(p + 6)


def project_l2(ic: InitialCondition, mesh: Mesh, p: int) -> DgState:
    """c_jk = (2k+1)/2 * int u_0(x(xi)) P_k(xi) dxi, with a (p+6)-node Gauss rule."""
    rule = projection_quadrature(p)
    samples = ic(mesh.physical(rule.nodes))  # (N, nq)
    vander = legendre_vandermonde(rule.nodes, p)  # (nq, p+1)
    norm = (2 * np.arange(p + 1) + 1) / 2.0
    return DgState(p, (samples * rule.weights) @ vander * norm)


def project_left_radau(ic: InitialCondition, mesh: Mesh, p: int) -> DgState:
    """L2 moments 0..p-1, last coefficient chosen so that U_j(-1) = u_0(x_j)."""
    if p < 1:
        raise ValueError("left-Radau projection needs p >= 1")
    c = np.array(project_l2(ic, mesh, p).coeffs)
    alt = (-1.0) ** np.arange(p)
    c[:, p] = (-1.0) ** p * (ic(mesh.left) - c[:, :p] @ alt)
    return DgState(p, c)


def project_equidistant_interp(ic: InitialCondition, mesh: Mesh, p: int) -> DgState:
    """Interpolate u_0 at xi_i = -1 + 2i/p, i = 0..p (both endpoints included)."""
    if p < 1:
        raise ValueError("equidistant interpolation needs p >= 1")
    nodes = -1.0 + 2.0 * np.arange(p + 1) / p
    vander = legendre_vandermonde(nodes, p)
    samples = ic(mesh.physical(nodes))
    try:
        c = np.linalg.solve(vander, samples.T).T
    except np.linalg.LinAlgError as exc:
        raise ProjectionError("equidistant interpolation system is singular") from exc
    return DgState(p, c)


PROJECTIONS = {
    "l2": project_l2,
    "left_radau": project_left_radau,
    "equidistant": project_equidistant_interp,
}


def project(kind: str, ic: InitialCondition, mesh: Mesh, p: int) -> DgState:
    try:
        fn = PROJECTIONS[kind]
    except KeyError:
        raise ValueError(f"unknown projection {kind!r}; choose from {sorted(PROJECTIONS)}") from None
    return fn(ic, mesh, p)
