"""Modal upwind DG discretisation of u_t + a u_x = 0 on a periodic mesh.

Each cell carries Legendre coefficients c_jk of U_j(xi) = sum_k c_jk P_k(xi).
The semi-discrete system is

    dc_jk/dt = -(2k+1) a/h_j * ( int_{-1}^{1} U_j' P_k dxi + (-1)^k [[U_j]] )

with [[U_j]] = U_j(-1) - U_{j-1}(1). The volume term is exact:
int P_m' P_k dxi = 2 when m > k and m + k is odd, and 0 otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable

import numpy as np

from dgsc.errors import SolverAbort
from dgsc.polynomials import _check_p, legendre_vandermonde

DEFAULT_CFL = 0.15


@dataclass(frozen=True)
class Mesh:
    """Periodic 1-D mesh given by its N+1 cell boundaries."""

    boundaries: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.boundaries, dtype=float)
        if x.ndim != 1 or x.size < 3:
            raise ValueError("a mesh needs at least 2 cells")
        if np.any(np.diff(x) <= 0):
            raise ValueError("mesh boundaries must be strictly increasing")
        x.setflags(write=False)
        object.__setattr__(self, "boundaries", x)

    @classmethod
    def uniform(cls, n: int, x_left: float = -1.0, x_right: float = 1.0) -> Mesh:
        return cls(np.linspace(x_left, x_right, n + 1))

    @property
    def n_cells(self) -> int:
        return self.boundaries.size - 1

    @property
    def h(self) -> np.ndarray:
        return np.diff(self.boundaries)

    @property
    def length(self) -> float:
        return float(self.boundaries[-1] - self.boundaries[0])

    @property
    def left(self) -> np.ndarray:
        return self.boundaries[:-1]

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.boundaries[:-1] + self.boundaries[1:])

    def is_uniform(self) -> bool:
        h = self.h
        return bool(np.max(np.abs(h - h[0])) <= 1e-14 * h[0])

    def physical(self, xi) -> np.ndarray:
        """Map reference points xi to physical points; result is (N, len(xi))."""
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        return self.centers[:, None] + 0.5 * self.h[:, None] * xi[None, :]


@dataclass(frozen=True)
class DgState:
    """Legendre coefficients (N, p+1) at a given time."""

    p: int
    coeffs: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        c = np.asarray(self.coeffs)
        if c.ndim != 2 or c.shape[1] != self.p + 1:
            raise ValueError(f"coefficients must have shape (N, {self.p + 1}), got {c.shape}")
        object.__setattr__(self, "coeffs", c)

    @property
    def n_cells(self) -> int:
        return self.coeffs.shape[0]

    def downwind(self) -> np.ndarray:
        """U_j(1) for every cell."""
        return self.coeffs.sum(axis=1)

    def upwind(self) -> np.ndarray:
        """U_j(-1) for every cell."""
        return self.coeffs @ ((-1.0) ** np.arange(self.p + 1))

    def evaluate(self, xi) -> np.ndarray:
        """U_j(xi) on every cell; result is (N, len(xi))."""
        return self.coeffs @ legendre_vandermonde(xi, self.p).T

    def cell_integrals(self, mesh: Mesh) -> float:
        """Domain integral of the numerical solution, sum_j h_j c_j0."""
        return float(np.sum(mesh.h * self.coeffs[:, 0].real))


@lru_cache(maxsize=None)
def _derivative_matrix(p: int) -> np.ndarray:
    """D[k, m] = (2k+1) * int P_m' P_k dxi."""
    k = np.arange(p + 1)[:, None]
    m = np.arange(p + 1)[None, :]
    d = np.where((m > k) & ((m + k) % 2 == 1), 2.0 * (2 * k + 1), 0.0)
    d.setflags(write=False)
    return d


def jumps(coeffs: np.ndarray) -> np.ndarray:
    """[[U_j]] = U_j(-1) - U_{j-1}(1) with periodic wrap at the first cell."""
    p = coeffs.shape[1] - 1
    return coeffs @ ((-1.0) ** np.arange(p + 1)) - np.roll(coeffs.sum(axis=1), 1)


def _rhs(coeffs: np.ndarray, h: np.ndarray, a: float) -> np.ndarray:
    p = coeffs.shape[1] - 1
    k = np.arange(p + 1)
    lift = (2 * k + 1) * (-1.0) ** k
    scale = (a / h)[:, None]
    return -scale * (coeffs @ _derivative_matrix(p).T + jumps(coeffs)[:, None] * lift)


def semidiscrete_rhs(state: DgState, mesh: Mesh, a: float) -> np.ndarray:
    """dc/dt of the upwind DG scheme; works for real or complex coefficients."""
    if state.n_cells != mesh.n_cells:
        raise ValueError(f"state has {state.n_cells} cells, mesh has {mesh.n_cells}")
    return _rhs(state.coeffs, mesh.h, a)


def _rk4(c: np.ndarray, h: np.ndarray, a: float, dt: float) -> np.ndarray:
    k1 = _rhs(c, h, a)
    k2 = _rhs(c + 0.5 * dt * k1, h, a)
    k3 = _rhs(c + 0.5 * dt * k2, h, a)
    k4 = _rhs(c + dt * k3, h, a)
    return c + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_step(state: DgState, mesh: Mesh, a: float, dt: float) -> DgState:
    if dt <= 0:
        raise ValueError("time step must be positive")
    if state.n_cells != mesh.n_cells:
        raise ValueError(f"state has {state.n_cells} cells, mesh has {mesh.n_cells}")
    return DgState(state.p, _rk4(state.coeffs, mesh.h, a, dt), state.time + dt)


def resolve_time(value: float | str, h: float) -> float:
    """Turn ``1.5`` or ``"4h"`` / ``"35*h"`` into an absolute time on a mesh of size h."""
    if isinstance(value, str):
        text = value.strip().replace(" ", "")
        if text.endswith("h"):
            mult = text[:-1].rstrip("*")
            return (float(mult) if mult else 1.0) * h
        return float(text)
    return float(value)


@dataclass(frozen=True)
class RunConfig:
    p: int
    n_cells: int
    domain: tuple[float, float] = (-1.0, 1.0)
    a: float = 1.0
    cfl_numerator: float = DEFAULT_CFL
    t_final: float | str = 0.0
    projection: str = "l2"
    initial: str = "sine:4"

    def __post_init__(self):
        _check_p(self.p)
        if self.n_cells < 2:
            raise ValueError("need at least 2 cells")
        if self.a <= 0:
            raise ValueError("advection speed must be positive")
        if not 0 < self.cfl_numerator <= 1:
            raise ValueError("cfl_numerator must lie in (0, 1]")
        if self.domain[1] <= self.domain[0]:
            raise ValueError("domain must be a non-empty interval")

    def mesh(self) -> Mesh:
        return Mesh.uniform(self.n_cells, *self.domain)

    def final_time(self, mesh: Mesh | None = None) -> float:
        mesh = mesh or self.mesh()
        t = resolve_time(self.t_final, float(mesh.h.min()))
        if t < 0:
            raise ValueError("t_final must be non-negative")
        return t

    def time_step(self, mesh: Mesh) -> float:
        return self.cfl_numerator / (2 * self.p + 1) * float(mesh.h.min()) / self.a

    def with_n(self, n: int) -> RunConfig:
        return replace(self, n_cells=n)


StepCallback = Callable[[int, DgState], None]


def run(
    config: RunConfig,
    initial: DgState,
    mesh: Mesh | None = None,
    callback: StepCallback | None = None,
) -> DgState:
    """Advance ``initial`` to the configured final time with classical RK4.

    The step is fixed by the CFL number; only the last step is shortened so
    that the final time is hit exactly. ``callback(step, state)`` is invoked
    for the initial state (step 0) and after every step.
    """
    mesh = mesh or config.mesh()
    if initial.p != config.p or initial.n_cells != mesh.n_cells:
        raise ValueError("initial state does not match the run configuration")
    t_end = initial.time + config.final_time(mesh)
    dt = config.time_step(mesh)
    n_steps = max(0, math.ceil((t_end - initial.time) / dt - 1e-9))
    h = mesh.h
    c = np.array(initial.coeffs)
    t = initial.time
    if callback is not None:
        callback(0, initial)
    for step in range(1, n_steps + 1):
        step_dt = dt if step < n_steps else t_end - t
        c = _rk4(c, h, config.a, step_dt)
        t = t_end if step == n_steps else initial.time + step * dt
        if not np.all(np.isfinite(c)):
            raise SolverAbort(f"non-finite state at step {step} (p={config.p}, N={mesh.n_cells})", step)
        if callback is not None:
            callback(step, DgState(config.p, c, t))
    return DgState(config.p, c, t)
