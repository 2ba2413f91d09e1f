"""Error functionals for DG states against the exact advected solution.

All discrete L1 norms weight cell j by h_j / 2, the Jacobian of the map from
[-1, 1] to the cell, so that ``sum_j (h_j/2) int |e| dxi`` is the physical
L1 norm of e. Point, moment and period norms use the same weight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from dgsc.dg_core import DgState, Mesh
from dgsc.polynomials import gauss_rule, legendre_vandermonde, radau_roots
from dgsc.projections import InitialCondition, projection_quadrature


def cell_weights(mesh: Mesh) -> np.ndarray:
    return 0.5 * mesh.h


def _point_error(state: DgState, exact: InitialCondition, mesh: Mesh, xi: float, a: float) -> float:
    u_num = state.evaluate([xi])[:, 0]
    u_ex = exact.exact(mesh.physical([xi])[:, 0], state.time, a)
    return float(np.sum(cell_weights(mesh) * np.abs(u_num - u_ex)))


def downwind_error(state: DgState, exact: InitialCondition, mesh: Mesh, a: float = 1.0) -> float:
    """sum_j (h_j/2) |U_j(1, t) - u(x_{j+1}, t)|."""
    return _point_error(state, exact, mesh, 1.0, a)


def radau_point_error(state: DgState, exact: InitialCondition, mesh: Mesh, a: float = 1.0) -> np.ndarray:
    """Point-error norm at each root of the right Radau polynomial (last root is 1)."""
    return np.array([_point_error(state, exact, mesh, float(r), a) for r in radau_roots(state.p)])


def moment_defects(state: DgState, exact: InitialCondition, mesh: Mesh, a: float = 1.0, rule=None) -> np.ndarray:
    """int (U_j - u_j) P_m dxi for every cell and m = 0..p; shape (N, p+1)."""
    rule = rule or projection_quadrature(state.p)
    vander = legendre_vandermonde(rule.nodes, state.p)
    diff = state.evaluate(rule.nodes) - exact.exact(mesh.physical(rule.nodes), state.time, a)
    return (diff * rule.weights) @ vander


def moment_error(state: DgState, exact: InitialCondition, mesh: Mesh, m: int, a: float = 1.0) -> float:
    """sum_j (h_j/2) |int (U_j - u_j) P_m dxi|; m = 0 is the cell-average error."""
    if not 0 <= m <= state.p:
        raise ValueError(f"moment index must be in 0..{state.p}")
    defects = moment_defects(state, exact, mesh, a)[:, m]
    return float(np.sum(cell_weights(mesh) * np.abs(defects)))


def period_difference(state_a: DgState, state_b: DgState, mesh: Mesh, nodes: int | None = None) -> float:
    """sum_j (h_j/2) int |U_j^A - U_j^B| dxi.

    The integral of the absolute difference is taken with a ``nodes``-point
    Gauss rule, p+1 by default. The integrand is not smooth where the
    difference changes sign, so the value depends on this convention.
    """
    if state_a.p != state_b.p or state_a.n_cells != state_b.n_cells:
        raise ValueError("states must share degree and mesh")
    rule = gauss_rule(nodes or state_a.p + 1)
    diff = np.abs(state_a.evaluate(rule.nodes) - state_b.evaluate(rule.nodes))
    return float(np.sum(cell_weights(mesh) * (diff @ rule.weights)))


def l2_error(state: DgState, exact: InitialCondition, mesh: Mesh, a: float = 1.0) -> float:
    rule = projection_quadrature(state.p)
    diff = state.evaluate(rule.nodes) - exact.exact(mesh.physical(rule.nodes), state.time, a)
    return float(np.sqrt(np.sum(cell_weights(mesh) * (diff**2 @ rule.weights))))


def convergence_rates(sweep: Sequence[tuple[int, float]]) -> list[float | None]:
    """log2(e_i / e_{i+1}) for consecutive sweep points with doubling N.

    A rate is ``None`` when either error is zero, negative or non-finite.
    """
    ns = [n for n, _ in sweep]
    for n0, n1 in zip(ns, ns[1:]):
        if n1 != 2 * n0:
            raise ValueError(f"sweep must double N at every step, got {n0} -> {n1}")
    rates: list[float | None] = []
    for (_, e0), (_, e1) in zip(sweep, sweep[1:]):
        if e0 > 0 and e1 > 0 and math.isfinite(e0) and math.isfinite(e1):
            rates.append(math.log2(e0 / e1))
        else:
            rates.append(None)
    return rates


@dataclass
class ErrorReport:
    n_cells: int
    p: int
    t: float
    downwind: float
    cell_avg: float
    moments: list[float]
    radau_point_errors: list[float]
    period_diff: float | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        values = [self.downwind, self.cell_avg, *self.moments, *self.radau_point_errors]
        if self.period_diff is not None:
            values.append(self.period_diff)
        if any(not (math.isfinite(v) and v >= 0) for v in values):
            raise ValueError("error norms must be finite and non-negative")


def error_report(state: DgState, exact: InitialCondition, mesh: Mesh, a: float = 1.0) -> ErrorReport:
    moments = [moment_error(state, exact, mesh, m, a) for m in range(state.p + 1)]
    return ErrorReport(
        n_cells=mesh.n_cells,
        p=state.p,
        t=state.time,
        downwind=downwind_error(state, exact, mesh, a),
        cell_avg=moments[0],
        moments=moments,
        radau_point_errors=list(radau_point_error(state, exact, mesh, a)),
    )


@dataclass
class DecayAnalysis:
    slope: float
    plateau: float
    decay_end: int
    monotone: bool
    plateau_band: float


def analyse_decay(
    times: np.ndarray,
    errors: np.ndarray,
    skip_fraction: float = 0.05,
    fit_above: float = 3.0,
    plateau_factor: float = 1.5,
) -> DecayAnalysis:
    """Split a downwind-error history into exponential decay and plateau.

    The plateau level is the median error over the second half of the run.
    The decay phase runs from ``skip_fraction`` of the steps until the error
    first drops below ``plateau_factor`` times the plateau; the semi-log slope
    is a least-squares fit over the part of that phase where the error is
    still above ``fit_above`` times the plateau.

    The fit is on log(error) itself, as read off a semi-log plot. On an
    ``A e^{-lambda t} + B`` curve this underestimates lambda slightly, since the
    local slope at the cut-off is lambda (1 - 1/fit_above). Subtracting the
    plateau first is not an option: the transient and the physical error
    interfere, so the error dips below the plateau before settling on it.
    """
    times = np.asarray(times, dtype=float)
    errors = np.asarray(errors, dtype=float)
    n = times.size
    start = int(math.ceil(skip_fraction * (n - 1)))
    plateau = float(np.median(errors[n // 2 :]))
    below = np.flatnonzero(errors[start:] <= plateau_factor * plateau)
    decay_end = start + (int(below[0]) if below.size else n - 1 - start)
    segment = errors[start : decay_end + 1]
    monotone = bool(np.all(np.diff(segment) < 0))
    fit = np.flatnonzero(errors[start : decay_end + 1] >= fit_above * plateau) + start
    if fit.size >= 2:
        slope = float(np.polyfit(times[fit], np.log(errors[fit]), 1)[0])
    else:
        slope = float("nan")
    tail = errors[decay_end:]
    band = float(tail.max() / tail.min()) if tail.size and tail.min() > 0 else float("inf")
    return DecayAnalysis(slope=slope, plateau=plateau, decay_end=decay_end, monotone=monotone, plateau_band=band)
