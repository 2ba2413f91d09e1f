import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dgsc.dg_core import DgState, Mesh, RunConfig, jumps, resolve_time, rk4_step, run, semidiscrete_rhs
from dgsc.errors import SolverAbort
from dgsc.fourier import frequencies, mode_vector, wavenumber
from dgsc.polynomials import legendre_vandermonde, radau_right
from dgsc.projections import InitialCondition, project_l2


def perturbed_mesh(n, rng, spread=0.3):
    h = 1.0 + rng.uniform(-spread, spread, n)
    x = np.concatenate([[0.0], np.cumsum(h)])
    return Mesh(-1.0 + 2.0 * x / x[-1])


def random_state(p, n, rng):
    return DgState(p, rng.standard_normal((n, p + 1)))


def energy_rate(state, mesh, a):
    k = np.arange(state.p + 1)
    rhs = semidiscrete_rhs(state, mesh, a)
    return float(np.sum(mesh.h[:, None] * (2.0 / (2 * k + 1)) * 2 * state.coeffs * rhs))


MESHES = ["uniform", "perturbed"]


def make_mesh(kind, n, seed=0):
    if kind == "uniform":
        return Mesh.uniform(n)
    return perturbed_mesh(n, np.random.default_rng(seed))


# --- mesh and state -----------------------------------------------------------


def test_mesh_basics():
    m = Mesh.uniform(4, -1.0, 1.0)
    assert m.n_cells == 4
    assert np.allclose(m.h, 0.5)
    assert m.is_uniform()
    assert np.allclose(m.physical([-1.0, 1.0]), np.c_[m.left, m.boundaries[1:]])
    assert not perturbed_mesh(8, np.random.default_rng(1)).is_uniform()


def test_mesh_uniform_predicate_threshold():
    x = np.linspace(0, 1, 5)
    assert Mesh(x).is_uniform()
    y = x.copy()
    y[2] += 1e-10
    assert not Mesh(y).is_uniform()


@pytest.mark.parametrize("bounds", [[0.0, 1.0], [0.0, 1.0, 0.5, 2.0], [0.0, 0.0, 1.0]])
def test_mesh_rejects_bad_boundaries(bounds):
    with pytest.raises(ValueError):
        Mesh(np.array(bounds))


def test_state_shape_checked():
    with pytest.raises(ValueError):
        DgState(2, np.zeros((4, 2)))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.integers(2, 12), st.integers(0, 2**31 - 1))
def test_downwind_matches_evaluation(p, n, seed):
    state = random_state(p, n, np.random.default_rng(seed))
    assert np.allclose(state.evaluate([1.0])[:, 0], state.downwind(), atol=1e-13, rtol=0)
    assert np.allclose(state.evaluate([-1.0])[:, 0], state.upwind(), atol=1e-13, rtol=0)


# --- semi-discrete operator --------------------------------------------------


def test_constant_state_has_zero_rhs():
    c = np.zeros((6, 3))
    c[:, 0] = 5.0
    assert np.all(semidiscrete_rhs(DgState(2, c), Mesh.uniform(6), 1.3) == 0.0)


def test_two_cell_example_by_hand():
    a = 0.7
    mesh = Mesh.uniform(2, 0.0, 1.0)
    h = 0.5
    c = np.zeros((2, 2))
    c[0, 0] = 1.0
    assert np.allclose(jumps(c), [1.0, -1.0])
    rhs = semidiscrete_rhs(DgState(1, c), mesh, a)
    expected = np.array([[-a / h, 3 * a / h], [a / h, -3 * a / h]])
    assert np.allclose(rhs, expected, atol=1e-15)


def test_dimension_mismatch_rejected():
    with pytest.raises(ValueError):
        semidiscrete_rhs(DgState(1, np.zeros((3, 2))), Mesh.uniform(4), 1.0)


@pytest.mark.parametrize("p", [1, 2, 3])
def test_jumps_small_rhs_order_one(p):
    ic = InitialCondition.sine(1)
    jump_max, rhs_max = [], []
    ns = [16, 32, 64, 128]
    for n in ns:
        mesh = Mesh.uniform(n)
        state = project_l2(ic, mesh, p)
        jump_max.append(np.max(np.abs(jumps(state.coeffs))))
        rhs_max.append(np.max(np.abs(semidiscrete_rhs(state, mesh, 1.0)[:, 0])))
    slope = np.polyfit(np.log(ns), np.log(jump_max), 1)[0]
    assert slope <= -(p + 1) + 0.2
    # the cell-average rate d c_j0/dt approximates -u_x, which is O(1)
    assert max(rhs_max) / min(rhs_max) < 1.1
    assert min(rhs_max) > 1.0


@pytest.mark.parametrize("kind", MESHES)
@pytest.mark.parametrize("p", [1, 2, 3, 4, 5, 6])
def test_rhs_conserves_integral(kind, p):
    rng = np.random.default_rng(p)
    mesh = make_mesh(kind, 11, seed=p)
    state = random_state(p, mesh.n_cells, rng)
    rhs = semidiscrete_rhs(state, mesh, 1.0)
    scale = np.sum(np.abs(mesh.h[:, None] * rhs))
    assert abs(np.sum(mesh.h * rhs[:, 0])) <= 1e-14 * scale


@pytest.mark.parametrize("kind", MESHES)
def test_energy_dissipation_random_states(kind):
    rng = np.random.default_rng(42)
    for trial in range(100):
        p = int(rng.integers(1, 7))
        n = int(rng.integers(2, 20))
        mesh = make_mesh(kind, n, seed=trial)
        state = random_state(p, n, rng)
        rate = energy_rate(state, mesh, float(rng.uniform(0.1, 3)))
        assert rate <= 1e-10 * np.sum(state.coeffs**2) / mesh.h.min()


def test_energy_rate_is_jump_dissipation():
    # with E = sum_j h_j int U_j^2 dxi the upwind flux gives dE/dt = -2a sum_j [[U_j]]^2
    rng = np.random.default_rng(3)
    mesh = perturbed_mesh(9, rng)
    state = random_state(3, 9, rng)
    a = 1.7
    assert energy_rate(state, mesh, a) == pytest.approx(-2 * a * np.sum(jumps(state.coeffs) ** 2), rel=1e-12)


def exact_pde_residual(state, mesh, a):
    """Legendre coefficients of U_t + (2a/h) U_xi - (-1)^{p+1} (a/h) [[U]] R'."""
    p = state.p
    ut = semidiscrete_rhs(state, mesh, a)
    der = np.zeros_like(state.coeffs)
    der[:, :p] = np.polynomial.legendre.legder(state.coeffs.T).T
    rprime = radau_right(p).deriv().padded(p + 1)
    jump = jumps(state.coeffs)
    scale = (a / mesh.h)[:, None]
    return ut + 2 * scale * der - (-1) ** (p + 1) * scale * jump[:, None] * rprime[None, :]


@pytest.mark.parametrize("kind", MESHES)
@pytest.mark.parametrize("p", [1, 2, 3, 4, 5, 6])
def test_exact_pde_residual(kind, p):
    rng = np.random.default_rng(100 + p)
    mesh = make_mesh(kind, 13, seed=p)
    state = random_state(p, 13, rng)
    res = exact_pde_residual(state, mesh, 1.0)
    assert np.max(np.abs(res)) <= 1e-11 * max(1.0, np.max(np.abs(semidiscrete_rhs(state, mesh, 1.0))))


def test_exact_pde_residual_along_trajectory():
    mesh = Mesh.uniform(16)
    cfg = RunConfig(p=2, n_cells=16, t_final=0.3)
    states = []
    run(cfg, project_l2(InitialCondition.sine(2), mesh, 2), mesh, callback=lambda k, s: states.append(s))
    for s in states[:: max(1, len(states) // 10)]:
        assert np.max(np.abs(exact_pde_residual(s, mesh, 1.0))) <= 1e-11


# --- time stepping -----------------------------------------------------------------


def test_rk4_constant_unchanged():
    c = np.zeros((5, 2))
    c[:, 0] = 2.5
    out = rk4_step(DgState(1, c), Mesh.uniform(5), 1.0, 0.01)
    assert np.array_equal(out.coeffs, c)
    assert out.time == pytest.approx(0.01)


def test_rk4_rejects_bad_dt():
    with pytest.raises(ValueError):
        rk4_step(DgState(1, np.zeros((3, 2))), Mesh.uniform(3), 1.0, 0.0)


@pytest.mark.parametrize("p", [1, 2, 3])
def test_rk4_amplifies_eigenmode(p):
    n, a, dt = 16, 1.0, 0.004
    mesh = Mesh.uniform(n)
    fset = frequencies(p, float(mesh.h[0]), wavenumber(3, mesh.length), 3)
    for omega in fset.roots:
        v = mode_vector(p, mesh, fset.kappa, omega)
        lam = -a * omega * dt
        amp = 1 + lam + lam**2 / 2 + lam**3 / 6 + lam**4 / 24
        out = rk4_step(DgState(p, v), mesh, a, dt).coeffs
        assert np.max(np.abs(out - amp * v)) <= 1e-12 * np.max(np.abs(v))


def test_rk4_local_order():
    mesh = Mesh.uniform(16)
    state = project_l2(InitialCondition.sine(1), mesh, 1)
    dts = np.array([1e-2, 5e-3, 2.5e-3, 1.25e-3])
    diffs = []
    for dt in dts:
        full = rk4_step(state, mesh, 1.0, dt).coeffs
        half = rk4_step(rk4_step(state, mesh, 1.0, dt / 2), mesh, 1.0, dt / 2).coeffs
        diffs.append(np.max(np.abs(full - half)))
    slope = np.polyfit(np.log(dts), np.log(diffs), 1)[0]
    assert slope == pytest.approx(5.0, abs=0.3)


@pytest.mark.parametrize("kind", MESHES)
def test_rk4_conserves_integral_per_step(kind):
    rng = np.random.default_rng(7)
    mesh = make_mesh(kind, 20, seed=7)
    state = random_state(2, 20, rng)
    state = DgState(2, state.coeffs + np.c_[np.full(20, 3.0), np.zeros((20, 2))])
    total = state.cell_integrals(mesh)
    for _ in range(50):
        state = rk4_step(state, mesh, 1.0, 0.2 * mesh.h.min() / 5)
        now = state.cell_integrals(mesh)
        assert abs(now - total) <= 1e-13 * abs(total)
        total = now


# --- run driver --------------------------------------------------------------------


def test_resolve_time():
    assert resolve_time("4h", 0.5) == 2.0
    assert resolve_time("35*h", 0.1) == pytest.approx(3.5)
    assert resolve_time("h", 0.25) == 0.25
    assert resolve_time(1.5, 0.1) == 1.5
    assert resolve_time("2.0", 0.1) == 2.0


@pytest.mark.parametrize(
    "kwargs",
    [dict(p=0, n_cells=4), dict(p=1, n_cells=1), dict(p=1, n_cells=4, a=-1.0), dict(p=1, n_cells=4, cfl_numerator=0.0), dict(p=1, n_cells=4, cfl_numerator=1.5)],
)
def test_run_config_validation(kwargs):
    with pytest.raises(ValueError):
        RunConfig(**kwargs)


def test_negative_final_time_rejected():
    with pytest.raises(ValueError):
        RunConfig(p=1, n_cells=4, t_final=-1.0).final_time()


def test_time_step_formula():
    cfg = RunConfig(p=2, n_cells=32, a=2.0, cfl_numerator=0.15)
    assert cfg.time_step(cfg.mesh()) == pytest.approx(0.15 / 5 * (2 / 32) / 2.0)


def test_zero_final_time_returns_initial():
    cfg = RunConfig(p=1, n_cells=8, t_final=0.0)
    mesh = cfg.mesh()
    init = project_l2(InitialCondition.sine(1), mesh, 1)
    out = run(cfg, init, mesh)
    assert np.array_equal(out.coeffs, init.coeffs)
    assert out.time == 0.0


def test_final_time_hit_exactly():
    cfg = RunConfig(p=1, n_cells=8, t_final=0.1234)
    mesh = cfg.mesh()
    seen = []
    out = run(cfg, project_l2(InitialCondition.sine(1), mesh, 1), mesh, callback=lambda k, s: seen.append((k, s.time)))
    dt = cfg.time_step(mesh)
    assert out.time == 0.1234
    assert seen[0] == (0, 0.0)
    assert len(seen) == math.ceil(0.1234 / dt) + 1
    steps = np.diff([t for _, t in seen])
    assert np.allclose(steps[:-1], dt) and 0 < steps[-1] <= dt + 1e-15


def test_run_rejects_mismatched_state():
    cfg = RunConfig(p=2, n_cells=8, t_final=0.1)
    with pytest.raises(ValueError):
        run(cfg, DgState(1, np.zeros((8, 2))))


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_non_finite_state_aborts_with_step():
    cfg = RunConfig(p=1, n_cells=8, t_final=0.2)
    c = np.zeros((8, 2))
    c[3, 1] = np.inf
    with pytest.raises(SolverAbort) as info:
        run(cfg, DgState(1, c))
    assert info.value.step == 1


def test_full_period_returns_near_initial():
    cfg = RunConfig(p=2, n_cells=32, t_final=2.0)
    mesh = cfg.mesh()
    init = project_l2(InitialCondition.sine(1), mesh, 2)
    out = run(cfg, init, mesh)
    assert np.max(np.abs(out.coeffs - init.coeffs)) < 1e-4


@pytest.mark.parametrize("p", [1, 2])
def test_nonuniform_mesh_converges(p):
    ic = InitialCondition.sine(1)
    errs = []
    ns = [16, 32, 64]
    for n in ns:
        mesh = perturbed_mesh(n, np.random.default_rng(n))
        cfg = RunConfig(p=p, n_cells=n, t_final=0.25)
        out = run(cfg, project_l2(ic, mesh, p), mesh)
        x = mesh.physical(np.linspace(-1, 1, 7))
        errs.append(np.max(np.abs(out.evaluate(np.linspace(-1, 1, 7)) - ic.exact(x, out.time))))
    slope = -np.polyfit(np.log(ns), np.log(errs), 1)[0]
    assert slope >= p + 1 - 0.3


def test_vandermonde_orientation():
    v = legendre_vandermonde([0.5, 1.0], 2)
    assert v.shape == (2, 3)
    assert np.allclose(v[1], 1.0)
