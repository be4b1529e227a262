import numpy as np
import pytest

from pfhom import (
    BulkIntegrand,
    Homogeneous,
    InvalidInputError,
    PhaseFieldState,
    PsiFunction,
    SurfaceIntegrand,
    build_cube_grid,
    energy_gradient,
    evaluate_energy,
)

F1 = BulkIntegrand(Homogeneous(1.0))
G1 = SurfaceIntegrand(Homogeneous(1.0))
PSI = PsiFunction(q=2.0)


def _unit_grid(h=1 / 8):
    return build_cube_grid((0, 0), 1.0, (0, 1), h)[0]


def test_affine_state_energy():
    grid = _unit_grid()
    xi = np.array([[1.0, 2.0]])
    state = PhaseFieldState(grid.nodes @ xi.T, np.ones(grid.shape))
    br = evaluate_energy(grid, F1, G1, PSI, 0.1, state)
    assert br.bulk == pytest.approx(5.0, abs=1e-12)
    assert br.surface == 0.0
    assert br.total == br.bulk + br.surface


def test_cracked_state_energy():
    grid = _unit_grid()
    state = PhaseFieldState(np.zeros(grid.shape + (1,)), np.zeros(grid.shape))
    br = evaluate_energy(grid, F1, G1, PSI, 0.1, state)
    assert br.bulk == 0.0
    assert br.surface == pytest.approx(10.0, abs=1e-12)


def test_v_out_of_range_rejected():
    grid = _unit_grid()
    state = PhaseFieldState(np.zeros(grid.shape + (1,)), np.full(grid.shape, 1.5))
    with pytest.raises(InvalidInputError):
        evaluate_energy(grid, F1, G1, PSI, 0.1, state)


def test_surface_sandwich():
    grid = _unit_grid()
    from pfhom import Checkerboard

    g = SurfaceIntegrand(Checkerboard((1.0, 2.0)))
    rng = np.random.default_rng(4)
    state = PhaseFieldState(
        rng.normal(size=grid.shape + (1,)), rng.uniform(0, 1, grid.shape)
    )
    at = evaluate_energy(grid, F1, G1, PSI, 0.1, state).surface
    val = evaluate_energy(grid, F1, g, PSI, 0.1, state).surface
    assert g.c_lo * at - 1e-12 <= val <= g.c_hi * at + 1e-12


def _fd_gradient(grid, f, g, psi, eps, state, step=1e-6):
    gu = np.zeros_like(state.u)
    gv = np.zeros_like(state.v)

    def total(s):
        return evaluate_energy(grid, f, g, psi, eps, s).total

    for idx in np.ndindex(*state.u.shape):
        sp = state.copy()
        sm = state.copy()
        sp.u[idx] += step
        sm.u[idx] -= step
        gu[idx] = (total(sp) - total(sm)) / (2 * step)
    for idx in np.ndindex(*state.v.shape):
        sp = state.copy()
        sm = state.copy()
        sp.v[idx] += step
        sm.v[idx] -= step
        gv[idx] = (total(sp) - total(sm)) / (2 * step)
    return gu, gv


@pytest.mark.parametrize("p", [2.0, 3.0])
def test_gradient_matches_central_differences(p):
    f = BulkIntegrand(Homogeneous(1.5), p=p)
    g = SurfaceIntegrand(Homogeneous(0.7), p=p)
    grid, _ = build_cube_grid((0, 0), 1.0, (0, 1), 1 / 8)
    rng = np.random.default_rng(17)
    state = PhaseFieldState(
        rng.normal(size=grid.shape + (1,)), rng.uniform(0.05, 0.95, grid.shape)
    )
    gu, gv = energy_gradient(grid, f, g, PSI, 0.25, state)
    fu, fv = _fd_gradient(grid, f, g, PSI, 0.25, state)
    scale = max(np.abs(fu).max(), np.abs(fv).max())
    assert np.abs(gu - fu).max() / scale < 1e-5
    assert np.abs(gv - fv).max() / scale < 1e-5


def test_gradient_linear_in_u_for_p2():
    grid = _unit_grid()
    rng = np.random.default_rng(2)
    v = rng.uniform(0, 1, grid.shape)
    u1 = rng.normal(size=grid.shape + (1,))
    u2 = rng.normal(size=grid.shape + (1,))

    def gu_of(u):
        return energy_gradient(grid, F1, G1, PSI, 0.1, PhaseFieldState(u, v))[0]

    lhs = gu_of(u1 + u2)
    rhs = gu_of(u1) + gu_of(u2) - gu_of(np.zeros_like(u1))
    assert np.abs(lhs - rhs).max() < 1e-12


def test_rescaling_identity():
    # bulk of u on Q_rho with coefficient a(.) equals eps^n times the bulk of
    # u_eps(z) = u(eps z)/eps on Q_{rho/eps} with coefficient a(eps .)
    from pfhom import Laminate

    eps = 0.25
    rho = 1.0
    h = 1 / 16
    f_fine = BulkIntegrand(Laminate((1.0, 4.0), direction=(0, 1), period=0.5))
    f_coarse = BulkIntegrand(Laminate((1.0, 4.0), direction=(0, 1), period=0.5 / eps))
    grid1, _ = build_cube_grid((0, 0), rho, (0, 1), h)
    grid2, _ = build_cube_grid((0, 0), rho / eps, (0, 1), h / eps)
    rng = np.random.default_rng(3)
    u1 = np.cos(grid1.nodes @ np.array([3.0, 1.0]))[..., None] + grid1.nodes[..., :1]
    u2 = u1 / eps  # nodes of grid2 are nodes of grid1 / eps
    e1 = evaluate_energy(
        grid1, f_fine, G1, PSI, 1.0, PhaseFieldState(u1, np.ones(grid1.shape))
    ).bulk
    e2 = evaluate_energy(
        grid2, f_coarse, G1, PSI, 1.0, PhaseFieldState(u2, np.ones(grid2.shape))
    ).bulk
    assert abs(e1 - eps**2 * e2) <= 1e-12 * max(1.0, abs(e1))
