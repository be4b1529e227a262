"""Fidelity-penalised minimisation and the exact 1D Mumford-Shah oracle."""

import numpy as np
import pytest

from pfhom import (
    FidelityProblem,
    InvalidInputError,
    UnsupportedConfigurationError,
    at_fidelity_minimize,
    build_box_grid,
    fidelity_data_preset,
    load_data_csv,
    ms1d_brute_force,
    ms1d_dp_oracle,
)
from pfhom.errors import ConfigurationError


def _grid_1d(count):
    h = 1.0 / (count - 1)
    grid, _ = build_box_grid((0.5,), (1.0,), (1.0,), h)
    return grid


def test_problem_validation():
    grid = _grid_1d(65)
    data = fidelity_data_preset("step", 65)
    with pytest.raises(InvalidInputError):
        FidelityProblem(grid, data[:-1], eps_list=(0.25,))
    with pytest.raises(InvalidInputError):
        FidelityProblem(grid, data, q=0.5, eps_list=(0.25,))
    with pytest.raises(InvalidInputError):
        FidelityProblem(grid, data, eps_list=(0.125, 0.25))
    with pytest.raises(InvalidInputError):
        FidelityProblem(grid, data, eps_list=())
    with pytest.raises(ConfigurationError):
        FidelityProblem(grid, data, eps_list=(0.05,))


def test_minimize_step_data():
    count = 129
    grid = _grid_1d(count)
    data = fidelity_data_preset("step", count)
    problem = FidelityProblem(grid, data, eps_list=(1.0 / 4, 1.0 / 8, 1.0 / 16))
    results = at_fidelity_minimize(problem)
    assert [r.eps for r in results] == [1.0 / 4, 1.0 / 8, 1.0 / 16]
    values = np.array([r.value for r in results])
    vdevs = np.array([r.v_deviation for r in results])
    assert (values > 0).all()
    # the v = 1 deviation is carried by the transition layers and
    # shrinks with eps
    assert vdevs[2] < vdevs[0]
    assert all(r.converged for r in results)
    # the surface weight exceeds the step's elastic cost, so u is a
    # smoothed monotone transition rather than a broken step
    u = results[-1].state.u[..., 0]
    assert u[-1] - u[0] > 0.05
    assert np.all(np.diff(u) >= -1e-8)


def test_oracle_matches_brute_force():
    rng = np.random.default_rng(5)
    for trial in range(6):
        n = int(rng.integers(4, 13))
        h = rng.normal(size=n) * rng.uniform(0.5, 3.0)
        beta = float(rng.uniform(0.001, 0.5))
        m_dp, jumps_dp, u = ms1d_dp_oracle(h, beta=beta)
        m_bf, jumps_bf = ms1d_brute_force(h, beta=beta)
        assert m_dp == pytest.approx(m_bf, abs=1e-12)
        assert jumps_dp == jumps_bf
        assert u.shape == (n,)


def test_oracle_step_no_jump_for_large_beta():
    # beta = 2 exceeds the unit step's elastic cost, so the minimiser
    # smooths the step instead of breaking a bond
    data = fidelity_data_preset("step", 401)
    value, jumps, u = ms1d_dp_oracle(data, beta=2.0)
    assert jumps == []
    assert value == pytest.approx(0.2318, abs=2e-3)
    assert np.all(np.diff(u) >= -1e-12)


def test_oracle_step_jumps_for_small_beta():
    data = fidelity_data_preset("step", 401)
    value, jumps, _ = ms1d_dp_oracle(data, beta=0.01)
    assert len(jumps) == 1
    assert value == pytest.approx(0.01, abs=1e-6)


def test_oracle_validation():
    with pytest.raises(UnsupportedConfigurationError):
        ms1d_dp_oracle([0.0, 1.0], p=3.0)
    with pytest.raises(UnsupportedConfigurationError):
        ms1d_dp_oracle([0.0, 1.0], q=1.0)
    with pytest.raises(InvalidInputError):
        ms1d_dp_oracle([1.0])
    with pytest.raises(InvalidInputError):
        ms1d_dp_oracle(np.zeros(2001))
    with pytest.raises(InvalidInputError):
        ms1d_dp_oracle([0.0, 1.0], beta=-1.0)
    with pytest.raises(InvalidInputError):
        ms1d_brute_force(np.zeros(15))


def test_data_presets_and_csv(tmp_path):
    step = fidelity_data_preset("step", 11)
    assert step[0] == 0.0 and step[-1] == 1.0
    ramp = fidelity_data_preset("ramp", 11)
    assert ramp[0] == 0.0 and ramp[-1] == 1.0
    two = fidelity_data_preset("two-step", 101)
    assert set(np.unique(two)) == {0.0, 1.0, 2.0}
    with pytest.raises(InvalidInputError):
        fidelity_data_preset("spike", 11)
    path = tmp_path / "data.csv"
    path.write_text("0.0\n0.5\n1.0\n")
    assert np.allclose(load_data_csv(path), [0.0, 0.5, 1.0])
