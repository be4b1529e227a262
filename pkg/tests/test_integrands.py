import json

import numpy as np
import pytest

from pfhom import (
    BulkIntegrand,
    Checkerboard,
    Homogeneous,
    InvalidInputError,
    Laminate,
    PsiFunction,
    RandomCheckerboard,
    SurfaceIntegrand,
    integrand_from_json,
    integrand_to_json,
    validate_classes,
)


def test_bulk_homogeneous_values():
    f = BulkIntegrand(Homogeneous(1.0))
    x = np.zeros((1, 2))
    assert f(x, np.array([[[2.0, 0.0]]]))[0] == 4.0
    assert f(x, np.zeros((1, 1, 2)))[0] == 0.0


def test_bulk_checkerboard_parity():
    f = BulkIntegrand(Checkerboard((1.0, 4.0)))
    # parity 0 cell at (0.25, 0.25) gets the first value
    val = f(np.array([[0.25, 0.25]]), np.array([[[1.0, 0.0]]]))[0]
    assert val == 1.0
    val = f(np.array([[1.25, 0.25]]), np.array([[[1.0, 0.0]]]))[0]
    assert val == 4.0


def test_bulk_rejects_nonfinite():
    f = BulkIntegrand(Homogeneous(1.0))
    with pytest.raises(InvalidInputError):
        f(np.zeros((1, 2)), np.array([[[np.nan, 0.0]]]))


def test_surface_values():
    g = SurfaceIntegrand(Homogeneous(1.0))
    x = np.zeros((1, 2))
    assert g(x, np.array([1.0]), np.zeros((1, 2)))[0] == 0.0
    assert g(x, np.array([0.0]), np.zeros((1, 2)))[0] == 1.0
    g3 = SurfaceIntegrand(Homogeneous(3.0), p=3.0)
    val = g3(x, np.array([0.5]), np.array([[0.5, 0.0]]))[0]
    assert val == pytest.approx(0.75)


def test_psi_power():
    psi = PsiFunction(q=2.0)
    assert psi(np.array([1.0]))[0] == 1.0
    assert psi(np.array([0.0]))[0] == 0.0
    assert psi(np.array([0.5]))[0] == 0.25
    # values outside [0, 1] are clamped
    assert psi(np.array([1.7]))[0] == 1.0
    assert psi(np.array([-0.3]))[0] == 0.0


def test_class_constants_default_to_coefficient_range():
    f = BulkIntegrand(Checkerboard((1.0, 4.0)))
    assert f.c_lo == 1.0 and f.c_hi == 4.0
    assert f.lip == pytest.approx(2.0 * 4.0)


def test_validate_classes_all_pass():
    for integrand in (
        BulkIntegrand(Homogeneous(1.0)),
        BulkIntegrand(Checkerboard((1.0, 4.0))),
        BulkIntegrand(Laminate((1.0, 4.0), direction=(0, 1), period=1.0), p=3.0),
        SurfaceIntegrand(Checkerboard((1.0, 2.0))),
        SurfaceIntegrand(Homogeneous(2.0), p=3.0),
    ):
        report = validate_classes(integrand, sample_count=500, seed=1)
        assert report.all_passed, [c.name for c in report.checks if not c.passed]


def test_validate_classes_flags_bad_upper_constant():
    f = BulkIntegrand(Checkerboard((1.0, 4.0)), c_hi=2.0)
    report = validate_classes(f, sample_count=500, seed=1)
    failing = [c for c in report.checks if not c.passed]
    assert any("upper growth" in c.name for c in failing)


def test_random_checkerboard_stationary_by_construction():
    field = RandomCheckerboard((1.0, 4.0), (0.5, 0.5), master_seed=3, seed=11)
    a = field.values_on([(0, 60), (0, 60)])
    b = field.values_on([(-7, 53), (5, 65)])
    assert (a[:53, 5:] == b[7:, :55]).all()
    # same cell queried twice gives the same draw
    x = np.array([[2.5, 3.5]])
    assert field.coefficient(x) == field.coefficient(x)


def test_random_checkerboard_frequencies():
    field = RandomCheckerboard((1.0, 4.0), (0.25, 0.75), master_seed=0, seed=1)
    vals = field.values_on([(0, 100), (0, 100)])
    freq = (vals == 1.0).mean()
    se = np.sqrt(0.25 * 0.75 / vals.size)
    assert abs(freq - 0.25) <= 3 * se


def test_degenerate_distribution_is_constant():
    field = RandomCheckerboard((2.5,), (1.0,), master_seed=0, seed=9)
    assert (field.values_on([(-5, 5), (-5, 5)]) == 2.5).all()


def test_json_round_trip():
    g = SurfaceIntegrand(Laminate((1.0, 3.0), direction=(0, 1), period=8.0, offset=-2.0))
    doc = integrand_to_json(g)
    g2 = integrand_from_json(doc)
    assert isinstance(g2, SurfaceIntegrand)
    assert json.loads(integrand_to_json(g2)) == json.loads(doc)
    x = np.array([[0.3, 1.7], [0.3, 5.0]])
    assert np.array_equal(
        g.coefficient(x), g2.coefficient(x)
    )
