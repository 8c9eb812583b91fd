import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kgspectral.spectral_groups import (
    SU2_CENTRAL,
    TORUS_D1,
    TORUS_D2,
    TORUS_D3,
    GroupSpec,
    Mode,
    basis_matrix,
    default_oversample,
    enumerate_modes,
    evaluate_basis,
    mode_table,
    quadrature_grid,
    su2_character,
)

ALL_GROUPS = [TORUS_D1, TORUS_D2, TORUS_D3, SU2_CENTRAL]


def test_dimensions():
    assert [g.topological_dimension for g in ALL_GROUPS] == [1, 2, 3, 3]
    assert SU2_CENTRAL.central_only and not TORUS_D3.central_only


def test_torus_d1_modes():
    modes = enumerate_modes(TORUS_D1, 1)
    assert {m.index for m in modes} == {(-1,), (0,), (1,)}
    assert sorted(m.eigenvalue_sq for m in modes) == [0, 1, 1]
    assert modes[0] == Mode((0,), 0.0, 1)


def test_torus_d2_contains_1_2():
    modes = {m.index: m for m in enumerate_modes(TORUS_D2, 2)}
    assert modes[(1, 2)].eigenvalue_sq == 5
    assert len(modes) == 25


def test_su2_levels():
    modes = enumerate_modes(SU2_CENTRAL, 2)
    assert [m.index for m in modes] == [(0,), (1,), (2,)]
    assert [m.eigenvalue_sq for m in modes] == [0, 3, 8]
    assert [m.rep_dimension for m in modes] == [1, 2, 3]


def radial_laplacian_fd(f, theta, h):
    """(1/sin^2) d/dtheta (sin^2 df/dtheta) for class functions on the unit 3-sphere."""
    s2 = lambda x: np.sin(x) ** 2
    fp = (f(theta + h) - f(theta)) / h
    fm = (f(theta) - f(theta - h)) / h
    return (s2(theta + h / 2) * fp - s2(theta - h / 2) * fm) / (h * s2(theta))


def test_su2_level1_eigenvalue_by_finite_differences():
    theta = np.linspace(0.3, 2.8, 41)
    chi1 = lambda x: np.sin(2 * x) / np.sin(x)
    errs = []
    for h in (1e-2, 5e-3):
        lap = radial_laplacian_fd(chi1, theta, h)
        errs.append(np.max(np.abs(lap + 3 * chi1(theta))))
    assert errs[1] < 1e-4
    assert errs[0] / errs[1] == pytest.approx(4, rel=0.05)


@pytest.mark.parametrize("level", [2, 3, 5])
def test_su2_higher_levels_are_eigenfunctions(level):
    theta = np.linspace(0.4, 2.7, 23)
    f = lambda x: su2_character(level, x)
    lap = radial_laplacian_fd(f, theta, 1e-3)
    np.testing.assert_allclose(lap, -level * (level + 2) * f(theta), atol=1e-3 * (level + 1) ** 3)


def test_torus_eigenfunction_fd_order():
    k = np.array([2, -1, 1])
    x0 = np.array([0.3, 1.1, 2.0])
    f = lambda x: np.exp(1j * x @ k)
    errs = []
    for h in (1e-2, 5e-3, 2.5e-3):
        lap = 0
        for a in range(3):
            e = np.zeros(3)
            e[a] = h
            lap = lap + (f(x0 + e) - 2 * f(x0) + f(x0 - e)) / h**2
        errs.append(abs(lap + (k @ k) * f(x0)))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    np.testing.assert_allclose(orders, 2.0, atol=0.05)


def test_torus_d1_grid_example():
    g = quadrature_grid(TORUS_D1, 2)
    assert g.size >= 8
    np.testing.assert_allclose(g.weights, 1 / g.size)
    np.testing.assert_allclose(g.points[:, 0], 2 * np.pi * np.arange(g.size) / g.size)


@pytest.mark.parametrize("group", ALL_GROUPS)
@pytest.mark.parametrize("K", [0, 1, 3])
def test_weights_sum_to_one(group, K):
    assert abs(np.sum(quadrature_grid(group, K).weights) - 1) < 1e-14


def test_su2_level1_character_norm_against_dense_quadrature():
    from scipy.integrate import quad

    exact, _ = quad(lambda t: (np.sin(2 * t) / np.sin(t)) ** 2 * 2 / np.pi * np.sin(t) ** 2, 0, np.pi,
                    epsabs=1e-14)
    assert exact == pytest.approx(1, abs=1e-12)
    g = quadrature_grid(SU2_CENTRAL, 1)
    chi = su2_character(1, g.points)
    assert g.integrate(chi * chi) == pytest.approx(1, abs=1e-13)


@pytest.mark.parametrize("group", ALL_GROUPS)
@pytest.mark.parametrize("K", [1, 2, 4])
def test_orthonormality(group, K):
    g = quadrature_grid(group, K, oversample=1)
    B = basis_matrix(group, K, g)
    gram = (B.conj() * g.weights[:, None]).T @ B
    np.testing.assert_allclose(gram, np.eye(B.shape[1]), atol=1e-12)


def test_evaluate_basis_examples():
    assert evaluate_basis(TORUS_D1, Mode((0,), 0, 1), [1.234]) == pytest.approx(1)
    assert evaluate_basis(SU2_CENTRAL, Mode((1,), 3, 2), 0.0) == pytest.approx(2)
    assert evaluate_basis(SU2_CENTRAL, Mode((1,), 3, 2), 1e-12) == pytest.approx(2)
    val = evaluate_basis(TORUS_D2, Mode((1, 1), 2, 1), [np.pi, np.pi])
    assert val == pytest.approx(1, abs=1e-15)


def test_character_limits_continuous():
    for k in range(6):
        near = su2_character(k, np.array([1e-9, 1e-6, np.pi - 1e-9]))
        assert near[0] == pytest.approx(k + 1, rel=1e-12)
        assert near[1] == pytest.approx(k + 1, rel=1e-10)
        assert near[2] == pytest.approx((-1) ** k * (k + 1), rel=1e-10)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(ALL_GROUPS), st.integers(0, 6))
def test_modes_sorted_with_unique_zero_mode(group, K):
    table = mode_table(group, K)
    lam = table.eigenvalue_sq
    assert np.sum(lam == 0) == 1 and lam[0] == 0
    keys = [(m.eigenvalue_sq, m.index) for m in table.modes]
    assert keys == sorted(keys)
    if group.is_torus:
        assert len(table) == (2 * K + 1) ** group.torus_rank
        np.testing.assert_array_equal(lam, np.sum(table.indices**2, axis=1))
        assert np.all(table.rep_dimension == 1)
    else:
        assert [m.rep_dimension for m in table.modes] == list(range(1, K + 2))


def test_negative_truncation_rejected():
    with pytest.raises(ValueError):
        enumerate_modes(TORUS_D1, -1)


def test_oversample_policy():
    assert default_oversample(2) == 2
    assert default_oversample(1.5) == 2
    assert default_oversample(3) == 3
    assert default_oversample(2.5) == 3
    assert default_oversample(5) == 3


def test_mode_table_csv_rows():
    rows = list(mode_table(SU2_CENTRAL, 2).to_csv_rows())
    assert rows == [("0", "0.0", 1), ("1", "3.0", 2), ("2", "8.0", 3)]


def test_group_from_name():
    assert GroupSpec.from_name("TorusD2") == TORUS_D2
    with pytest.raises(ValueError):
        GroupSpec.from_name("Torus9")
    assert math.isclose(np.sum(quadrature_grid(SU2_CENTRAL, 0).weights), 1)
