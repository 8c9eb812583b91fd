import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kgspectral.fourier import (
    SpectralField,
    TransformError,
    analyze,
    homogeneous_sobolev_norm,
    plancherel_l2_norm,
    quadrature_l2_norm,
    random_field,
    sobolev_norm,
    synthesize,
)
from kgspectral.spectral_groups import SU2_CENTRAL, TORUS_D1, TORUS_D2, TORUS_D3, quadrature_grid, su2_character

ALL_GROUPS = [TORUS_D1, TORUS_D2, TORUS_D3, SU2_CENTRAL]


def cos_field(K=2):
    return SpectralField.from_dict(TORUS_D1, K, {(1,): 0.5, (-1,): 0.5})


@pytest.mark.parametrize("group", ALL_GROUPS)
def test_constant_analyzes_to_zero_mode(group):
    g = quadrature_grid(group, 3)
    f = analyze(np.ones(g.size), g, 3)
    expected = np.zeros(len(f.coeffs))
    expected[0] = 1
    np.testing.assert_allclose(f.coeffs, expected, atol=1e-14)
    assert plancherel_l2_norm(f) == pytest.approx(1, abs=1e-14)


def test_cos_coefficients():
    g = quadrature_grid(TORUS_D1, 3)
    f = analyze(np.cos(g.points[:, 0]), g, 3)
    assert f.coeff((1,)) == pytest.approx(0.5, abs=1e-15)
    assert f.coeff((-1,)) == pytest.approx(0.5, abs=1e-15)
    others = [c for m, c in f.as_dict().items() if m not in {(1,), (-1,)}]
    np.testing.assert_allclose(others, 0, atol=1e-15)
    assert plancherel_l2_norm(f) == pytest.approx(1 / np.sqrt(2), abs=1e-15)


def test_synthesize_trivial_fields():
    g = quadrature_grid(TORUS_D2, 2)
    np.testing.assert_array_equal(synthesize(SpectralField.zeros(TORUS_D2, 2), g), 0)
    c = SpectralField.from_dict(TORUS_D2, 2, {(0, 0): 2.5})
    np.testing.assert_allclose(synthesize(c, g), 2.5, atol=1e-15)


def test_su2_synthesis_is_character_sum():
    g = quadrature_grid(SU2_CENTRAL, 3)
    f = SpectralField.from_dict(SU2_CENTRAL, 3, {(1,): 0.25, (3,): -0.1})
    # f = sum_k d_k c_k chi_k
    expected = 2 * 0.25 * su2_character(1, g.points) + 4 * -0.1 * su2_character(3, g.points)
    np.testing.assert_allclose(synthesize(f, g), expected, atol=1e-14)


@pytest.mark.parametrize("group", ALL_GROUPS)
def test_round_trip(group):
    rng = np.random.default_rng(1)
    K = 4 if group is not TORUS_D3 else 3
    g = quadrature_grid(group, K)
    for _ in range(5):
        f = random_field(group, K, rng)
        back = analyze(synthesize(f, g), g, K)
        np.testing.assert_allclose(back.coeffs, f.coeffs, atol=1e-12)


@pytest.mark.parametrize("group", ALL_GROUPS)
def test_plancherel_against_quadrature(group):
    rng = np.random.default_rng(7)
    K = 5 if group is not TORUS_D3 else 3
    g = quadrature_grid(group, K)
    for _ in range(100):
        f = random_field(group, K, rng, decay_exponent=rng.choice([0.0, 1.0, 2.0]))
        spectral = plancherel_l2_norm(f)
        assert abs(spectral - quadrature_l2_norm(synthesize(f, g), g)) <= 1e-12 * spectral


def test_linearity():
    rng = np.random.default_rng(3)
    g = quadrature_grid(TORUS_D2, 3)
    f, h = random_field(TORUS_D2, 3, rng), random_field(TORUS_D2, 3, rng)
    np.testing.assert_allclose(synthesize(2 * f - h, g), 2 * synthesize(f, g) - synthesize(h, g), atol=1e-13)
    a = rng.standard_normal(g.size)
    b = rng.standard_normal(g.size)
    np.testing.assert_allclose(analyze(a + 3 * b, g, 3).coeffs,
                               (analyze(a, g, 3) + 3 * analyze(b, g, 3)).coeffs, atol=1e-14)


def test_realness_enforced_on_analysis():
    rng = np.random.default_rng(4)
    g = quadrature_grid(TORUS_D3, 2)
    f = analyze(rng.standard_normal(g.size), g, 2)
    assert f.hermitian_defect() == 0.0
    s = analyze(rng.standard_normal(quadrature_grid(SU2_CENTRAL, 4).size), quadrature_grid(SU2_CENTRAL, 4), 4)
    assert s.hermitian_defect() == 0.0


def test_non_hermitian_synthesis_rejected():
    f = SpectralField.from_dict(TORUS_D1, 2, {(1,): 1.0})
    with pytest.raises(TransformError, match="imaginary residue"):
        synthesize(f, quadrature_grid(TORUS_D1, 2))


def test_sample_count_mismatch_rejected():
    g = quadrature_grid(TORUS_D1, 2)
    with pytest.raises(TransformError):
        analyze(np.ones(g.size + 1), g, 2)
    with pytest.raises(TransformError):
        synthesize(SpectralField.zeros(TORUS_D2, 2), g)


def test_sobolev_examples():
    f = cos_field()
    assert homogeneous_sobolev_norm(f, 0) == pytest.approx(plancherel_l2_norm(f))
    assert homogeneous_sobolev_norm(f, 1) == pytest.approx(1 / np.sqrt(2))
    assert sobolev_norm(f, 1) == pytest.approx(np.sqrt(2))
    g = SpectralField.from_dict(TORUS_D1, 3, {(2,): 0.5, (-2,): 0.5})
    assert homogeneous_sobolev_norm(g, 1) == pytest.approx(2 / np.sqrt(2))
    assert homogeneous_sobolev_norm(g, 0.5) == pytest.approx(np.sqrt(2) / np.sqrt(2))


def test_sobolev_s1_matches_fd_gradient_torus():
    rng = np.random.default_rng(11)
    K = 3
    f = random_field(TORUS_D2, K, rng)
    spectral = homogeneous_sobolev_norm(f, 1)
    results = []
    for n in (128, 256):
        # periodic central differences of synthesized samples on an n x n grid
        x = 2 * np.pi * np.arange(n) / n
        X, Y = np.meshgrid(x, x, indexing="ij")
        vals = np.zeros_like(X)
        for m, c in f.as_dict().items():
            vals += (c * np.exp(1j * (m[0] * X + m[1] * Y))).real
        h = 2 * np.pi / n
        gx = (np.roll(vals, -1, 0) - np.roll(vals, 1, 0)) / (2 * h)
        gy = (np.roll(vals, -1, 1) - np.roll(vals, 1, 1)) / (2 * h)
        results.append(np.sqrt(np.mean(gx**2 + gy**2)))
    errs = [abs(r - spectral) for r in results]
    assert errs[1] < 1e-3 * spectral
    assert errs[0] / errs[1] == pytest.approx(4, rel=0.1)


def test_sobolev_s1_matches_fd_gradient_su2():
    from scipy.integrate import quad

    f = SpectralField.from_dict(SU2_CENTRAL, 3, {(0,): 0.3, (1,): 0.2, (3,): -0.05})
    func = lambda t: sum(d * c * su2_character(k, t) for k, d, c in [(0, 1, 0.3), (1, 2, 0.2), (3, 4, -0.05)])
    h = 1e-5
    grad_sq = lambda t: ((func(t + h) - func(t - h)) / (2 * h)) ** 2 * 2 / np.pi * np.sin(t) ** 2
    val, _ = quad(grad_sq, 1e-3, np.pi - 1e-3, limit=200)
    assert np.sqrt(val) == pytest.approx(homogeneous_sobolev_norm(f, 1), rel=1e-6)


def test_json_round_trip_is_exact():
    rng = np.random.default_rng(5)
    for group in ALL_GROUPS:
        f = random_field(group, 2, rng) * (1 / 3)
        back = SpectralField.from_json(f.to_json())
        assert back.group == f.group and back.truncation == f.truncation
        np.testing.assert_array_equal(back.coeffs, f.coeffs)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31), st.sampled_from(ALL_GROUPS), st.floats(0.1, 10))
def test_plancherel_homogeneous(seed, group, scale):
    f = random_field(group, 2, np.random.default_rng(seed))
    assert plancherel_l2_norm(f * scale) == pytest.approx(scale * plancherel_l2_norm(f), rel=1e-12)
    assert sobolev_norm(f, 1) >= plancherel_l2_norm(f)
