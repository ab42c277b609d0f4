import numpy as np
import pytest

from sdiffgeo.errors import GridMismatchError
from sdiffgeo.spectral import (
    Dealias,
    GridSpec,
    SpectralField,
    bracket_ps,
    dealias,
    from_grid,
    from_trig,
    hermitian_defect,
    integrate,
    inverse_laplacian_sf,
    laplacian_sf,
    riemann_sum,
    to_grid,
    to_trig,
)
from sdiffgeo.trig import TrigPolynomial, l2_inner, poisson_bracket, random_trig_polynomial

from oracles import direct_dft

C, S = TrigPolynomial.cos, TrigPolynomial.sin


def random_field(rng, grid):
    return from_grid(rng.standard_normal((grid.N, grid.N)), grid)


def test_grid_validation():
    with pytest.raises(ValueError):
        GridSpec(15)
    with pytest.raises(ValueError):
        GridSpec(8)
    assert GridSpec(32, "none").dealias is Dealias.NONE


def test_two_thirds_mask_keeps_a_third():
    g = GridSpec(48)
    kept = g.wavenumbers[g.mask[:, 0]]
    assert kept.max() == 16 and kept.min() == -16


def test_cosine_has_a_single_coefficient_pair():
    g = GridSpec(64)
    X, Y = g.points
    values = np.cos(X)
    f = from_grid(values, g)
    nonzero = np.argwhere(np.abs(f.coeffs) > 1e-14)
    assert sorted(map(tuple, nonzero)) == [(1, 0), (63, 0)]
    assert f.coeff(1, 0) == pytest.approx(0.5, abs=1e-15)
    assert f.coeff(1, 0) == pytest.approx(direct_dft(values, 1, 0), abs=1e-14)


def test_single_mode_round_trip_is_exact():
    g = GridSpec(32)
    c = np.zeros((32, 32), dtype=complex)
    c[3, 5] = 0.25 - 0.5j
    c[-3, -5] = 0.25 + 0.5j
    f = SpectralField(c, g)
    assert np.max(np.abs(from_grid(to_grid(f), g).coeffs - f.coeffs)) < 1e-16


def test_random_round_trip_and_hermitian_symmetry():
    rng = np.random.default_rng(0)
    g = GridSpec(64)
    f = random_field(rng, g)
    assert hermitian_defect(f.coeffs) < 1e-15
    assert np.max(np.abs(from_grid(to_grid(f), g).coeffs - f.coeffs)) < 1e-12


def test_fields_are_zero_mean_and_read_only():
    g = GridSpec(16)
    f = from_grid(np.full((16, 16), 3.0) + np.cos(g.points[0]), g)
    assert f.coeff(0, 0) == 0
    with pytest.raises(ValueError):
        f.coeffs[1, 0] = 1.0


def test_shape_mismatch():
    with pytest.raises(GridMismatchError):
        from_grid(np.zeros((16, 16)), GridSpec(32))
    with pytest.raises(GridMismatchError):
        SpectralField.zeros(GridSpec(16)) + SpectralField.zeros(GridSpec(32))


def test_trig_conversion_round_trip():
    f = C(1, 2, 0.3) + S(-2, 5, 1.5) + C(4, -1)
    g = GridSpec(32)
    assert to_trig(from_trig(f, g)).allclose(f, 1e-15)
    X, Y = g.points
    assert np.max(np.abs(to_grid(from_trig(f, g)) - f.evaluate(X, Y))) < 1e-13


def test_bracket_cos_x_cos_y_matches_symbolic():
    g = GridSpec(32)
    f, h = C(1, 0), C(0, 1)
    ps = bracket_ps(from_trig(f, g), from_trig(h, g))
    assert to_trig(ps).allclose(poisson_bracket(f, h), 1e-14)


def test_bracket_with_itself_vanishes():
    rng = np.random.default_rng(1)
    g = GridSpec(48)
    f = dealias(random_field(rng, g))
    assert bracket_ps(f, f).max_abs_coeff() < 1e-12


def test_random_band_limited_brackets_match_symbolic():
    rng = np.random.default_rng(2)
    g = GridSpec(64)
    W = g.band_limit
    for _ in range(5):
        f = random_trig_polynomial(rng, 8, W)
        h = random_trig_polynomial(rng, 8, W)
        ps = bracket_ps(from_trig(f, g), from_trig(h, g))
        assert to_trig(ps).max_abs_diff(poisson_bracket(f, h)) < 1e-10
        assert hermitian_defect(ps.coeffs) < 1e-15 and ps.coeff(0, 0) == 0


def test_laplacian_of_single_mode():
    g = GridSpec(16)
    lap = laplacian_sf(from_trig(C(1, 2), g))
    assert to_trig(lap).allclose(5 * C(1, 2), 1e-14)
    assert laplacian_sf(SpectralField.zeros(g)).max_abs_coeff() == 0


def test_laplacian_round_trip():
    rng = np.random.default_rng(4)
    g = GridSpec(32)
    f = random_field(rng, g)
    assert np.max(np.abs(laplacian_sf(inverse_laplacian_sf(f)).coeffs - f.coeffs)) < 1e-13


def test_integrate_cosine_norm():
    g = GridSpec(16)
    f = from_trig(C(1, 0), g)
    assert integrate(f, f) == pytest.approx(0.5 * (2 * np.pi) ** 2, rel=1e-14)
    assert integrate(f, from_trig(C(0, 1), g)) == 0.0


def test_integrate_matches_grid_sum_and_symbolic():
    rng = np.random.default_rng(5)
    g = GridSpec(64)
    a, b = random_field(rng, g), random_field(rng, g)
    assert integrate(a, b) == pytest.approx(riemann_sum(to_grid(a) * to_grid(b)), abs=1e-8)
    f, h = random_trig_polynomial(rng, 6, 5), random_trig_polynomial(rng, 6, 5)
    assert integrate(from_trig(f, g), from_trig(h, g)) == pytest.approx(l2_inner(f, h), abs=1e-12)
