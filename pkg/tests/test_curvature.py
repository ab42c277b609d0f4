import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sdiffgeo import curvature as cv
from sdiffgeo.errors import (
    DegeneratePlaneError,
    IncompleteBasisError,
    NotEigenfunctionError,
    SingularDenominatorError,
)
from sdiffgeo.trig import TrigPolynomial, inverse_laplacian, l2_inner, laplacian, poisson_bracket, random_trig_polynomial

from oracles import fd_bracket, grid, riemann

C, S = TrigPolynomial.cos, TrigPolynomial.sin
V = (2 * np.pi) ** 2
BI_X_Y = 1 / (4 * V)
RIGHT_X_Y = -1 / (2 * V)


# -- bi-invariant ----------------------------------------------------------------------

def test_bi_cos_x_cos_y():
    assert cv.k_bi(C(1, 0), C(0, 1)).K == pytest.approx(BI_X_Y, rel=1e-14)
    assert cv.k_bi_tensor(C(1, 0), C(0, 1)) == pytest.approx(BI_X_Y, rel=1e-14)


def test_bi_commuting_pair_is_zero():
    assert cv.k_bi(C(1, 0), C(2, 0)).K == 0.0


def test_bi_matches_grid_quadrature():
    rng = np.random.default_rng(11)
    N = 256
    X, Y = grid(N)
    f = random_trig_polynomial(rng, 3, 3)
    h = random_trig_polynomial(rng, 3, 3)
    br = fd_bracket(f.evaluate(X, Y), h.evaluate(X, Y), N)
    ff, hh = f.evaluate(X, Y), h.evaluate(X, Y)
    gram = riemann(ff * ff) * riemann(hh * hh) - riemann(ff * hh) ** 2
    assert cv.k_bi(f, h).K == pytest.approx(0.25 * riemann(br * br) / gram, abs=1e-9)


def test_bi_is_invariant_under_basis_change_of_the_plane():
    rng = np.random.default_rng(12)
    f, h = random_trig_polynomial(rng, 4, 3), random_trig_polynomial(rng, 4, 3)
    k = cv.k_bi(f, h).K
    assert cv.k_bi(2 * f - h, 0.5 * h + 3 * f).K == pytest.approx(k, rel=1e-10)
    assert cv.k_bi_tensor(f, h) == pytest.approx(k, rel=1e-10)


def test_degenerate_plane_raises():
    with pytest.raises(DegeneratePlaneError):
        cv.k_bi(C(1, 0), 3 * C(1, 0))
    with pytest.raises(DegeneratePlaneError):
        cv.k_right_general(C(1, 2), -C(1, 2))


# -- covariant derivative --------------------------------------------------------------

def test_nabla_of_eigenfunction_with_itself_vanishes():
    f = C(1, 2) + S(2, 1)
    assert cv.nabla_hamiltonian(f, f).is_zero


def test_nabla_cos_x_cos_y_against_defining_relation():
    f, h = C(1, 0), C(0, 1)
    s = cv.nabla_hamiltonian(f, h)
    rhs = 0.5 * (laplacian(poisson_bracket(f, h)) + poisson_bracket(f, laplacian(h)) + poisson_bracket(h, laplacian(f)))
    assert laplacian(s).max_abs_diff(rhs) < 1e-12
    # for equal eigenvalues the last two terms cancel: S = 1/2 {F, H}
    assert s.max_abs_diff(0.5 * poisson_bracket(f, h)) < 1e-15


def test_diagonal_and_symmetric_identities():
    f, h = C(1, 0) + C(0, 2), S(1, 1)
    s = cv.nabla_hamiltonian(f, f)
    assert laplacian(s).max_abs_diff(poisson_bracket(f, laplacian(f))) < 1e-12
    t = cv.nabla_symmetric(f, h)
    sym = cv.nabla_hamiltonian(f, h) + cv.nabla_hamiltonian(h, f)
    assert t.max_abs_diff(sym) < 1e-12
    assert laplacian(t).max_abs_diff(poisson_bracket(f, laplacian(h)) + poisson_bracket(h, laplacian(f))) < 1e-12


def test_nabla_matches_vector_field_oracle():
    from sdiffgeo.acceptance import covariant_curl_grid

    f, h = C(1, 0) + C(0, 2), S(1, 1) + 0.3 * C(2, -1)
    assert laplacian(cv.nabla_hamiltonian(f, h)).max_abs_diff(covariant_curl_grid(f, h)) < 1e-12


# -- right-invariant general and eigen forms ---------------------------------------------

def test_right_cos_x_cos_y():
    rep = cv.k_right_general(C(1, 0), C(0, 1))
    assert rep.K == pytest.approx(RIGHT_X_Y, rel=1e-14)
    assert rep.formula is cv.Formula.RIGHT_19
    assert set(rep.terms) == {"bracket_energy", "bracket_cross", "self_advection", "symmetric_part"}
    assert cv.k_right_eigen(C(1, 0), C(0, 1)).K == pytest.approx(RIGHT_X_Y, rel=1e-14)


def test_right_equal_eigenvalue_commuting_pair_is_zero():
    assert cv.k_right_eigen(C(1, 0), S(1, 0)).K == 0.0
    assert cv.k_right_general(C(1, 0), S(1, 0)).K == pytest.approx(0.0, abs=1e-18)


def test_right_is_invariant_under_plane_basis_change():
    rng = np.random.default_rng(13)
    f, h = random_trig_polynomial(rng, 4, 3), random_trig_polynomial(rng, 4, 3)
    k = cv.k_right_general(f, h).K
    assert cv.k_right_general(f, h + 0.7 * f).K == pytest.approx(k, rel=1e-10)
    assert cv.k_right_general(3 * h, -f).K == pytest.approx(k, rel=1e-10)


def test_eigen_form_matches_general_on_random_eigenfunctions():
    rng = np.random.default_rng(14)
    done = 0
    while done < 10:
        f, h = cv.random_eigenfunction(rng), cv.random_eigenfunction(rng)
        try:
            ref = cv.k_right_general(f, h).K
        except DegeneratePlaneError:
            continue
        assert cv.k_right_eigen(f, h).K == pytest.approx(ref, rel=1e-12, abs=1e-16)
        done += 1


def test_eigen_form_rejects_non_eigenfunction():
    with pytest.raises(NotEigenfunctionError):
        cv.k_right_eigen(C(1, 0) + C(0, 2), C(1, 1))


def test_right_general_matches_grid_quadrature_of_four_terms():
    # all four integrals evaluated from finite-difference brackets on a grid
    N = 256
    X, Y = grid(N)
    f, h = C(1, 0) + 0.5 * S(0, 2), C(1, 1)
    f_hat, h_hat, _, _ = cv._orthonormalize(f, h, lambda a, b: l2_inner(laplacian(a), b))
    ev = lambda p: p.evaluate(X, Y)  # noqa: E731
    lf, lh = laplacian(f_hat), laplacian(h_hat)
    p = fd_bracket(ev(f_hat), ev(h_hat), N)
    p_sym = poisson_bracket(f_hat, h_hat)
    terms = [
        -0.75 * riemann(ev(laplacian(p_sym)) * p),
        0.5 * riemann(p * (fd_bracket(ev(f_hat), ev(lh), N) + fd_bracket(ev(lf), ev(h_hat), N))),
        -riemann(fd_bracket(ev(f_hat), ev(lf), N) * ev(inverse_laplacian(poisson_bracket(h_hat, lh)))),
    ]
    sym = poisson_bracket(f_hat, lh) + poisson_bracket(h_hat, lf)
    terms.append(0.25 * riemann((fd_bracket(ev(f_hat), ev(lh), N) + fd_bracket(ev(h_hat), ev(lf), N))
                                * ev(inverse_laplacian(sym))))
    assert cv.k_right_general(f, h).K == pytest.approx(sum(terms), abs=1e-9)


# -- structure constants -------------------------------------------------------------------

def test_structure_constants_on_normalized_torus_pair():
    a = math.sqrt(2) / (2 * math.pi)
    rep = cv.k_torus_structure_constants(C(1, 0, a), C(0, 1, a))
    assert rep.K == pytest.approx(RIGHT_X_Y, rel=1e-12)


def test_structure_constants_commuting_pair():
    assert cv.k_from_structure_constants([], 1.0, 1.0).K == 0.0
    assert cv.k_torus_structure_constants(C(1, 0), S(1, 0)).K == 0.0


def test_structure_constants_incomplete_basis():
    expansion = [(2.0, 0.5)]
    with pytest.raises(IncompleteBasisError):
        cv.k_from_structure_constants(expansion, 1.0, 1.0, bracket_norm_sq=1.0)


def test_structure_constants_match_general_on_eigenfunctions():
    rng = np.random.default_rng(15)
    done = 0
    while done < 10:
        f, h = cv.random_eigenfunction(rng), cv.random_eigenfunction(rng)
        try:
            ref = cv.k_right_general(f, h).K
        except DegeneratePlaneError:
            continue
        assert cv.k_torus_structure_constants(f, h).K == pytest.approx(ref, rel=1e-10, abs=1e-16)
        done += 1


# -- closed forms --------------------------------------------------------------------------

def test_mode_pair_parsing():
    p = cv.ModePair.parse("1,2,-2,1")
    assert (p.n, p.m, p.k, p.l) == ((1,), (2,), (-2,), (1,))
    p2 = cv.ModePair.parse("1;0,0;1,2;0,0;0", q=2)
    assert p2.q == 2 and p2.alpha == 2 and p2.beta == 4
    with pytest.raises(ValueError):
        cv.ModePair.parse("1,2,3")
    with pytest.raises(ValueError):
        cv.ModePair.parse("0,0,1,0")


def test_closed_forms_unit_pair():
    p = cv.ModePair(1, 0, 0, 1)
    assert cv.k_torus_bi(p) == pytest.approx(BI_X_Y, rel=1e-15)
    assert cv.k_torus_right(p) == pytest.approx(RIGHT_X_Y, rel=1e-15)


def test_closed_forms_parallel_pair():
    p = cv.ModePair(1, 0, 2, 0)
    assert cv.k_torus_bi(p) == 0.0 and cv.k_torus_right(p) == 0.0


def test_closed_forms_pair_1_2_2_1():
    p = cv.ModePair(1, 2, 2, 1)
    assert cv.k_torus_bi(p) == pytest.approx(9 / (4 * V), rel=1e-15)
    f, h = p.hamiltonians()
    assert cv.k_torus_right(p) == pytest.approx(cv.k_right_general(f, h).K, rel=1e-10)


def test_resonant_and_degenerate_pairs():
    with pytest.raises(SingularDenominatorError):
        cv.k_torus_right(cv.ModePair(1, 0, 1, 0))
    with pytest.raises(SingularDenominatorError):
        cv.k_torus_right(cv.ModePair(1, 2, -1, -2))
    with pytest.raises(DegeneratePlaneError):
        cv.k_torus_bi(cv.ModePair(1, 0, -1, 0))
    # cos and sin of the same wavevector span a plane: resonant but not degenerate
    p = cv.ModePair(1, 2, 1, 2, phases=("cos", "sin"))
    assert p.is_resonant and not p.is_degenerate
    f, h = p.hamiltonians()
    assert cv.k_right_general(f, h).K == pytest.approx(0.0, abs=1e-18)


def test_phases_do_not_change_closed_form_values():
    rng = np.random.default_rng(16)
    for _ in range(20):
        pair = cv.random_mode_pair(rng, 4, random_phases=True)
        f, h = pair.hamiltonians()
        assert cv.k_torus_right(pair) == pytest.approx(cv.k_right_general(f, h).K, rel=1e-10, abs=1e-16)
        assert cv.k_torus_bi(pair) == pytest.approx(cv.k_bi(f, h).K, rel=1e-10, abs=1e-16)


@pytest.mark.parametrize("seed", range(5))
def test_four_dimensional_closed_forms_match_general(seed):
    rng = np.random.default_rng(100 + seed)
    pair = cv.random_mode_pair(rng, 2, q=2)
    f, h = pair.hamiltonians()
    assert cv.k_torus_right(pair) == pytest.approx(cv.k_right_general(f, h).K, rel=1e-10, abs=1e-16)
    assert cv.k_torus_bi(pair) == pytest.approx(cv.k_bi(f, h).K, rel=1e-10, abs=1e-16)


def test_enumeration_counts():
    pairs = list(cv.enumerate_mode_pairs(1))
    # 4 canonical wavevectors, ordered pairs of distinct ones
    assert len(pairs) == 12
    assert all(not p.is_degenerate for p in pairs)
    assert len(list(cv.enumerate_mode_pairs(1, include_resonant=False))) == 12


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(-5, 5), min_size=4, max_size=4))
def test_sign_laws(v):
    n, m, k, l = v
    if (n, m) == (0, 0) or (k, l) == (0, 0):
        return
    pair = cv.ModePair(n, m, k, l)
    if pair.is_degenerate:
        return
    assert cv.k_torus_bi(pair) >= 0
    if not pair.is_resonant:
        assert cv.k_torus_right(pair) <= 0
