import math
import warnings

import numpy as np
import pytest

from sdiffgeo import euler
from sdiffgeo.errors import DivergenceError
from sdiffgeo.euler import CFLWarning, SolverConfig
from sdiffgeo.spectral import GridSpec, to_trig
from sdiffgeo.trig import TrigPolynomial, laplacian, poisson_bracket

C, S = TrigPolynomial.cos, TrigPolynomial.sin
V = (2 * np.pi) ** 2


def test_rhs_vanishes_for_eigenmodes():
    g = GridSpec(32)
    for f in (C(1, 0), C(1, 0) + C(0, 1), C(1, 2) + S(2, -1)):
        assert euler.rhs(euler.initial_vorticity(f, g)).max_abs_coeff() < 1e-13


def test_rhs_matches_symbolic_bracket():
    g = GridSpec(32)
    f = C(1, 0) + C(0, 2)
    expected = poisson_bracket(laplacian(f), f)
    assert to_trig(euler.rhs(euler.initial_vorticity(f, g))).max_abs_diff(expected) < 1e-10


def test_step_keeps_stationary_state_and_dt_zero_is_identity():
    g = GridSpec(32)
    w = euler.initial_vorticity(C(1, 2) + S(2, -1), g)
    assert np.max(np.abs(euler.step(w, 1e-3).coeffs - w.coeffs)) < 1e-12
    w2 = euler.initial_vorticity(C(1, 0) + C(0, 2), g)
    assert euler.step(w2, 0.0) is w2


def test_step_matches_short_symbolic_taylor_expansion():
    # w(dt) = w + dt R(w) + dt^2/2 R'(w)R(w) + O(dt^3); check first order only
    g = GridSpec(32)
    f = C(1, 0) + C(0, 2)
    w = euler.initial_vorticity(f, g)
    dt = 1e-4
    expected = laplacian(f) + dt * poisson_bracket(laplacian(f), f)
    assert to_trig(euler.step(w, dt)).max_abs_diff(expected) < 1e-6


def test_rk4_order_ratio():
    ratio = euler.rk4_order_ratio(C(1, 0) + C(0, 2), GridSpec(32), t_final=1.0, dt=0.025)
    assert 12 <= ratio <= 20


def test_cfl_warning():
    g = GridSpec(32)
    w = euler.initial_vorticity(50 * C(1, 0), g)
    with pytest.warns(CFLWarning):
        euler.step(w, 0.2)


def test_simulate_cosine_is_stationary_with_known_energy():
    cfg = SolverConfig(dt=1e-2, steps=20, grid=GridSpec(32))
    recs = euler.simulate(C(1, 0), cfg)
    assert len(recs) == 21
    assert recs[0].L == pytest.approx(V / 4, rel=1e-14)
    for r in recs:
        assert abs(r.L - recs[0].L) < 1e-12 and abs(r.I[2] - recs[0].I[2]) < 1e-12


def test_simulate_zero_steps_gives_one_record():
    recs = euler.simulate(C(1, 0) + C(0, 2), SolverConfig(dt=1e-3, steps=0, grid=GridSpec(32)))
    assert len(recs) == 1 and recs[0].t == 0.0


def test_record_stride_and_final_step():
    recs = euler.simulate(C(1, 0) + C(0, 2), SolverConfig(dt=1e-3, steps=25, grid=GridSpec(32), invariant_stride=10))
    assert [r.step for r in recs] == [0, 10, 20, 25]


def test_conservation_two_mode_flow():
    cfg = SolverConfig(dt=1e-3, steps=1000, grid=GridSpec(128), invariant_stride=50)
    recs = euler.simulate(C(1, 0) + C(0, 2), cfg)
    assert euler.relative_drift(recs, "L") < 1e-6
    assert euler.relative_drift(recs, 2) < 1e-4


def test_enstrophy_matches_grid_quadrature():
    g = GridSpec(64)
    w = euler.initial_vorticity(C(1, 0) + S(2, 3), g)
    from sdiffgeo.spectral import riemann_sum, to_grid

    assert euler.casimir(w, 2) == pytest.approx(riemann_sum(to_grid(w) ** 2), rel=1e-12)
    # <w, w> for w = cos x + 13 sin(2x+3y)
    assert euler.casimir(w, 2) == pytest.approx(0.5 * V * (1 + 169), rel=1e-13)


def test_divergence_keeps_partial_trajectory():
    cfg = SolverConfig(dt=0.2, steps=200, grid=GridSpec(32))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", CFLWarning)
        with pytest.raises(DivergenceError) as info:
            euler.simulate(50 * C(1, 0) + 50 * C(0, 3), cfg)
    assert info.value.step >= 1
    assert info.value.trajectory and info.value.trajectory[0].step == 0


def test_initial_data_outside_band_is_rejected():
    with pytest.raises(ValueError):
        euler.initial_vorticity(C(7, 0), GridSpec(16))
    with pytest.raises(ValueError):
        euler.initial_vorticity(C((1, 0), (0, 1)), GridSpec(16))
    with pytest.raises(ValueError):
        SolverConfig(dt=-1.0, steps=1)


def test_trajectory_csv_round_trip(tmp_path):
    recs = euler.simulate(C(1, 0) + C(0, 2), SolverConfig(dt=1e-3, steps=5, grid=GridSpec(32)))
    path = tmp_path / "t.csv"
    euler.write_trajectory_csv(recs, (2, 3, 4), path)
    rows = euler.read_trajectory_csv(path)
    assert list(rows[0]) == ["t", "L", "I2", "I3", "I4", "max_vorticity"]
    assert [r["L"] for r in rows] == [r.L for r in recs]


def test_snapshot_lists_half_plane_coefficients():
    g = GridSpec(16)
    rec = euler.snapshot_record(0, 0.0, euler.initial_vorticity(C(1, 0) + S(0, 2), g))
    coeffs = {(n, m): (float(re), float(im)) for n, m, re, im in rec["vorticity"]}
    assert set(coeffs) == {(1, 0), (0, 2)}
    assert coeffs[(1, 0)] == pytest.approx((0.5, 0.0))
    assert coeffs[(0, 2)] == pytest.approx((0.0, -2.0))
    assert math.isclose(rec["t"], 0.0)
