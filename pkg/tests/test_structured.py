import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from epistoch.core import GseParams, final_size, simulate_gse
from epistoch.errors import DomainError
from epistoch.structured import (
    GravityConfig,
    HouseholdOutbreakData,
    HouseholdParams,
    ImpossibleDataWarning,
    PatchParams,
    gravity_force,
    gravity_movement,
    household_final_size_enum,
    household_loglik,
    household_mle,
    simulate_households,
    simulate_two_patch,
)


def _pair_data():
    return HouseholdOutbreakData([0, 0], ("index", "infection"), [0.0, 1.0], [2], 1.0)


def _sim_data(lam_h, lam_g, seed, n_house=500, min_size=150):
    i = 0
    while True:
        log = simulate_households(HouseholdParams(lam_h, lam_g, 1.0, (3,) * n_house), (seed, i))
        i += 1
        if final_size(log) > min_size:
            return HouseholdOutbreakData.from_log(log)


# --- household likelihood ---------------------------------------------------


def test_loglik_hand_examples():
    d = _pair_data()
    assert household_loglik(d, 1.0, 0.0) == -1.0
    assert household_loglik(d, 0.0, 2.0) == -1.0
    assert household_loglik(d, 0.0, 2.0, n=2) == -1.0


def test_loglik_empty():
    d = HouseholdOutbreakData([], (), [], [3, 2], 5.0)
    assert household_loglik(d, 1.3, 0.4) == 0.0


def test_loglik_impossible_flagged():
    d = _pair_data()
    with pytest.warns(ImpossibleDataWarning):
        assert household_loglik(d, 0.0, 0.0) == -math.inf


def test_loglik_matches_fine_grid_integral():
    d = _sim_data(1.0, 1.5, 4, n_house=30, min_size=5)
    a, b, area_h, area_g = d.sufficient_statistics()
    # brute-force Riemann sum of the exposure integrals on a fine grid
    grid = np.linspace(0.0, d.t_obs, 200_001)
    mid = 0.5 * (grid[1:] + grid[:-1])
    s_h = np.tile(d.sizes, (len(mid), 1)).astype(float)
    i_h = np.zeros_like(s_h)
    for h, e, t in zip(d.household, d.event, d.time):
        after = mid > t
        if e == "recovery":
            i_h[after, h] -= 1
        else:
            s_h[after, h] -= 1
            i_h[after, h] += 1
    dt = np.diff(grid)
    assert np.sum((s_h * i_h).sum(axis=1) * dt) == pytest.approx(area_h, rel=1e-3)
    sg = (s_h.sum(axis=1) * i_h.sum(axis=1)) / d.n
    assert np.sum(sg * dt) == pytest.approx(area_g, rel=1e-3)


def test_inconsistent_data_rejected():
    with pytest.raises(DomainError):
        HouseholdOutbreakData([0, 0], ("index", "recovery"), [0.0, 1.0], [1], 0.5)
    with pytest.raises(DomainError):
        HouseholdOutbreakData([0, 0], ("index", "index"), [0.0, 0.5], [2], 1.0)
    with pytest.raises(DomainError):
        HouseholdOutbreakData([0, 0, 0], ("index", "infection", "infection"), [0.0, 0.5, 0.7], [2], 1.0)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31), u=st.floats(0.1, 5.0), v=st.floats(0.1, 5.0),
       angle=st.floats(0.0, 2 * math.pi))
def test_loglik_concave_along_lines(seed, u, v, angle):
    log = simulate_households(HouseholdParams(1.5, 1.0, 1.0, (3,) * 20), seed)
    d = HouseholdOutbreakData.from_log(log)
    h = 0.05
    du, dv = h * math.cos(angle), h * math.sin(angle)
    if min(u - abs(du), v - abs(dv)) <= 0:
        return
    f = lambda x, y: household_loglik(d, x, y)  # noqa: E731
    second = f(u + du, v + dv) - 2 * f(u, v) + f(u - du, v - dv)
    assert second <= 1e-9 * max(1.0, abs(f(u, v)))


# --- household simulation ---------------------------------------------------


def test_singleton_household_no_global():
    for seed in range(50):
        log = simulate_households(HouseholdParams(5.0, 0.0, 1.0, (1, 3, 2)), seed, index_household=0)
        assert final_size(log) == 1


def test_household_log_invariants():
    log = simulate_households(HouseholdParams(2.0, 1.0, 1.0, (2, 3, 4, 1) * 10), 7)
    log.validate()
    t, s, e, i, r = log.counts()
    assert np.all(s + i + r == log.n)
    src = log.infector[log.kind == 0]
    assert np.sum(src < 0) == 1


def test_no_household_transmission_matches_gse():
    # lam_h = 0 reduces to the homogeneous model with contact rate lam_g
    n_runs = 10_000
    sizes = (2, 3, 1, 4, 2, 3, 5)  # n = 20
    hh = [final_size(simulate_households(HouseholdParams(0.0, 1.5, 1.0, sizes), (1, k))) for k in range(n_runs)]
    gse = [final_size(simulate_gse(GseParams(1.5, 1.0, 20), (2, k))) for k in range(n_runs)]
    bins = np.arange(1, 22)
    table = np.vstack([np.histogram(hh, bins)[0], np.histogram(gse, bins)[0]])
    table = table[:, table.sum(axis=0) > 0]
    p = stats.chi2_contingency(table)[1]
    assert p > 0.05


def test_household_clustering():
    runs = 1000
    within, overall = [], []
    for k in range(runs):
        log = simulate_households(HouseholdParams(10.0, 0.5, 1.0, (4,) * 50), (3, k))
        hit = log.household[log.subject[log.kind == 0]]
        counts = np.bincount(hit, minlength=50)
        touched = counts > 0
        within.append(counts[touched].sum() / (4 * touched.sum()))
        overall.append(counts.sum() / 200)
    assert np.mean(within) > np.mean(overall)


# --- enumeration oracle -----------------------------------------------------


def test_enum_pair_race():
    np.testing.assert_allclose(household_final_size_enum(2, 0.5), [0.0, 0.5, 0.5], atol=1e-15)


def test_enum_no_transmission():
    np.testing.assert_allclose(household_final_size_enum(4, 0.0), [0, 1, 0, 0, 0])


@pytest.mark.parametrize("size", [1, 2, 3, 4, 5])
@pytest.mark.parametrize("p", [0.1, 0.5, 0.9, 1.0])
def test_enum_normalized(size, p):
    d = household_final_size_enum(size, p)
    assert d.sum() == pytest.approx(1.0, abs=1e-14)
    assert d[0] == 0.0


def test_enum_size_cap():
    with pytest.raises(DomainError):
        household_final_size_enum(6, 0.5)
    with pytest.raises(DomainError):
        household_final_size_enum(3, 1.5)


def test_enum_size3_hand_values():
    # two-step race by hand with rho = p/(1-p) = 1
    d = household_final_size_enum(3, 0.5)
    p1 = 1 / 3
    p2 = (2 / 3) * (1 / 2) * (1 / 2)
    np.testing.assert_allclose(d, [0, p1, p2, 1 - p1 - p2], atol=1e-15)


def test_enum_matches_simulation():
    runs = 100_000
    params = HouseholdParams(1.0, 0.0, 1.0, (3,))
    z = np.array([final_size(simulate_households(params, (5, k), index_household=0)) for k in range(runs)])
    obs = np.bincount(z, minlength=4)[1:]
    exp = household_final_size_enum(3, 0.5)[1:] * runs
    assert stats.chisquare(obs, exp).pvalue > 0.05


# --- MLE --------------------------------------------------------------------


def test_mle_pair_example_and_gradient():
    d = HouseholdOutbreakData(
        [0, 0, 1, 0, 1, 1],
        ("index", "infection", "infection", "recovery", "infection", "recovery"),
        [0.0, 0.4, 0.9, 1.3, 1.6, 2.0], [2, 3], 3.0,
    )
    fit = household_mle(d)
    ll = fit.loglik
    for dx, dy in [(0.01, 0), (0, 0.01), (-0.01, 0.01)]:
        x, y = fit.lam_h.point + dx, fit.lam_g.point + dy
        if x >= 0 and y >= 0:
            assert household_loglik(d, x, y) <= ll + 1e-10


@pytest.mark.slow
def test_mle_recovery_coverage():
    hits, beats_truth = 0, 0
    for k in range(200):
        d = _sim_data(2.0, 1.0, k)
        fit = household_mle(d)
        ok = abs(fit.lam_h.point - 2.0) < 3 * fit.lam_h.se and abs(fit.lam_g.point - 1.0) < 3 * fit.lam_g.se
        hits += ok
        beats_truth += fit.loglik >= household_loglik(d, 2.0, 1.0) - 1e-9
    assert hits >= 190
    assert beats_truth == 200


@pytest.mark.slow
def test_mle_boundary_without_household_transmission():
    at_zero = 0
    for k in range(200):
        fit = household_mle(_sim_data(0.0, 2.0, 1000 + k))
        at_zero += "lam_h" in fit.boundary and fit.lam_h.point == 0.0
    assert at_zero > 100


def test_mle_requires_infections():
    d = HouseholdOutbreakData([0], ("index",), [0.0], [3], 1.0)
    with pytest.raises(DomainError):
        household_mle(d)


# --- two-patch ODE ----------------------------------------------------------


def test_patch_decoupled_matches_single_sir():
    n = 1000.0
    tr = simulate_two_patch(PatchParams(1.5, 1.0, 0.0, n, (990.0, 10.0, 500.0, 0.0)), 20.0, 0.01)

    def sir(t, y):
        s, i = y
        return [-1.5 * s * i / n, 1.5 * s * i / n - i]

    ref = integrate.solve_ivp(sir, (0, 20), [990.0, 10.0], t_eval=tr.t, rtol=1e-13, atol=1e-12, method="DOP853")
    np.testing.assert_allclose(tr.s1, ref.y[0], atol=1e-8)
    np.testing.assert_allclose(tr.i1, ref.y[1], atol=1e-8)
    assert np.all(tr.s2 == 500.0) and np.all(tr.i2 == 0.0)


def test_patch_symmetry():
    tr = simulate_two_patch(PatchParams(2.0, 1.0, 0.3, 200.0, (95.0, 5.0, 95.0, 5.0)), 30.0)
    np.testing.assert_allclose(tr.s1, tr.s2, atol=1e-10)
    np.testing.assert_allclose(tr.i1, tr.i2, atol=1e-10)


def test_patch_conservation():
    tr = simulate_two_patch(PatchParams(1.5, 1.0, 0.1, 1000.0, (600.0, 10.0, 390.0, 0.0)), 50.0, 0.01)
    total = tr.s1 + tr.i1 + tr.r1 + tr.s2 + tr.i2 + tr.r2
    assert np.max(np.abs(total - total[0])) < 1e-9


def test_patch_rk4_order():
    p = PatchParams(1.5, 1.0, 0.1, 1000.0, (600.0, 10.0, 390.0, 0.0))
    dts = [0.4, 0.2, 0.1, 0.05]
    ends = [simulate_two_patch(p, 20.0, dt).as_array()[-1, 1:] for dt in dts]
    err = [np.max(np.abs(ends[k] - ends[k + 1])) for k in range(len(dts) - 1)]
    slope = np.polyfit(np.log(dts[:-1]), np.log(err), 1)[0]
    assert slope >= 3.5


def test_patch_last_step_lands_on_t_end():
    tr = simulate_two_patch(PatchParams(1.0, 1.0, 0.0, 10.0, (9.0, 1.0, 0.0, 0.0)), 1.005, 0.01)
    assert tr.t[-1] == 1.005
    with pytest.raises(DomainError):
        simulate_two_patch(PatchParams(1.0, 1.0, 0.0, 10.0, (9.0, 1.0, 0.0, 0.0)), 0.001, 0.01)


# --- gravity ----------------------------------------------------------------


def _grav(rho=1.0, d=2.0, nk=100.0):
    return GravityConfig(1.0, 1.0, rho, np.array([[1.0, d], [d, 1.0]]), np.array([50.0, nk]))


def test_gravity_hand_value():
    assert gravity_force(_grav(), 10, 0, 1) == pytest.approx(500.0, rel=1e-15)
    assert gravity_force(_grav(), 0, 0, 1) == 0.0


def test_gravity_distance_scaling():
    assert gravity_force(_grav(2.0, 2.0), 10, 0, 1) / gravity_force(_grav(2.0, 4.0), 10, 0, 1) == pytest.approx(4.0)


def test_gravity_zero_distance_rejected():
    with pytest.raises(DomainError):
        gravity_force(_grav(d=0.0), 3, 0, 1)
    with pytest.raises(DomainError):
        gravity_force(_grav(), -1, 0, 1)


def test_gravity_movement():
    cfg = _grav()
    assert gravity_movement(cfg, 0, 1) == pytest.approx(100.0 * 50.0 / 2.0)


@settings(max_examples=50, deadline=None)
@given(nk=st.floats(1.0, 1e5), ij=st.floats(0.0, 1e4), d=st.floats(0.1, 1e3),
       t1=st.floats(0.1, 2.0), t2=st.floats(0.1, 2.0), rho=st.floats(0.1, 3.0))
def test_gravity_separable(nk, ij, d, t1, t2, rho):
    cfg = GravityConfig(t1, t2, rho, np.array([[1.0, d], [d, 1.0]]), np.array([1.0, nk]))
    unit = GravityConfig(t1, t2, rho, np.array([[1.0, 1.0], [1.0, 1.0]]), np.array([1.0, 1.0]))
    f = gravity_force(cfg, ij, 0, 1)
    assert f == pytest.approx(nk**t1 * gravity_force(unit, ij, 0, 1) / d**rho, rel=1e-12)
