import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from epistoch.errors import DomainError
from epistoch.surveillance import (
    CountPanel,
    EEModelSpec,
    EEParams,
    FarringtonConfig,
    NegBinPredictive,
    PointMass,
    ZeroMassWarning,
    ee_fit,
    ee_loglik,
    ee_mean,
    ee_predict_one_step,
    ee_simulate,
    farrington_threshold,
    log_score,
    mean_log_score,
    nb_logpmf,
    nb_ppf,
    nb_rvs,
    randomized_pit,
    reference_indices,
    run_detector,
)

CFG = FarringtonConfig()
TRUE = EEParams([math.log(5.0)], lam=0.4, phi=0.2)


# --- negative binomial ------------------------------------------------------


@pytest.mark.parametrize("mu,phi", [(0.5, 0.1), (5.0, 0.2), (40.0, 1.5), (3.0, 1e-9)])
def test_nb_normalized(mu, phi):
    top = int(nb_ppf(1 - 1e-10, mu, phi)) + 1
    total = np.exp(nb_logpmf(np.arange(top + 1), mu, phi)).sum()
    assert abs(total - 1.0) < 1e-8


def test_nb_matches_hand_mass():
    # size 10, prob 10/13.5
    k, mu, y = 10.0, 3.5, 4
    p = k / (k + mu)
    hand = math.lgamma(y + k) - math.lgamma(k) - math.lgamma(y + 1) + k * math.log(p) + y * math.log(1 - p)
    assert nb_logpmf(y, mu, 0.1) == pytest.approx(hand, abs=1e-12)


def test_nb_poisson_limit():
    ys = np.arange(30)
    np.testing.assert_allclose(nb_logpmf(ys, 4.2, 1e-12), stats.poisson.logpmf(ys, 4.2), atol=1e-9)
    np.testing.assert_allclose(nb_logpmf(ys, 4.2, 0.0), stats.poisson.logpmf(ys, 4.2), atol=1e-12)


@pytest.mark.parametrize("mu,phi", [(5.0, 0.5), (20.0, 0.1)])
def test_nb_variance_identity(mu, phi):
    x = nb_rvs(np.random.default_rng(1), mu, phi, 1_000_000)
    assert x.var() == pytest.approx(mu * (1 + phi * mu), rel=0.01)


# --- scores -----------------------------------------------------------------


def test_log_score_examples():
    assert log_score(NegBinPredictive(1.0, 0.0), 0) == pytest.approx(1.0, abs=1e-12)
    assert log_score(PointMass(3), 3) == 0.0
    with pytest.warns(ZeroMassWarning):
        assert log_score(PointMass(3), 4) == math.inf


def test_log_score_propriety():
    spec = EEModelSpec()
    wins = 0
    for k in range(100):
        panel = ee_simulate(spec, TRUE, 4, 150, (3, k))
        good, bad, ys = [], [], []
        for t in range(1, panel.T):
            mu = ee_mean(panel, spec, TRUE, t)
            good += [NegBinPredictive(v, TRUE.phi) for v in mu]
            bad += [NegBinPredictive(1.2 * v, TRUE.phi) for v in mu]
            ys += panel.y[:, t].tolist()
        wins += mean_log_score(good, ys) < mean_log_score(bad, ys)
    assert wins >= 95


def test_pit_calibrated():
    spec = EEModelSpec()
    panel = ee_simulate(spec, TRUE, 4, 400, 8)
    fit = ee_fit(panel, spec)
    preds, ys = [], []
    for t in range(1, panel.T):
        preds += ee_predict_one_step(fit, panel, t)
        ys += panel.y[:, t].tolist()
    pit = randomized_pit(preds, ys, seed=1)
    obs = np.histogram(pit, np.linspace(0, 1, 11))[0]
    assert stats.chisquare(obs).pvalue > 0.05


# --- Farrington -------------------------------------------------------------


def _series(values_before, y_s, cfg=CFG):
    n = cfg.b * cfg.period + cfg.w_half + 1
    y = np.asarray(values_before(n), dtype=np.int64)
    y[-1] = y_s
    return y


def test_reference_window():
    idx = reference_indices(300, CFG)
    assert len(idx) == CFG.b * (2 * CFG.w_half + 1)
    assert idx.max() == 300 - 52 + 3 and idx.min() == 300 - 5 * 52 - 3


def test_flat_history_no_alarm():
    y = _series(lambda n: np.full(n, 10), 10)
    th = farrington_threshold(y, len(y) - 1)
    assert th.status == "ok" and not th.alarm
    assert th.mu_s == pytest.approx(10.0)


def test_large_count_alarms():
    y = _series(lambda n: np.random.default_rng(5).poisson(10, n), 100)
    th = farrington_threshold(y, len(y) - 1)
    assert th.alarm and th.g_s < 100


def test_insufficient_history_not_assessable():
    y = np.full(100, 10)
    th = farrington_threshold(y, 99)
    assert th.status == "not-assessable" and not th.alarm and "history" in th.reason


def test_all_zero_history():
    res = run_detector(np.zeros(400, dtype=int))
    assert res.alarm_time is None
    assert all(not th.assessable for th in res.table)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31), y1=st.integers(0, 200), y2=st.integers(0, 200))
def test_farrington_monotone_in_current_count(seed, y1, y2):
    lo, hi = sorted((y1, y2))
    base = np.random.default_rng(seed).negative_binomial(5, 5 / 13, CFG.b * CFG.period + 10)
    s = len(base) - 1
    a, b = base.copy(), base.copy()
    a[s], b[s] = lo, hi
    if farrington_threshold(a, s).alarm:
        assert farrington_threshold(b, s).alarm


def _in_control(seed, n):
    return np.random.default_rng(seed).negative_binomial(5, 5 / (5 + 8), n)


def test_false_alarm_rate():
    warm = CFG.b * CFG.period + CFG.w_half
    alarms, assessed = 0, 0
    for k in range(5):
        y = _in_control(k, warm + 200)
        res = run_detector(y, start=warm)
        assessed += sum(th.assessable for th in res.table)
        alarms += sum(th.alarm for th in res.table)
    assert assessed == 1000
    assert alarms / assessed <= 2 * (1 - CFG.q)


def test_step_detected_quickly():
    warm = CFG.b * CFG.period + CFG.w_half
    s0 = warm + 10
    hits = 0
    for k in range(200):
        y = _in_control(1000 + k, warm + 30)
        y[s0:] *= 5
        res = run_detector(y, start=s0, stop_at_alarm=True)
        hits += res.alarm_time is not None and s0 <= res.alarm_time <= s0 + 3
    assert hits >= 180


def test_detector_rows():
    y = _in_control(3, 300)
    res = run_detector(y, start=290)
    rows = list(res.rows())
    assert len(rows) == 10
    assert rows[0][0] == 290


def test_config_validation():
    with pytest.raises(DomainError):
        FarringtonConfig(q=0.4)
    with pytest.raises(DomainError):
        FarringtonConfig(b=0)
    with pytest.raises(DomainError):
        run_detector(np.array([1, -1, 2]))


# --- endemic-epidemic model -------------------------------------------------


def test_ee_hand_example():
    panel = CountPanel([[3, 4]])
    p = EEParams([math.log(2.0)], lam=0.5, phi=0.1)
    k, mu = 10.0, 3.5
    hand = math.lgamma(4 + k) - math.lgamma(k) - math.lgamma(5) + k * math.log(k / (k + mu)) + 4 * math.log(mu / (k + mu))
    assert ee_loglik(panel, EEModelSpec(), p) == pytest.approx(hand, abs=1e-12)


def test_ee_poisson_limit():
    panel = ee_simulate(EEModelSpec(include_ar=False), EEParams([1.2], phi=0.0), 3, 40, 2)
    spec = EEModelSpec(include_ar=False)
    ll = ee_loglik(panel, spec, EEParams([1.2], phi=1e-12))
    ref = stats.poisson.logpmf(panel.y[:, 1:], math.exp(1.2)).sum()
    assert abs(ll - ref) < 1e-6


def _ring(m):
    w = np.zeros((m, m))
    for i in range(m):
        w[i, (i + 1) % m] = w[(i + 1) % m, i] = 1.0
    return w


def test_ee_permutation_invariance():
    spec = EEModelSpec(S=1, include_neighbor=True, shared_alpha=False)
    w = _ring(5)
    w[0, 2] = 0.5
    params = EEParams([1.0, 1.2, 0.8, 1.1, 0.9], [0.3], [-0.2], 0.3, [0.1], 0.15)
    panel = ee_simulate(spec, params, 5, 60, 4, weights=w)
    perm = np.array([3, 0, 4, 1, 2])
    permuted = EEParams(params.alpha[perm], params.beta, params.delta, params.lam, params.nu, params.phi)
    assert ee_loglik(panel.permuted(perm), spec, permuted) == pytest.approx(ee_loglik(panel, spec, params), rel=1e-13)


def test_ee_predictive_mean_definition():
    spec = EEModelSpec(S=1, include_neighbor=True, lag=2)
    w = _ring(3)
    params = EEParams([1.0], [0.4], [0.1], 0.25, [0.2], 0.1)
    panel = ee_simulate(spec, params, 3, 30, 5, weights=w)
    t = 17
    y = panel.y.astype(float)
    eta = 1.0 + 0.4 * math.sin(2 * math.pi * t / 52) + 0.1 * math.cos(2 * math.pi * t / 52)
    expected = 0.25 * y[:, t - 1] + 0.2 * (w.T @ y[:, t - 2]) + math.exp(eta)
    np.testing.assert_allclose(ee_mean(panel, spec, params, t), expected, rtol=1e-14)


def test_ee_constant_predictive_without_ar():
    spec = EEModelSpec(include_ar=False)
    panel = ee_simulate(spec, EEParams([1.5], phi=0.3), 2, 60, 1)
    fit = ee_fit(panel, spec)
    means = {round(p.mean, 12) for t in range(1, 60) for p in ee_predict_one_step(fit, panel, t)}
    assert len(means) == 1


def test_ee_fit_deterministic():
    spec = EEModelSpec()
    panel = ee_simulate(spec, TRUE, 4, 300, 6)
    a, b = ee_fit(panel, spec), ee_fit(panel, spec)
    assert np.array_equal(a.theta, b.theta)
    assert a.converged


def test_ee_phi_local_maximum():
    spec = EEModelSpec()
    panel = ee_simulate(spec, TRUE, 4, 300, 7)
    fit = ee_fit(panel, spec)
    p = fit.params
    at = ee_loglik(panel, spec, p)
    for f in (0.95, 1.05):
        moved = EEParams(p.alpha, p.beta, p.delta, p.lam, p.nu, p.phi * f)
        assert ee_loglik(panel, spec, moved) < at


@pytest.mark.slow
def test_ee_wald_coverage():
    spec = EEModelSpec()
    hits = {"alpha": 0, "lambda": 0, "phi": 0}
    truth = {"alpha": math.log(5.0), "lambda": 0.4, "phi": 0.2}
    for k in range(100):
        fit = ee_fit(ee_simulate(spec, TRUE, 4, 300, (10, k)), spec)
        for name in hits:
            lo, hi = fit.interval(name)
            hits[name] += lo <= truth[name] <= hi
    assert all(h >= 90 for h in hits.values()), hits


def test_ee_boundary_when_no_autoregression():
    spec = EEModelSpec()
    near_zero = 0
    for k in range(30):
        fit = ee_fit(ee_simulate(spec, EEParams([math.log(5.0)], lam=0.0, phi=0.2), 4, 300, (1, k)), spec)
        lo, _ = fit.interval("lambda")
        near_zero += "lambda" in fit.boundary or lo < 0.01
    assert near_zero > 15


def test_ee_neighbour_needs_weights():
    with pytest.raises(DomainError):
        ee_loglik(CountPanel([[1, 2, 3], [2, 3, 4]]), EEModelSpec(include_neighbor=True), EEParams([0.0], nu=[0.1]))


def test_panel_validation():
    with pytest.raises(DomainError):
        CountPanel([[1, -2]])
    with pytest.raises(DomainError):
        CountPanel([[1, 2], [3, 4]], weights=np.ones((2, 2)))
    with pytest.raises(DomainError):
        ee_fit(CountPanel(np.zeros((2, 10), dtype=int)), EEModelSpec())
