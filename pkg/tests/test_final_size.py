import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from epistoch.errors import ConvergenceError, DomainError
from epistoch.final_size import (
    FinalSizeObservation,
    MultitypeConfig,
    PairExperiment,
    SampleObservation,
    estimate_pair_prob,
    estimate_r0_final_size,
    estimate_r0_sample,
    estimate_vc_final_size,
    estimate_vc_sample,
    multitype_calibrate,
    multitype_final_size_solve,
    ngm_r0,
    r0_from_local_contacts,
    sample_variance_terms,
    solve_final_size,
)

# Reference values evaluated with mpmath at 40 digits (see _mp_reference below).
R0_HALF = 1.3862943611198906
R0_SE_CV1 = 0.0885642372
R0_SE_CV0 = 0.0632455532
VC_POINT = 0.2786524795
VC_SE_CV1 = 0.0460837140
VC_SE_CV0 = 0.0329093332
SAMPLE_R0_SE = 0.0671792011
SAMPLE_VC_SE = 0.0349561763
IMMUNE_R0 = 1.7328679514
IMMUNE_R0_SE = 0.1107052965
TAU_2 = 0.7968121300
TAU_15 = 0.5828116439


def _mp_reference():
    mp = pytest.importorskip("mpmath")
    mp.mp.dps = 40
    f = mp.mpf(1) / 2
    r0 = -mp.log(1 - f) / f
    term = lambda cv: (1 + cv**2 * (1 - f) * r0**2) / (f * (1 - f))  # noqa: E731
    n = 1000
    out = {
        "r0": r0,
        "se1": mp.sqrt(term(1) / n),
        "se0": mp.sqrt(term(0) / n),
        "vc_se1": mp.sqrt(term(1) / n) / r0**2,
        "vc_se0": mp.sqrt(term(0) / n) / r0**2,
    }
    N, m = 10_000, 100
    samp = (1 - mp.mpf(m) / N) * (1 - (1 - f) * r0) ** 2 / (m * f * (1 - f))
    out["s_se"] = mp.sqrt(term(1) / N + samp)
    out["s_vc_se"] = out["s_se"] / r0**2
    out["tau2"] = mp.findroot(lambda t: 1 - t - mp.exp(-2 * t), 0.8)
    out["tau15"] = mp.findroot(lambda t: 1 - t - mp.exp(-mp.mpf(1.5) * t), 0.6)
    return out


def test_frozen_constants_match_high_precision():
    ref = _mp_reference()
    assert float(ref["r0"]) == pytest.approx(R0_HALF, abs=1e-10)
    assert float(ref["se1"]) == pytest.approx(R0_SE_CV1, abs=1e-10)
    assert float(ref["se0"]) == pytest.approx(R0_SE_CV0, abs=1e-10)
    assert float(ref["vc_se1"]) == pytest.approx(VC_SE_CV1, abs=1e-10)
    assert float(ref["vc_se0"]) == pytest.approx(VC_SE_CV0, abs=1e-10)
    assert float(ref["s_se"]) == pytest.approx(SAMPLE_R0_SE, abs=1e-10)
    assert float(ref["s_vc_se"]) == pytest.approx(SAMPLE_VC_SE, abs=1e-10)
    assert float(ref["tau2"]) == pytest.approx(TAU_2, abs=1e-10)
    assert float(ref["tau15"]) == pytest.approx(TAU_15, abs=1e-10)


def test_pair_probability():
    e = estimate_pair_prob(PairExperiment(20, 5))
    assert e.point == 0.25
    assert e.se == pytest.approx(math.sqrt(0.1875 / 20), abs=1e-12)
    assert e.se == pytest.approx(0.09682, abs=5e-6)
    assert estimate_pair_prob(PairExperiment(10, 0)).se == 0
    one = estimate_pair_prob(PairExperiment(10, 10))
    assert (one.point, one.se) == (1.0, 0.0)


def test_local_contacts():
    assert r0_from_local_contacts(0.25, 10) == 2.5
    assert r0_from_local_contacts(0.0, 10) == 0.0
    assert r0_from_local_contacts(0.3, 1) == 0.3


def test_solve_final_size_values():
    assert solve_final_size(1.0) == 0.0
    assert solve_final_size(0.5) == 0.0
    assert solve_final_size(2.0) == pytest.approx(TAU_2, abs=1e-10)
    assert solve_final_size(1.5) == pytest.approx(TAU_15, abs=1e-10)
    assert solve_final_size(1.0 + 1e-9) < 1e-6


def test_r0_whole_population():
    obs = FinalSizeObservation(1000, 500)
    e1 = estimate_r0_final_size(obs, 1.0)
    assert e1.point == pytest.approx(R0_HALF, abs=1e-12)
    assert e1.se == pytest.approx(R0_SE_CV1, abs=1e-10)
    assert e1.formula_id == "R0-final-size"
    assert estimate_r0_final_size(obs, 0.0).se == pytest.approx(R0_SE_CV0, abs=1e-10)
    assert estimate_r0_final_size(obs, 0.0).se == pytest.approx(2 / math.sqrt(1000), abs=1e-12)


def test_initially_immune_rule():
    obs = FinalSizeObservation(1000, 500, n_immune=250)
    e = estimate_r0_final_size(obs, 1.0)
    assert e.point == pytest.approx(IMMUNE_R0, abs=1e-9)
    assert e.se == pytest.approx(IMMUNE_R0_SE, abs=1e-9)
    assert e.formula_id == "R0-final-size-immune"
    v = estimate_vc_final_size(obs, 1.0)
    # n counts the initially susceptible, so s = 1000 / 1250
    assert obs.susceptible_fraction == 0.8
    assert v.point == pytest.approx(1 - 0.8 / R0_HALF, abs=1e-12)
    assert v.se == pytest.approx(VC_SE_CV1 * 0.8, abs=1e-10)


def test_vc_whole_population():
    obs = FinalSizeObservation(1000, 500)
    v = estimate_vc_final_size(obs, 1.0)
    assert v.point == pytest.approx(VC_POINT, abs=1e-9)
    assert v.se == pytest.approx(VC_SE_CV1, abs=1e-10)
    assert estimate_vc_final_size(obs, 0.0).se == pytest.approx(VC_SE_CV0, abs=1e-10)
    # R0 -> 1 limit: vc -> 0
    assert estimate_vc_final_size(FinalSizeObservation(10**9, 1)).point == pytest.approx(0.0, abs=1e-8)


def test_sample_estimators():
    obs = SampleObservation(10_000, 100, 50)
    e = estimate_r0_sample(obs, 1.0)
    assert e.point == pytest.approx(R0_HALF, abs=1e-12)
    assert e.se == pytest.approx(SAMPLE_R0_SE, abs=1e-10)
    v = estimate_vc_sample(obs, 1.0)
    assert v.point == pytest.approx(VC_POINT, abs=1e-9)
    assert v.se == pytest.approx(SAMPLE_VC_SE, abs=1e-10)
    with pytest.raises(DomainError):
        estimate_vc_sample(SampleObservation(1000, 100, 100))


def test_sample_reduces_to_whole_population():
    s = SampleObservation(1000, 1000, 500)
    w = FinalSizeObservation(1000, 500)
    assert estimate_r0_sample(s).se == pytest.approx(estimate_r0_final_size(w).se, abs=1e-12)
    assert estimate_vc_sample(s).se == pytest.approx(estimate_vc_final_size(w).se, abs=1e-12)
    assert sample_variance_terms(s)[1] == 0.0


def test_degenerate_final_sizes():
    for z in (0, 1000):
        with pytest.raises(DomainError):
            estimate_r0_final_size(FinalSizeObservation(1000, z))


@settings(max_examples=60, deadline=None)
@given(frac=st.floats(1e-4, 1 - 1e-4))
def test_self_consistency(frac):
    n = 10**9
    z = int(round(frac * n))
    assume(0 < z < n)
    e = estimate_r0_final_size(FinalSizeObservation(n, z))
    assert solve_final_size(e.point) == pytest.approx(z / n, abs=1e-10)


@settings(max_examples=40, deadline=None)
@given(frac=st.floats(0.01, 0.99), n=st.integers(100, 10**6))
def test_se_scales_as_inverse_sqrt_n(frac, n):
    z = max(1, min(n - 1, int(frac * n)))
    a = estimate_r0_final_size(FinalSizeObservation(n, z)).se
    b = estimate_r0_final_size(FinalSizeObservation(4 * n, 4 * z)).se
    assert b == pytest.approx(a / 2, rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(50, 10**6), mfrac=st.floats(0.01, 1.0), zfrac=st.floats(0.02, 0.98))
def test_sample_variance_decomposition(n, mfrac, zfrac):
    m = max(2, int(mfrac * n))
    zm = max(1, min(m - 1, int(zfrac * m)))
    outcome, sampling = sample_variance_terms(SampleObservation(n, m, zm))
    assert sampling >= 0
    assert (sampling == 0) == (m == n)


@settings(max_examples=40, deadline=None)
@given(a=st.floats(1.0, 5.0), b=st.floats(1.0, 5.0))
def test_final_size_increasing(a, b):
    assume(abs(a - b) > 1e-6)
    lo, hi = sorted((a, b))
    assert solve_final_size(lo) <= solve_final_size(hi)
    if lo > 1.0 + 1e-3:
        assert solve_final_size(lo) < solve_final_size(hi)


# multitype ------------------------------------------------------------------

def test_multitype_single_type_reduction():
    cfg = MultitypeConfig([1.0], [[2.0]], [1.0])
    assert multitype_final_size_solve(cfg)[0] == pytest.approx(solve_final_size(2.0), abs=1e-10)
    assert ngm_r0(cfg) == pytest.approx(2.0, abs=1e-12)


def test_multitype_symmetry_and_zero():
    cfg = MultitypeConfig([0.5, 0.5], [[2.0, 1.0], [1.0, 2.0]], [1.0, 1.0])
    tau = multitype_final_size_solve(cfg)
    assert tau[0] == pytest.approx(tau[1], abs=1e-12)
    zero = MultitypeConfig([0.5, 0.5], np.zeros((2, 2)), [1.0, 1.0])
    assert np.all(multitype_final_size_solve(zero) == 0)


def test_ngm_examples():
    diag = MultitypeConfig([0.5, 0.5], [[3.0, 0.0], [0.0, 1.0]], [1.0, 1.0])
    assert ngm_r0(diag) == pytest.approx(1.5, abs=1e-10)
    flat = MultitypeConfig([0.5, 0.5], np.full((2, 2), 2.0), [1.0, 1.0])
    assert np.allclose(flat.next_generation_matrix(), 1.0)
    assert ngm_r0(flat) == pytest.approx(2.0, abs=1e-10)
    bip = MultitypeConfig([0.5, 0.5], [[0.0, 3.0], [3.0, 0.0]], [1.0, 1.0])
    assert ngm_r0(bip) == pytest.approx(1.5, abs=1e-10)


@settings(max_examples=30, deadline=None)
@given(
    lam=st.lists(st.floats(0.0, 4.0), min_size=9, max_size=9),
    pi=st.lists(st.floats(0.1, 1.0), min_size=3, max_size=3),
    gamma=st.lists(st.floats(0.5, 2.0), min_size=3, max_size=3),
    perm=st.permutations([0, 1, 2]),
)
def test_relabeling_invariance(lam, pi, gamma, perm):
    pi = np.array(pi) / np.sum(pi)
    lam = np.array(lam).reshape(3, 3)
    g = np.array(gamma)
    p = np.array(perm)
    a = MultitypeConfig(pi, lam, g)
    b = MultitypeConfig(pi[p], lam[np.ix_(p, p)], g[p])
    assert ngm_r0(a) == pytest.approx(ngm_r0(b), abs=1e-8)
    assert ngm_r0(a) == pytest.approx(max(abs(np.linalg.eigvals(a.next_generation_matrix()))), abs=1e-7)
    ta, tb = multitype_final_size_solve(a), multitype_final_size_solve(b)
    assert np.allclose(ta[p], tb, atol=1e-8)


def test_calibrate_single_type():
    tmpl = MultitypeConfig([1.0], [[1.0]], [1.0])
    res = multitype_calibrate([TAU_2], template=tmpl, free=[("lam", (0, 0))])
    assert res.params[0] == pytest.approx(2.0, abs=1e-8)
    # the rounded value 0.796812 pins lambda to ~1e-6
    res6 = multitype_calibrate([0.796812], template=tmpl, free=[("lam", (0, 0))])
    assert res6.params[0] == pytest.approx(2.0, abs=1e-5)


def test_calibrate_round_trip():
    truth = MultitypeConfig([0.4, 0.6], [[2.5, 0.8], [0.6, 1.7]], [1.0, 1.2])
    tau = multitype_final_size_solve(truth)
    tmpl = MultitypeConfig([0.4, 0.6], [[1.0, 0.8], [0.6, 1.0]], [1.0, 1.2])
    res = multitype_calibrate(tau, template=tmpl, free=[("lam", (0, 0)), ("lam", (1, 1))])
    assert np.allclose(res.params, [2.5, 1.7], atol=1e-6)


def test_calibrate_factorized_builder():
    pi = [0.5, 0.5]
    truth = MultitypeConfig.factorized(pi, [2.0, 1.0], [1.0, 1.5], [1.0, 1.0])
    tau = multitype_final_size_solve(truth)

    def builder(x):
        return MultitypeConfig.factorized(pi, [x[0], 1.0], [1.0, x[1]], [1.0, 1.0])

    res = multitype_calibrate(tau, builder=builder, x0=[1.0, 1.0])
    assert np.allclose(res.params, [2.0, 1.5], atol=1e-6)


def test_calibrate_errors():
    tmpl = MultitypeConfig([0.5, 0.5], np.ones((2, 2)), [1.0, 1.0])
    with pytest.raises(DomainError):
        multitype_calibrate([0.0, 0.0], template=tmpl, free=[("lam", (0, 0)), ("lam", (1, 1))])
    with pytest.raises(DomainError):
        multitype_calibrate([0.5, 0.5], template=tmpl, free=[("lam", (0, 0))])
    # two recovery rates cannot both move when only their ratio matters here
    sym = MultitypeConfig([0.5, 0.5], [[2.0, 2.0], [2.0, 2.0]], [1.0, 1.0])
    with pytest.raises(ConvergenceError):
        multitype_calibrate([0.5, 0.7], template=sym, free=[("lam", (0, 0)), ("lam", (0, 1))])
