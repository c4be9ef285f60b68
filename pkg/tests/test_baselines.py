import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gradstop.baselines import (
    BaselineName,
    BaselineStat,
    BaselineStopRule,
    rule_step,
    stat_cos,
    stat_eb,
    stat_gd,
    stat_gsnr,
    stat_sign,
)
from gradstop.criterion import Decision


def pairwise_oracle(G, func):
    n = G.shape[0]
    values = []
    for i in range(n):
        for j in range(i + 1, n):
            values.append(func(G[i], G[j]))
    return float(np.mean(values))


def sign_of_inner(a, b):
    return float(np.sign(a @ b))


def cos_of(a, b):
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(a @ b / (na * nb))


# --- pairwise similarity statistics ------------------------------------------


def test_sign_identical_rows():
    G = np.tile([0.5, -1.0, 2.0], (5, 1))
    assert stat_sign(G) == pytest.approx(1.0)


def test_sign_antipodal_pair():
    g = np.array([1.0, 2.0, -0.5])
    assert stat_sign(np.vstack([g, -g])) == pytest.approx(-1.0)


def test_sign_matches_bruteforce(rng):
    G = rng.standard_normal((4, 3))
    assert stat_sign(G) == pytest.approx(pairwise_oracle(G, sign_of_inner), abs=1e-14)


def test_cos_identical_and_antipodal():
    g = np.array([3.0, -4.0])
    assert stat_cos(np.tile(g, (4, 1))) == pytest.approx(1.0, abs=1e-12)
    assert stat_cos(np.vstack([g, -g])) == pytest.approx(-1.0, abs=1e-12)


def test_cos_matches_bruteforce(rng):
    G = rng.standard_normal((4, 3))
    assert stat_cos(G) == pytest.approx(pairwise_oracle(G, cos_of), abs=1e-12)


def test_cos_zero_norm_rows_contribute_zero():
    G = np.array([[1.0, 0.0], [0.0, 0.0], [1.0, 0.0]])
    # pairs: (0,1) -> 0, (0,2) -> 1, (1,2) -> 0
    assert stat_cos(G) == pytest.approx(1.0 / 3.0, abs=1e-12)
    # zero inner products contribute 0 to the sign mean as well
    assert stat_sign(G) == pytest.approx(1.0 / 3.0, abs=1e-14)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(2, 8), d=st.integers(1, 5))
def test_sign_invariant_under_row_scaling_cos_too(seed, n, d):
    gen = np.random.default_rng(seed)
    G = gen.standard_normal((n, d))
    scales = gen.uniform(0.1, 10.0, size=n)
    scaled = G * scales[:, None]
    assert stat_sign(scaled) == pytest.approx(stat_sign(G), abs=1e-12)
    assert stat_cos(scaled) == pytest.approx(stat_cos(G), abs=1e-10)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(2, 10), d=st.integers(1, 6))
def test_similarity_statistics_stay_in_unit_interval(seed, n, d):
    G = np.random.default_rng(seed).standard_normal((n, d))
    sign = BaselineStat(BaselineName.SIGN, stat_sign(G), iteration=1)
    cos = BaselineStat(BaselineName.COS, stat_cos(G), iteration=1)
    assert -1.0 <= sign.value <= 1.0
    assert -1.0 <= cos.value <= 1.0


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_statistics_permutation_invariant(seed):
    gen = np.random.default_rng(seed)
    G = gen.standard_normal((6, 4))
    perm = gen.permutation(6)
    for stat in (stat_sign, stat_cos, stat_gsnr, stat_eb):
        assert stat(G[perm]) == pytest.approx(stat(G), abs=1e-10)


# --- signal-to-noise statistics -------------------------------------------------


def coordinate_oracle(G):
    n, d = G.shape
    g_bar = G.mean(axis=0)
    var = np.array([np.mean((G[:, k] - g_bar[k]) ** 2) for k in range(d)])
    gsnr = np.mean(g_bar**2 / (var + 1e-12))
    eb = 1.0 - (n / d) * np.sum(g_bar**2 / (var + 1e-12))
    return gsnr, eb


def test_gsnr_zero_variance_guard():
    G = np.tile([2.0, 0.0], (4, 1))  # zero variance, nonzero mean
    value = stat_gsnr(G)
    assert np.isfinite(value)
    assert value == pytest.approx((4.0 / 1e-12) / 2.0, rel=1e-6)


def test_gsnr_zero_mean_gradient():
    G = np.array([[1.0, -2.0], [-1.0, 2.0]])
    assert stat_gsnr(G) == 0.0


def test_gsnr_eb_match_bruteforce(rng):
    G = rng.standard_normal((7, 4))
    gsnr, eb = coordinate_oracle(G)
    assert stat_gsnr(G) == pytest.approx(gsnr, rel=1e-12)
    assert stat_eb(G) == pytest.approx(eb, rel=1e-12)


def test_eb_converged_gradients_fire():
    G = np.array([[1.0, -2.0], [-1.0, 2.0]])  # zero mean
    assert stat_eb(G) == pytest.approx(1.0)


def test_eb_strong_signal_does_not_fire(rng):
    G = np.tile([50.0, -30.0], (6, 1)) + 1e-3 * rng.standard_normal((6, 2))
    assert stat_eb(G) < 0.0


# --- gradient disparity -----------------------------------------------------------


def test_gd_identical_halves(rng):
    G = rng.standard_normal((4, 3))
    assert stat_gd(G, G) == 0.0


def test_gd_unit_antipodal_means():
    e1 = np.array([1.0, 0.0, 0.0])
    assert stat_gd(np.tile(e1, (3, 1)), np.tile(-e1, (3, 1))) == pytest.approx(2.0)


def test_gd_matches_direct_norm(rng):
    h1 = rng.standard_normal((5, 4))
    h2 = rng.standard_normal((3, 4))
    expected = np.linalg.norm(h1.mean(axis=0) - h2.mean(axis=0))
    assert stat_gd(h1, h2) == pytest.approx(expected, rel=1e-14)


def test_gd_rejects_dimension_mismatch(rng):
    with pytest.raises(ValueError):
        stat_gd(rng.standard_normal((3, 4)), rng.standard_normal((3, 5)))


# --- stop rules -------------------------------------------------------------------


def run_rule(name, values, patience=5):
    rule = BaselineStopRule(name=BaselineName(name), patience=patience)
    prev = None
    for t, cur in enumerate(values, start=1):
        if rule_step(rule, prev, cur) is Decision.STOP:
            return t
        prev = cur
    return None


def test_gd_rule_stops_on_fifth_increase():
    values = [1, 2, 1, 2, 1, 2, 1, 2, 1, 2]
    assert run_rule("gd", values) == 10


def test_decrease_rules_stop_on_fifth_decrease():
    values = [10, 9, 10, 8, 10, 7, 10, 6, 10, 5]
    for name in ("gsnr", "sign", "cos"):
        assert run_rule(name, values) == 10


def test_eb_rule_stops_when_positive():
    assert run_rule("eb", [-3.0, -1.0, 0.2]) == 3
    assert run_rule("eb", [0.5]) == 1


def test_constant_sequence_never_stops():
    for name in ("gd", "gsnr", "sign", "cos"):
        assert run_rule(name, [1.0] * 50) is None
    assert run_rule("eb", [-1.0] * 50) is None


def test_rules_never_stop_before_patience_adverse_moves():
    # 4 increases then flat: below the patience threshold
    assert run_rule("gd", [1, 2, 3, 4, 5] + [5] * 20) is None
    # cumulative (not consecutive) counting: interleaved favourable moves
    assert run_rule("gd", [1, 2, 1, 2, 1, 2, 1, 2, 1]) is None


def test_rule_rejects_observation_after_stop():
    rule = BaselineStopRule(name=BaselineName.EB)
    assert rule_step(rule, None, 1.0) is Decision.STOP
    with pytest.raises(RuntimeError):
        rule_step(rule, 1.0, 2.0)


def test_rule_custom_patience():
    assert run_rule("gd", [1, 2, 3], patience=2) == 3
