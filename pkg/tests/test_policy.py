import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from treepg.features import SparseFeatureVector
from treepg.optim import CenteredRMSProp
from treepg.policy import (PolicySpec, ce_batch_gradient, ce_gradient, ce_loss, entry_probs, extend, greedy_action,
                           logits, normalized_entropy, sample_action, softmax, softmax_jacobian, tspg_gradient,
                           tspg_surrogate)

from conftest import random_instance, synthetic_entry


def _central_difference(f, theta, h=1e-6):
    g = np.zeros_like(theta)
    for i in range(len(theta)):
        up, down = theta.copy(), theta.copy()
        up[i] += h
        down[i] -= h
        g[i] = (f(up) - f(down)) / (2 * h)
    return g


def test_logits_examples():
    f = [SparseFeatureVector([0, 1], 2), SparseFeatureVector([], 2)]
    ps = PolicySpec(np.array([1.0, -2.0]), np.array([0.5, 0.0]))
    assert logits(ps, f).tolist() == [-0.5, 0.0]
    plain = PolicySpec(np.array([1.0, -2.0]))
    assert np.array_equal(logits(PolicySpec(plain.base, np.zeros(2)), f), logits(plain, f))
    with pytest.raises(ValueError):
        logits(PolicySpec(np.zeros(1)), f)
    with pytest.raises(ValueError):
        PolicySpec(np.zeros(2), np.zeros(3))


def test_softmax_examples():
    assert np.allclose(softmax(np.zeros(4)), 0.25)
    assert softmax(np.array([3.0])).tolist() == [1.0]
    p = softmax(np.array([math.log(2), 0.0]))
    assert abs(p[0] - 2 / 3) < 1e-12 and abs(p[1] - 1 / 3) < 1e-12
    assert np.all(np.isfinite(softmax(np.array([1000.0, -1000.0]))))


def test_ce_gradient_examples():
    e = synthetic_entry([[0], [1]], 2, visit=[1.0, 0.0])
    assert np.allclose(ce_gradient(PolicySpec.zeros(2), e), [-0.5, 0.5])
    matched = synthetic_entry([[0], [1]], 2, visit=softmax(np.array([0.3, -0.2])))
    assert np.allclose(ce_gradient(PolicySpec(np.array([0.3, -0.2])), matched), 0.0, atol=1e-15)
    bad = synthetic_entry([[0], [1]], 2, visit=[0.5, 0.4])
    with pytest.raises(ValueError):
        ce_gradient(PolicySpec.zeros(2), bad)


def test_tspg_gradient_examples():
    e = synthetic_entry([[0], [1]], 2, q=[1.0, -1.0])
    assert np.allclose(tspg_gradient(PolicySpec.zeros(2), [e]), [0.5, -0.5])
    flat = synthetic_entry([[0, 2], [1], [2]], 3, q=[0.4, 0.4, 0.4])
    assert np.allclose(tspg_gradient(PolicySpec(np.array([0.2, -1.0, 0.7])), [flat]), 0.0, atol=1e-15)
    with pytest.raises(ValueError):
        tspg_gradient(PolicySpec.zeros(2), [])
    with pytest.raises(ValueError):
        tspg_gradient(PolicySpec.zeros(2), [synthetic_entry([[0], [1]], 2)])


def test_gradients_match_finite_differences():
    rng = np.random.default_rng(1)
    for _ in range(150):
        entry, n = random_instance(rng)
        base = rng.normal(0, 1, n)
        off = rng.normal(0, 1, n)
        g_ce = ce_gradient(PolicySpec(base, off), entry)
        fd_ce = _central_difference(lambda o: ce_loss(PolicySpec(base, o), entry), off)
        assert np.allclose(g_ce, fd_ce, rtol=1e-5, atol=1e-7)
        g_pg = tspg_gradient(PolicySpec(base, off), [entry])
        fd_pg = _central_difference(lambda o: tspg_surrogate(PolicySpec(base, o), entry), off)
        assert np.allclose(g_pg, fd_pg, rtol=1e-5, atol=1e-7)


def test_softmax_jacobian_matches_finite_differences():
    rng = np.random.default_rng(2)
    for _ in range(100):
        entry, n = random_instance(rng)
        theta = rng.normal(0, 1, n)
        jac = softmax_jacobian(entry_probs(PolicySpec(theta), entry), entry.features, n)
        for a in range(len(entry.actions)):
            fd = _central_difference(lambda t: entry_probs(PolicySpec(t), entry)[a], theta)
            assert np.allclose(jac[a], fd, rtol=1e-6, atol=1e-9)


def test_batch_gradient_is_mean():
    rng = np.random.default_rng(3)
    entries = [random_instance(rng, max_features=5)[0] for _ in range(4)]
    n = max(e.dimension for e in entries)
    ps = PolicySpec(rng.normal(0, 1, n))
    expected = np.mean([ce_gradient(ps, e) for e in entries], axis=0)
    assert np.allclose(ce_batch_gradient(ps, entries), expected)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-30, 30), min_size=1, max_size=30))
def test_softmax_is_a_distribution(z):
    p = softmax(np.array(z))
    assert abs(p.sum() - 1) < 1e-12 and np.all(p >= 0)
    assert 0.0 <= normalized_entropy(p) <= 1.0


def test_sampling():
    rng = np.random.default_rng(0)
    assert all(sample_action(np.array([1.0, 0.0, 0.0]), rng) == 0 for _ in range(100))
    a = [sample_action(np.full(4, 0.25), np.random.default_rng(8)) for _ in range(3)]
    assert a == [sample_action(np.full(4, 0.25), np.random.default_rng(8)) for _ in range(3)]
    p = np.array([0.1, 0.6, 0.3])
    draws = 100_000
    counts = np.bincount([sample_action(p, rng) for _ in range(draws)], minlength=3)
    sigma = np.sqrt(draws * p * (1 - p))
    assert np.all(np.abs(counts - draws * p) < 3 * sigma)


def test_greedy():
    assert greedy_action(np.array([0.2, 0.5, 0.3])) == 1
    assert greedy_action(np.array([0.5, 0.5])) == 0
    assert greedy_action(np.full(7, 1 / 7)) == 0


def test_normalized_entropy():
    assert normalized_entropy(np.full(5, 0.2)) == pytest.approx(1.0)
    assert normalized_entropy(np.array([1.0, 0.0])) == 0.0
    assert normalized_entropy(np.array([1.0])) == 0.0


def test_extend():
    assert extend(np.array([1.0]), 3).tolist() == [1.0, 0.0, 0.0]


def test_rmsprop_examples():
    opt = CenteredRMSProp()
    theta = np.array([0.3, -0.2])
    assert np.array_equal(opt.step(theta, np.zeros(2)), theta)
    opt = CenteredRMSProp()
    new = opt.step(np.zeros(1), np.ones(1))
    assert new[0] == pytest.approx(-0.005 / math.sqrt(0.09 + 1e-8), rel=1e-12)
    assert new[0] == pytest.approx(-0.0166667, abs=1e-7)
    second = opt.step(new, np.ones(1))
    step2 = new[0] - second[0]
    assert np.isfinite(step2) and step2 > 0


def test_rmsprop_rejects_non_finite():
    opt = CenteredRMSProp()
    theta = np.zeros(2)
    opt.step(theta, np.ones(2))
    before = opt.mom.copy()
    with pytest.raises(FloatingPointError):
        opt.step(theta, np.array([1.0, np.nan]))
    assert np.array_equal(opt.mom, before)


def test_rmsprop_resize():
    opt = CenteredRMSProp()
    opt.step(np.zeros(2), np.ones(2))
    out = opt.step(np.zeros(3), np.array([1.0, 1.0, 0.0]))
    assert out[2] == 0.0 and len(opt.sq) == 3


def test_saturated_feature_pathology():
    # general loss feature 0 is strongly negative; winning feature 1 is new (weight 0) and always co-active with it
    entry = synthetic_entry([[0, 1], [], [], []], 2, visit=[1.0, 0.0, 0.0, 0.0], q=[1.0, -0.2, -0.2, -0.2])
    base = np.array([-20.0, 0.0])
    pg = tspg_gradient(PolicySpec(base, np.zeros(2)), [entry])
    ce = ce_gradient(PolicySpec(base), entry)
    assert abs(pg[1]) < 1e-3 and abs(ce[1]) > 1e-1
