import itertools
import math

import numpy as np
import pytest

from hintedolo.adversaries import AdversaryConfig, generate
from hintedolo.harness.audit import audit_sets
from hintedolo.hinted_learner import HintedLearner, ProtocolError
from hintedolo.spaces import DomainError
from hintedolo.unconstrained import (HintCombiner, ParamFreeLearner, correlation_margins,
                                     f_bound, relaxed_bad_set, relaxed_bad_set_from_margins)

e1, e2 = np.eye(2)


def run_base(costs, eps=1.0):
    lr = ParamFreeLearner(len(costs[0]), eps)
    xs = []
    for c in costs:
        xs.append(lr.predict())
        lr.update(c)
    return np.array(xs)


def test_base_starts_at_zero_and_stays_with_zero_costs():
    xs = run_base([np.zeros(2)] * 20)
    assert np.all(xs == 0)


def test_base_constant_cost_example():
    costs = [e1] * 100
    xs = run_base(costs)
    loss = float(np.sum(xs[:, 0]))
    assert loss <= 1.0 + 1e-12                      # regret vs 0 at most epsilon
    regret = loss - (-100.0)                        # against u = -e1
    # (1 + 4 C)^4.5 and (2 + 8 C)^9 at C = 100
    f = 1 + 8 * math.log(8 * 401 ** 4.5 + 1) + 4 * math.sqrt(100 * (2 + math.log(5 * 802 ** 9 + 1)))
    assert f_bound(1.0, 100.0, 1.0) == pytest.approx(f)
    assert regret <= f


@pytest.mark.parametrize("seed", range(10))
def test_base_parameter_free_against_zero(seed):
    rng = np.random.default_rng(seed)
    c = rng.normal(size=(500, 3)) + rng.normal(size=3) * rng.random()
    c /= np.maximum(np.linalg.norm(c, axis=1), 1.0)[:, None]
    for eps in (0.1, 1.0, 10.0):
        xs = run_base(list(c), eps)
        assert np.sum(xs * c) <= eps + 1e-9


def test_base_protocol():
    lr = ParamFreeLearner(2)
    with pytest.raises(ProtocolError):
        lr.update(e1)
    lr.predict()
    with pytest.raises(ProtocolError):
        lr.predict()
    with pytest.raises(DomainError):
        ParamFreeLearner(2, epsilon=0.0)


def test_wealth_stays_nonnegative_under_huge_bets():
    lr = ParamFreeLearner(1)
    for _ in range(3000):
        lr.predict()
        lr.update(np.array([-1.0]))
    assert np.isfinite(lr.wealth) and lr.wealth > 0
    lr.predict()
    lr.update(np.array([1.0]))
    assert lr.wealth >= 0


def test_combiner_examples():
    comb = HintCombiner(2)
    comb.vector_learner.predict = lambda: np.array([1.0, 0.0])
    comb.scalar_learner.predict = lambda: np.array([0.5])
    np.testing.assert_allclose(comb.predict(e2), [1.0, -0.5])
    comb = HintCombiner(2)
    comb.vector_learner.predict = lambda: np.zeros(2)
    comb.scalar_learner.predict = lambda: np.array([1.0])
    np.testing.assert_allclose(comb.predict(e1), -e1)
    np.testing.assert_allclose(HintCombiner(2).predict(e1), [0.0, 0.0])


def test_combiner_protocol_and_domain():
    comb = HintCombiner(2)
    with pytest.raises(ProtocolError):
        comb.update(e1)
    with pytest.raises(DomainError):
        comb.predict(np.array([1.0, 1.0]))
    comb.predict(e1)
    with pytest.raises(ProtocolError):
        comb.predict(e1)


def test_combiner_identity_and_zero_regret():
    cfg = AdversaryConfig("front_loaded", 600, B=300, seed=2)
    tr = HintCombiner(2, 1.0, (8,)).run(generate(cfg, 8, batched=True))
    base, y = tr.extras["base_loss"], tr.extras["y"]
    lhs = tr.loss
    rhs = base - y * tr.corr
    assert np.all(np.abs(lhs - rhs) <= 1e-9 * np.maximum(1.0, np.abs(base) + np.abs(y * tr.corr)))
    assert np.all(tr.total_loss() <= 2.0 + 1e-9)


def test_f_bound_examples():
    assert f_bound(0.0, 50.0, 2.0) == 2.0
    assert f_bound(1.0, 0.0, 1.0, 1.0) == pytest.approx(1 + 8 * math.log(9))
    assert f_bound(1.0, 0.0, 1.0) == pytest.approx(18.5778, abs=1e-3)
    assert f_bound(2.0, 10.0, 1.0) > f_bound(1.0, 10.0, 1.0)
    assert f_bound(1.0, 20.0, 1.0) > f_bound(1.0, 10.0, 1.0)
    with pytest.raises(DomainError):
        f_bound(1.0, 1.0, 0.0)
    with pytest.raises(DomainError):
        f_bound(-1.0, 1.0, 1.0)


def test_relaxed_bad_set_examples():
    assert relaxed_bad_set_from_margins([0.5, -0.2, -0.4]) == [2]
    assert relaxed_bad_set_from_margins([0.1, 0.0, 2.0]) == []
    # 1.2 - 0.9 - 0.3 is slightly negative in floating point but should count as met
    assert relaxed_bad_set_from_margins([1.2, -0.9, -0.3, -2.0]) == [3]
    assert relaxed_bad_set_from_margins([-0.1, -0.2, -0.3]) == [0, 1, 2]
    assert relaxed_bad_set_from_margins([]) == []
    assert relaxed_bad_set_from_margins([-1.0, -1.0, 1.5]) == [0]   # ties: lowest index


def brute_min(m):
    m = np.asarray(m)
    for k in range(len(m) + 1):
        for S in itertools.combinations(range(len(m)), k):
            keep = np.ones(len(m), bool)
            keep[list(S)] = False
            if m[keep].sum() >= 0:
                return k
    return len(m)


def test_relaxed_bad_set_minimal_small():
    rng = np.random.default_rng(1)
    for _ in range(200):
        m = rng.normal(size=int(rng.integers(1, 9))) - rng.random()
        assert len(relaxed_bad_set_from_margins(m)) == brute_min(m)


def test_margins_snap_ties():
    m = correlation_margins([0.5, 0.5 + 1e-14, 0.1], [1.0, 1.0, 1.0], 0.5)
    assert m[0] == 0.0 and m[1] == 0.0 and m[2] < 0


def test_relaxed_set_never_exceeds_bad_alpha():
    cfg = AdversaryConfig("synthetic", 400, bad_fraction=0.3, seed=4)
    tr = HintedLearner(cfg.spec).run(generate(cfg))
    for alpha in (0.1, 0.5, 1.0):
        _, bad, _ = audit_sets(tr, alpha)
        assert len(relaxed_bad_set(tr, alpha)) <= len(bad)
    with pytest.raises(DomainError):
        relaxed_bad_set(tr, 0.0)
