import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hintedolo.spaces import (INF, DomainError, SpaceSpec, ball_argmin, best_comparator,
                              dual_exponent, dual_maximizer, is_feasible, lq_modulus, norm,
                              pairing)


def objective(C, A, x, q):
    return pairing(C, x) + (A / q) * np.sum(np.abs(x) ** q, axis=-1)


def bisect_argmin(C, A, q, tol=1e-13):
    """Oracle: KKT point with the ball multiplier found by bisection."""
    C = np.asarray(C, dtype=float)

    def point(nu):
        s = A + nu
        return -np.sign(C) * (np.abs(C) / s) ** (1.0 / (q - 1.0))

    if A > 0 and norm(point(0.0), q) <= 1:
        return point(0.0)
    lo, hi = 0.0, 1.0
    while norm(point(hi), q) > 1:
        hi *= 2
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if norm(point(mid), q) > 1:
            lo = mid
        else:
            hi = mid
    return point(hi)


def test_norm_examples():
    assert norm([3.0, 4.0], 2) == 5.0
    assert norm([0.0, 0.0, 0.0], 3) == 0.0
    assert norm([1.0, 1.0], 3) == pytest.approx(2 ** (1 / 3), rel=1e-15)
    assert norm([1.0, -7.0, 2.0], INF) == 7.0
    assert norm([1.0, -7.0, 2.0], 1) == 10.0


def test_norm_matches_summation_oracle():
    rng = np.random.default_rng(1)
    for e in (1.5, 2.5, 3.0, 7.0):
        v = rng.normal(size=9)
        assert norm(v, e) == pytest.approx(sum(abs(x) ** e for x in v) ** (1 / e), rel=1e-13)


def test_norm_rejects_nonfinite():
    with pytest.raises(DomainError):
        norm([1.0, np.nan])
    with pytest.raises(DomainError):
        norm([1.0, 2.0], 0.5)


def test_norm_batched():
    v = np.arange(12.0).reshape(2, 3, 2)
    out = norm(v, 3)
    assert out.shape == (2, 3)
    assert out[1, 2] == pytest.approx(norm(v[1, 2], 3))


def test_norm_no_overflow():
    assert norm([1e200, 1e200], 4) == pytest.approx(1e200 * 2 ** 0.25)


def test_spacespec_defaults():
    s = SpaceSpec()
    assert (s.q, s.p, s.mu, s.dim) == (2.0, 2.0, 1.0, 2)
    s3 = SpaceSpec(q=3, dim=4)
    assert s3.p == pytest.approx(1.5)
    assert 0 < s3.mu <= 1
    assert not s3.is_hilbert and SpaceSpec.euclidean(3).is_hilbert


@pytest.mark.parametrize("kw", [dict(q=1.5), dict(q=math.inf), dict(dim=0), dict(mu=0.0),
                                dict(mu=-1.0), dict(dim=2.5)])
def test_spacespec_rejects(kw):
    with pytest.raises(DomainError):
        SpaceSpec(**kw)


def test_dual_exponent():
    assert dual_exponent(2) == 2
    assert dual_exponent(4) == pytest.approx(4 / 3)
    assert dual_exponent(INF) == 1.0
    with pytest.raises(DomainError):
        dual_exponent(1.0)


@pytest.mark.parametrize("q", [2.5, 3.0, 4.0, 6.0])
def test_lq_modulus_is_valid_convexity_constant(q):
    """||y||^q/q >= ||x||^q/q + <grad, y - x> + (mu/q)||y - x||^q on random pairs."""
    mu = lq_modulus(q)
    rng = np.random.default_rng(int(q * 10))
    x = rng.normal(size=(20000, 3))
    y = rng.normal(size=(20000, 3))
    grad = np.sign(x) * np.abs(x) ** (q - 1)
    lhs = np.sum(np.abs(y) ** q, -1) / q
    rhs = np.sum(np.abs(x) ** q, -1) / q + np.sum(grad * (y - x), -1) \
        + mu / q * np.sum(np.abs(y - x) ** q, -1)
    assert np.all(lhs >= rhs - 1e-9 * (1 + np.abs(lhs)))
    # and it is the largest such constant: 1% more fails somewhere on the 1-d family
    s = np.linspace(-50, -1, 200001)
    ratio = (np.abs(1 + s) ** q - 1 - q * s) / np.abs(s) ** q
    assert ratio.min() < mu * 1.01


def test_ball_argmin_examples():
    e = SpaceSpec.euclidean(2)
    np.testing.assert_allclose(ball_argmin([2.0, 0.0], 1.0, e), [-1.0, 0.0])
    np.testing.assert_allclose(ball_argmin([0.5, 0.0], 1.0, e), [-0.5, 0.0])
    np.testing.assert_array_equal(ball_argmin([0.0, 0.0], 3.0, e), [0.0, 0.0])
    np.testing.assert_array_equal(ball_argmin([0.0, 0.0], 0.0, e), [0.0, 0.0])


def test_ball_argmin_grid_search_disk():
    e = SpaceSpec.euclidean(2)
    th = np.linspace(0, 2 * np.pi, 721)
    rad = np.linspace(0, 1, 401)
    pts = (rad[:, None, None] * np.stack([np.cos(th), np.sin(th)], -1)[None]).reshape(-1, 2)
    x = ball_argmin([2.0, 0.0], 1.0, e)
    assert objective([2.0, 0.0], 1.0, x, 2) <= objective([2.0, 0.0], 1.0, pts, 2).min() + 1e-12


def test_ball_argmin_negative_A():
    with pytest.raises(DomainError):
        ball_argmin([1.0, 0.0], -1.0, SpaceSpec())


@pytest.mark.parametrize("q", [2.0, 2.5, 3.0, 4.0])
def test_ball_argmin_matches_bisection_oracle(q):
    spec = SpaceSpec(q=q, dim=4)
    rng = np.random.default_rng(7)
    for _ in range(200):
        C = rng.normal(size=4) * 10 ** rng.uniform(-2, 1)
        A = float(10 ** rng.uniform(-3, 1))
        x = ball_argmin(C, A, spec)
        ref = bisect_argmin(C, A, q)
        np.testing.assert_allclose(x, ref, atol=1e-9)


@settings(max_examples=60, deadline=None)
@given(q=st.sampled_from([2.0, 2.5, 3.0, 4.0]), seed=st.integers(0, 2 ** 32 - 1))
def test_ball_argmin_optimality_certificate(q, seed):
    rng = np.random.default_rng(seed)
    spec = SpaceSpec(q=q, dim=3)
    C = rng.normal(size=3) * 10 ** rng.uniform(-2, 1)
    A = float(rng.choice([0.0, 10 ** rng.uniform(-3, 1)]))
    x = ball_argmin(C, A, spec)
    assert is_feasible(x, spec)
    cand = rng.normal(size=(1000, 3))
    cand /= np.maximum(norm(cand, q), 1.0)[:, None] * rng.uniform(1.0, 3.0, size=(1000, 1))
    assert objective(C, A, x, q) <= objective(C, A, cand, q).min() + 1e-8


def test_ball_argmin_batched():
    spec = SpaceSpec(q=3, dim=2)
    C = np.array([[2.0, 0.0], [0.1, -0.2]])
    A = np.array([1.0, 5.0])
    out = ball_argmin(C, A, spec)
    for i in range(2):
        np.testing.assert_allclose(out[i], ball_argmin(C[i], A[i], spec))


def test_best_comparator_examples():
    e = SpaceSpec.euclidean(2)
    u, v = best_comparator([3.0, 4.0], e)
    np.testing.assert_allclose(u, [-0.6, -0.8])
    assert v == pytest.approx(-5.0)
    u, v = best_comparator([0.0, 0.0], e)
    np.testing.assert_array_equal(u, [0.0, 0.0])
    assert v == 0.0 and not np.signbit(u).any()
    for q in (2.0, 3.0, 5.0):
        u, v = best_comparator([1.0, 0.0, 0.0], SpaceSpec(q=q, dim=3))
        np.testing.assert_allclose(u, [-1.0, 0.0, 0.0])
        assert v == pytest.approx(-1.0)


def test_best_comparator_grid_search_circle():
    th = np.linspace(0, 2 * np.pi, 100001)
    circle = np.stack([np.cos(th), np.sin(th)], -1)
    assert (circle @ np.array([3.0, 4.0])).min() == pytest.approx(-5.0, abs=1e-8)


@settings(max_examples=100, deadline=None)
@given(q=st.sampled_from([2.0, 2.5, 3.0, 4.0]), seed=st.integers(0, 2 ** 32 - 1))
def test_duality_and_holder(q, seed):
    rng = np.random.default_rng(seed)
    spec = SpaceSpec(q=q, dim=5)
    z = rng.normal(size=5) * 10 ** rng.uniform(-3, 3)
    u, v = best_comparator(z, spec)
    assert norm(u, q) == pytest.approx(1.0, abs=1e-12)
    assert pairing(z, u) == pytest.approx(-norm(z, spec.p), rel=1e-9)
    assert v == pytest.approx(-norm(z, spec.p), rel=1e-12)
    x = dual_maximizer(z, spec)
    assert pairing(z, x) == pytest.approx(norm(z, spec.p), rel=1e-9)
    c, y = rng.normal(size=(2, 5))
    assert abs(pairing(c, y)) <= norm(c, spec.p) * norm(y, q) + 1e-9


def test_is_feasible_tolerance():
    spec = SpaceSpec(q=3, dim=2)
    assert is_feasible([1.0, 0.0], spec)
    assert is_feasible([1.0 + 5e-10, 0.0], spec)
    assert not is_feasible([1.0 + 1e-8, 0.0], spec)
