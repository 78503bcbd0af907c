import math
import warnings

import numpy as np
import pytest

from hintedolo.adversaries import (AdversaryConfig, ConstructionError, generate, good_hint,
                                   lq_comparator_certificate, orthogonal_certificate_value,
                                   planar_certificate, planar_certificate_value)
from hintedolo.spaces import DomainError, SpaceSpec, norm, pairing


def cfg(kind, T, **kw):
    return AdversaryConfig(kind=kind, T=T, **kw)


@pytest.mark.parametrize("kw", [dict(kind="nope", T=3), dict(kind="bernoulli", T=-1),
                                dict(kind="bernoulli", T=3, B=4), dict(kind="synthetic", T=3, q=1.5),
                                dict(kind="synthetic", T=3, bad_fraction=1.5),
                                dict(kind="synthetic", T=3, seed=-1),
                                dict(kind="lq_orthogonal", T=3, dim=3),
                                dict(kind="lq_planar", T=3, dim=3),
                                dict(kind="bernoulli", T=3, dim=2),
                                dict(kind="front_loaded", T=3, dim=1)])
def test_config_validation(kw):
    with pytest.raises(DomainError):
        AdversaryConfig(**kw)


def test_default_dims():
    assert cfg("lq_orthogonal", 7).dim == 8
    assert cfg("front_loaded", 7).dim == 2
    assert cfg("synthetic", 7).dim == 5
    assert cfg("front_loaded", 7, dim=4).dim == 4


def test_front_loaded_examples():
    s = generate(cfg("front_loaded", 10, B=0))
    H, C = s.arrays()
    np.testing.assert_array_equal(H, np.tile([1.0, 0.0], (10, 1)))
    np.testing.assert_array_equal(C, H)
    s = generate(cfg("front_loaded", 10, B=10, seed=4))
    H, C = s.arrays()
    np.testing.assert_array_equal(H, np.tile([0.0, 1.0], (10, 1)))
    assert set(np.abs(C[:, 0])) == {1.0} and np.all(C[:, 1] == 0)
    s = generate(cfg("front_loaded", 20, B=7, seed=1))
    H, C = s.arrays()
    z = C[:7].sum(0)
    np.testing.assert_array_equal(s.extras["z"][0], z)
    np.testing.assert_array_equal(H[7:], np.tile(z / np.linalg.norm(z), (13, 1)))
    np.testing.assert_array_equal(C[7:], H[7:])


def test_front_loaded_second_moment():
    s = generate(cfg("front_loaded", 400, B=400, seed=3), replicas=1000)
    z2 = np.sum(s.extras["z"] ** 2, -1)
    assert abs(z2.mean() - 400) <= 0.05 * 400
    assert np.abs(s.extras["z"][:, 0]).mean() >= 0.5 * 20


def test_bernoulli_examples():
    s = generate(cfg("bernoulli", 100, B=10, seed=2), replicas=1000)
    C = s.C[..., 0]
    assert set(np.round(np.unique(C), 12)) <= {-0.9, 0.1}
    assert np.all(s.H == 1.0)
    assert abs(C.mean()) <= 3 * C.std() / math.sqrt(C.size)
    assert abs((C < 0).sum(0).mean() - 10) <= 0.5
    assert np.all(generate(cfg("bernoulli", 50, B=0)).C == 0)


def test_bernoulli_warns_on_large_budget():
    with pytest.warns(UserWarning):
        generate(cfg("bernoulli", 10, B=5))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        generate(cfg("bernoulli", 100, B=25))


@pytest.mark.parametrize("q", [2.0, 3.0, 4.0])
def test_lq_orthogonal_rounds(q):
    s = generate(cfg("lq_orthogonal", 12, q=q, seed=5))
    spec = SpaceSpec(q=q, dim=13)
    for t, (h, c) in enumerate(s, 1):
        assert norm(c, spec.p) == pytest.approx(1.0, abs=1e-15)
        assert pairing(c, h) == pytest.approx(2 ** (-1 / spec.p)) and pairing(c, h) >= 0.5
        assert np.count_nonzero(c) == 2 and c[t] != 0
    H, C = s.arrays()
    assert H.shape == (12, 13)
    again = generate(cfg("lq_orthogonal", 12, q=q, seed=5)).arrays()
    np.testing.assert_array_equal(C, again[1])


def test_lq_planar_rounds():
    s = generate(cfg("lq_planar", 50, q=3, seed=2))
    H, C = s.arrays()
    np.testing.assert_array_equal(H, np.tile([1.0, 0.0], (50, 1)))
    np.testing.assert_allclose(norm(C, 1.5), 1.0)
    assert np.all(np.sum(C * H, -1) >= 0.5)
    np.testing.assert_array_equal(np.sign(C[:, 1]), s.signs[0])


@pytest.mark.parametrize("q", [2.0, 3.0])
def test_synthetic_properties(q):
    spec = SpaceSpec(q=q, dim=5)
    s = generate(cfg("synthetic", 2000, q=q, alpha=0.3, bad_fraction=0.25, seed=8), replicas=4)
    H, C = s.arrays()
    assert np.max(norm(C, spec.p)) <= 1 + 1e-12
    assert np.max(norm(H, q)) <= 1 + 1e-12
    corr = np.sum(C * H, -1)
    bad = s.extras["bad"].T
    assert np.all(corr[bad] < 0)
    assert np.all(corr[~bad] >= 0.3 * norm(C, spec.p)[~bad] ** 2 - 1e-12)
    assert abs(bad.mean() - 0.25) < 0.02


def test_synthetic_examples():
    spec = SpaceSpec(q=2, dim=5)
    s = generate(cfg("synthetic", 100, alpha=1.0, seed=1))
    H, C = s.arrays()
    np.testing.assert_allclose(H, C / norm(C, 2)[:, None], atol=1e-15)
    s = generate(cfg("synthetic", 100, bad_fraction=1.0, seed=1))
    H, C = s.arrays()
    assert np.all(np.sum(H * C, -1) < 0)
    bf = generate(cfg("synthetic", 10_000, bad_fraction=0.1, seed=3), replicas=5).extras["bad"]
    assert abs(bf.mean() - 0.1) <= 0.01
    with pytest.raises(ConstructionError):
        generate(cfg("synthetic", 10, alpha=1.5))
    with pytest.raises(ConstructionError):
        good_hint(np.ones(2) / 2, 0.0, np.zeros(2), spec)


def test_replicas_are_batch_independent():
    c = cfg("synthetic", 30, bad_fraction=0.2, seed=11)
    batch = generate(c, replicas=(0, 1, 2))
    single = generate(c, replicas=(2,))
    np.testing.assert_array_equal(batch.H[:, 2], single.H[:, 0])
    np.testing.assert_array_equal(batch.replica(2).arrays()[1], single.arrays()[1])
    other = generate(AdversaryConfig("synthetic", 30, bad_fraction=0.2, seed=12))
    assert not np.array_equal(other.C, single.C)


def test_stream_round_access():
    s = generate(cfg("lq_planar", 5, q=3, seed=0))
    assert len(s) == 5
    with pytest.raises(IndexError):
        s.round(0)
    with pytest.raises(IndexError):
        s.round(6)


def test_orthogonal_certificate_example():
    signs = np.array([1, -1, 1, 1, -1, -1, 1, 1], dtype=float)
    u, v = lq_comparator_certificate(signs, 8, 3.0)
    assert u[0] == pytest.approx(0.823223, abs=1e-6)
    np.testing.assert_allclose(np.abs(u[1:]), 0.353553, atol=1e-6)
    assert np.sum(np.abs(u) ** 3) == pytest.approx(0.9115, abs=1e-4)
    assert v == pytest.approx(9.41421, abs=1e-5)
    assert v == pytest.approx(orthogonal_certificate_value(8, 3.0), abs=1e-9)
    un, _ = lq_comparator_certificate(-np.ones(8), 8, 3.0)
    up, _ = lq_comparator_certificate(np.ones(8), 8, 3.0)
    assert norm(un, 3) == norm(up, 3)


@pytest.mark.parametrize("q", [2.5, 3.0, 4.0, 6.0])
@pytest.mark.parametrize("T", [8, 100, 10_000])
def test_certificates_feasible_and_match(q, T):
    signs = np.random.default_rng(T).choice([-1.0, 1.0], size=T)
    u, v = lq_comparator_certificate(signs, T, q)
    assert norm(u, q) <= 1
    assert v == pytest.approx(orthogonal_certificate_value(T, q), abs=1e-9)
    u, v = planar_certificate(signs, T, q)
    assert norm(u, q) <= 1
    assert v == pytest.approx(planar_certificate_value(T, q, signs.sum()), abs=1e-9)


def test_certificate_errors_and_ties():
    with pytest.raises(DomainError):
        lq_comparator_certificate(np.ones(4), 4, 2.0)
    with pytest.raises(DomainError):
        planar_certificate(np.ones(3), 4, 3.0)
    with pytest.raises(DomainError):   # T = 1 is too short for a feasible certificate
        lq_comparator_certificate(np.ones(1), 1, 3.0)
    u, _ = planar_certificate(np.array([1.0, -1.0, 1.0, -1.0]), 4, 3.0)
    assert u[1] > 0
