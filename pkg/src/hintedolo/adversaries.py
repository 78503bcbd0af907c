"""Seeded hint/cost sequences: lower-bound constructions and a synthetic workbench.

Randomness comes from numpy's Philox counter-based generator.  Replica i of a
config with seed s draws from ``Philox(SeedSequence([s, i]))``, so a replica
is the same stream whether it is generated alone or inside a batch.  Draw
order per replica is fixed and listed in each generator's docstring.

Costs that are sums of two unit axis vectors are divided by 2^{1/p} so every
cost has dual norm exactly 1.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .spaces import DomainError, SpaceSpec, dual_exponent, dual_maximizer, norm, pairing

KINDS = ("front_loaded", "bernoulli", "lq_orthogonal", "lq_planar", "synthetic")
DEFAULT_DIM = {"front_loaded": 2, "bernoulli": 1, "lq_planar": 2, "synthetic": 5}
DEFAULT_DRIFT = 2.0


class ConstructionError(DomainError):
    """The requested hint model cannot be realized."""


@dataclass(frozen=True)
class AdversaryConfig:
    kind: str
    T: int
    B: int = 0
    q: float = 2.0
    alpha: float = 0.5
    bad_fraction: float = 0.0
    seed: int = 0
    dim: int | None = None
    drift: float = DEFAULT_DRIFT

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown adversary kind {self.kind!r}; expected one of {KINDS}")
        if int(self.T) != self.T or self.T < 0:
            raise DomainError(f"T must be a nonnegative integer, got {self.T}")
        if int(self.B) != self.B or not 0 <= self.B <= self.T:
            raise DomainError(f"B must be an integer in [0, T], got {self.B}")
        if not self.q >= 2 or not math.isfinite(self.q):
            raise DomainError(f"q must be a finite real >= 2, got {self.q}")
        if not 0.0 <= self.bad_fraction <= 1.0:
            raise DomainError(f"bad_fraction must lie in [0, 1], got {self.bad_fraction}")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2 ** 64:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if not self.drift >= 0:
            raise DomainError(f"drift must be nonnegative, got {self.drift}")
        object.__setattr__(self, "T", int(self.T))
        object.__setattr__(self, "B", int(self.B))
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "q", float(self.q))
        dim = self.resolved_dim()
        object.__setattr__(self, "dim", dim)

    def resolved_dim(self) -> int:
        if self.kind == "lq_orthogonal":
            want = self.T + 1
            if self.dim is not None and self.dim != want:
                raise DomainError(f"lq_orthogonal needs dim = T + 1 = {want}, got {self.dim}")
            return want
        dim = DEFAULT_DIM[self.kind] if self.dim is None else int(self.dim)
        if self.kind == "lq_planar" and dim != 2:
            raise DomainError(f"lq_planar needs dim = 2, got {dim}")
        if self.kind == "bernoulli" and dim != 1:
            raise DomainError(f"bernoulli is one-dimensional, got dim {dim}")
        if self.kind == "front_loaded" and dim < 2:
            raise DomainError(f"front_loaded needs dim >= 2, got {dim}")
        if dim < 1:
            raise DomainError(f"dim must be positive, got {dim}")
        return dim

    @property
    def spec(self) -> SpaceSpec:
        return SpaceSpec(q=self.q, dim=self.dim)

    def to_dict(self) -> dict:
        return asdict(self)


def replica_rng(seed: int, replica: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, replica])))


def _signs(rng, n):
    return rng.integers(0, 2, size=n).astype(float) * 2.0 - 1.0


@dataclass
class Stream:
    """A (hint, cost) sequence for one or more replicas.

    ``round(t)`` (t from 1) returns arrays of shape (dim,) for a single
    replica or (n, dim) for a batch.  Iteration yields the rounds in order.
    """

    config: AdversaryConfig
    replicas: tuple
    batched: bool
    H: np.ndarray | None = None
    C: np.ndarray | None = None
    signs: np.ndarray | None = None
    extras: dict = field(default_factory=dict)

    @property
    def T(self) -> int:
        return self.config.T

    @property
    def dim(self) -> int:
        return self.config.dim

    def __len__(self):
        return self.T

    def round(self, t: int):
        if not 1 <= t <= self.T:
            raise IndexError(f"round {t} outside 1..{self.T}")
        if self.H is not None:
            h, c = self.H[t - 1], self.C[t - 1]
        else:
            h, c = _orthogonal_round(self.config, self.signs[:, t - 1], t)
        if not self.batched:
            return h[0], c[0]
        return h, c

    def __iter__(self):
        for t in range(1, self.T + 1):
            yield self.round(t)

    def arrays(self):
        """Materialize (H, C) with shape (T, *batch, dim)."""
        if self.H is None:
            rows = [self.round(t) for t in range(1, self.T + 1)]
            shape = (0,) + ((len(self.replicas),) if self.batched else ()) + (self.dim,)
            if not rows:
                return np.zeros(shape), np.zeros(shape)
            return np.stack([r[0] for r in rows]), np.stack([r[1] for r in rows])
        if self.batched:
            return self.H, self.C
        return self.H[:, 0], self.C[:, 0]

    def replica(self, i: int) -> "Stream":
        k = self.replicas.index(i)
        return Stream(self.config, (i,), False,
                      None if self.H is None else self.H[:, k:k + 1],
                      None if self.C is None else self.C[:, k:k + 1],
                      None if self.signs is None else self.signs[k:k + 1],
                      {key: v[k:k + 1] for key, v in self.extras.items()})


def _normalizer(q: float) -> float:
    return 2.0 ** (1.0 / dual_exponent(q))


def gen_front_loaded(config: AdversaryConfig, replicas=(0,), batched=None) -> Stream:
    """B rounds of hint e_2 with cost +-e_1, then B+1..T with hint = cost = z/||z||.

    Draws: B fair signs.
    """
    T, B, d = config.T, config.B, config.dim
    n = len(replicas)
    H = np.zeros((T, n, d))
    C = np.zeros((T, n, d))
    S = np.zeros((n, B))
    for k, i in enumerate(replicas):
        S[k] = _signs(replica_rng(config.seed, i), B)
    H[:B, :, 1] = 1.0
    C[:B, :, 0] = S.T
    zsum = S.sum(axis=1)
    tail = np.where(zsum < 0, -1.0, 1.0)  # z/||z|| = sign(z_1) e_1, z = 0 falls back to e_1
    H[B:, :, 0] = tail
    C[B:, :, 0] = tail
    return Stream(config, tuple(replicas), _batched(batched, replicas), H, C,
                  extras={"z": np.stack([zsum, np.zeros(n)], axis=-1)})


def gen_bernoulli(config: AdversaryConfig, replicas=(0,), batched=None) -> Stream:
    """One-dimensional: hint 1, cost p - 1 w.p. p and p otherwise, p = B/T.

    Draws: T uniforms.
    """
    T, B = config.T, config.B
    if T and B > T / 4:
        warnings.warn(f"bernoulli lower bound assumes B <= T/4 (B={B}, T={T})", stacklevel=2)
    p = B / T if T else 0.0
    n = len(replicas)
    C = np.zeros((T, n, 1))
    for k, i in enumerate(replicas):
        u = replica_rng(config.seed, i).random(T)
        C[:, k, 0] = np.where(u < p, p - 1.0, p)
    H = np.ones((T, n, 1))
    return Stream(config, tuple(replicas), _batched(batched, replicas), H, C)


def gen_lq_orthogonal(config: AdversaryConfig, replicas=(0,), batched=None) -> Stream:
    """dim = T + 1; cost (e_0 +- e_t)/2^{1/p}, hint e_0.  Rounds are built on demand.

    Draws: T fair signs.
    """
    signs = np.stack([_signs(replica_rng(config.seed, i), config.T) for i in replicas]) \
        if replicas else np.zeros((0, config.T))
    return Stream(config, tuple(replicas), _batched(batched, replicas), signs=signs)


def _orthogonal_round(config, s, t):
    n = s.shape[0]
    h = np.zeros((n, config.dim))
    h[:, 0] = 1.0
    c = np.zeros((n, config.dim))
    c[:, 0] = 1.0
    c[:, t] = s
    return h, c / _normalizer(config.q)


def gen_lq_planar(config: AdversaryConfig, replicas=(0,), batched=None) -> Stream:
    """Costs (e_1 +- e_2)/2^{1/p}, hints e_1.

    Draws: T fair signs.
    """
    T, n = config.T, len(replicas)
    signs = np.zeros((n, T))
    for k, i in enumerate(replicas):
        signs[k] = _signs(replica_rng(config.seed, i), T)
    H = np.zeros((T, n, 2))
    H[:, :, 0] = 1.0
    C = np.zeros((T, n, 2))
    C[:, :, 0] = 1.0
    C[:, :, 1] = signs.T
    C /= _normalizer(config.q)
    return Stream(config, tuple(replicas), _batched(batched, replicas), H, C, signs=signs)


def good_hint(c, alpha: float, noise, spec: SpaceSpec):
    """alpha * dual_maximizer(c) + (1 - alpha) * (unit noise with <c, noise> = 0).

    Then <c, h> = alpha ||c||_p and ||h||_q <= alpha + (1 - alpha) = 1.
    """
    if not 0 < alpha <= 1:
        raise ConstructionError(f"alpha must lie in (0, 1] for hint mixing, got {alpha}")
    chat = dual_maximizer(c, spec)
    n = noise - pairing(c, noise)[..., None] * chat
    nn = np.asarray(norm(n, spec.q))[..., None]
    n = np.where(nn > 0, n / np.where(nn > 0, nn, 1.0), 0.0)
    return alpha * chat + (1.0 - alpha) * n


def gen_synthetic(config: AdversaryConfig, replicas=(0,), batched=None) -> Stream:
    """Drifting random costs with alpha-correlated hints, each round bad w.p. bad_fraction.

    c_t is the p-normalization of drift * v + g_t (v a random unit direction,
    g_t standard normal).  Good rounds get ``good_hint``; bad rounds get its
    negation, so <c_t, h_t> = -alpha ||c_t||_p < 0.

    Draws: v (dim normals), g (T x dim), hint noise (T x dim), T uniforms.
    """
    spec = config.spec
    T, d, n = config.T, config.dim, len(replicas)
    if not 0 < config.alpha <= 1:
        raise ConstructionError(f"synthetic hints need alpha in (0, 1], got {config.alpha}")
    G = np.zeros((T, n, d))
    Nz = np.zeros((T, n, d))
    bad = np.zeros((T, n), dtype=bool)
    for k, i in enumerate(replicas):
        rng = replica_rng(config.seed, i)
        v = rng.standard_normal(d)
        v /= np.linalg.norm(v)
        G[:, k] = config.drift * v + rng.standard_normal((T, d))
        Nz[:, k] = rng.standard_normal((T, d))
        bad[:, k] = rng.random(T) < config.bad_fraction
    gn = np.asarray(norm(G, spec.p))[..., None] if T else np.ones((0, n, 1))
    C = G / np.where(gn > 0, gn, 1.0)
    H = good_hint(C, config.alpha, Nz, spec) if T else np.zeros_like(C)
    H = np.where(bad[..., None], -H, H)
    return Stream(config, tuple(replicas), _batched(batched, replicas), H, C,
                  extras={"bad": bad.T})


def _batched(batched, replicas):
    return len(replicas) != 1 if batched is None else bool(batched)


GENERATORS = {
    "front_loaded": gen_front_loaded,
    "bernoulli": gen_bernoulli,
    "lq_orthogonal": gen_lq_orthogonal,
    "lq_planar": gen_lq_planar,
    "synthetic": gen_synthetic,
}


def generate(config: AdversaryConfig, replicas=None, batched=None) -> Stream:
    """Build the stream for ``config``; ``replicas`` is an int count or index sequence."""
    if replicas is None:
        replicas = (0,)
    elif isinstance(replicas, int):
        replicas = tuple(range(replicas))
    return GENERATORS[config.kind](config, tuple(replicas), batched)


# --- comparator certificates ------------------------------------------------

def orthogonal_certificate_value(T: int, q: float) -> float:
    """T + (1 - 3/(2q)) T^{1 - 1/(q-1)}."""
    return T + (1.0 - 3.0 / (2.0 * q)) * T ** (1.0 - 1.0 / (q - 1.0))


def lq_comparator_certificate(signs, T: int, q: float):
    """Comparator for z = T e_0 + sum_t s_t e_t (unnormalized orthogonal costs).

    Returns (u, <z, u>) with u = beta_0 e_0 + sum_t beta_t e_t,
    beta_0 = 1 - (3/(2q)) T^{-1/(q-1)} and beta_t = s_t T^{-1/(q-1)}.
    """
    if not q > 2:
        raise DomainError(f"certificate needs q > 2, got {q}")
    signs = np.asarray(signs, dtype=float)
    if T < 1 or signs.shape != (T,):
        raise DomainError("signs must be a vector of length T >= 1")
    gamma = T ** (-1.0 / (q - 1.0))
    u = np.empty(T + 1)
    u[0] = 1.0 - (3.0 / (2.0 * q)) * gamma
    u[1:] = signs * gamma
    if norm(u, q) > 1.0 + 1e-9:
        raise DomainError(f"certificate is infeasible at T={T}, q={q}")
    z = np.concatenate([[float(T)], signs])
    return u, float(np.dot(z, u))


def planar_certificate_value(T: int, q: float, w: float) -> float:
    """T - (3/(2q)) T^{1 - q/(2(q-1))} + |w| T^{-1/(2(q-1))}."""
    return (T - (3.0 / (2.0 * q)) * T ** (1.0 - q / (2.0 * (q - 1.0)))
            + abs(w) * T ** (-1.0 / (2.0 * (q - 1.0))))


def planar_certificate(signs, T: int, q: float):
    """Comparator for z = T e_1 + w e_2, w = sum of signs; sign(0) taken as +1."""
    if not q > 2:
        raise DomainError(f"certificate needs q > 2, got {q}")
    signs = np.asarray(signs, dtype=float)
    if T < 1 or signs.shape != (T,):
        raise DomainError("signs must be a vector of length T >= 1")
    w = float(np.sum(signs))
    sw = -1.0 if w < 0 else 1.0
    u = np.array([1.0 - (3.0 / (2.0 * q)) * T ** (-q / (2.0 * (q - 1.0))),
                  sw * T ** (-1.0 / (2.0 * (q - 1.0)))])
    if norm(u, q) > 1.0 + 1e-9:
        raise DomainError(f"certificate is infeasible at T={T}, q={q}")
    return u, float(T * u[0] + w * u[1])
