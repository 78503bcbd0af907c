"""Norm geometry on R^d equipped with an l_q norm (q >= 2) and its dual l_p norm.

Every function here accepts arrays with arbitrary leading batch axes; the last
axis is the coordinate axis.  Scalars derived from vectors (norms, pairings)
therefore come back with the batch shape, which lets the learners run many
independent replicas in one vectorized pass.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

INF = math.inf
"""Exponent sentinel selecting the max-norm in :func:`norm`."""

FEAS_TOL = 1e-9
SOLVER_TOL = 1e-10


class DomainError(ValueError):
    """Raised when an input violates a mathematical precondition."""


def dual_exponent(q: float) -> float:
    """Return p with 1/p + 1/q = 1."""
    if q == INF:
        return 1.0
    if q <= 1:
        raise DomainError(f"exponent must exceed 1, got {q}")
    return q / (q - 1.0)


@functools.lru_cache(maxsize=None)
def lq_modulus(q: float) -> float:
    """Largest mu such that ||x||_q^q / q is (q, mu)-strongly convex on l_q.

    The function is separable, so the constant is the one-dimensional one:
    inf over a, b of (|b|^q - |a|^q - q sign(a)|a|^{q-1}(b - a)) / |b - a|^q.
    By homogeneity a = 1, b = 1 + s; the infimum sits at some s < -1 and the
    ratio tends to 1 as |s| grows.
    """
    if q < 2:
        raise DomainError(f"q must be >= 2, got {q}")
    if q == 2:
        return 1.0

    def ratio(s: float) -> float:
        return (abs(1.0 + s) ** q - 1.0 - q * s) / abs(s) ** q

    res = minimize_scalar(ratio, bounds=(-1e3, -1.0), method="bounded",
                          options={"xatol": 1e-12})
    return float(min(1.0, res.fun))


@dataclass(frozen=True)
class SpaceSpec:
    """An l_q space of dimension ``dim`` with uniform-convexity modulus ``mu``.

    ``mu`` defaults to :func:`lq_modulus` (1 in the Euclidean case).
    """

    q: float = 2.0
    mu: float | None = None
    dim: int = 2
    p: float = field(init=False)

    def __post_init__(self):
        if not (self.q >= 2 and math.isfinite(self.q)):
            raise DomainError(f"q must be a finite real >= 2, got {self.q}")
        if int(self.dim) != self.dim or self.dim < 1:
            raise DomainError(f"dim must be a positive integer, got {self.dim}")
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "q", float(self.q))
        object.__setattr__(self, "p", dual_exponent(self.q))
        if self.mu is None:
            object.__setattr__(self, "mu", lq_modulus(self.q))
        if not (self.mu > 0 and math.isfinite(self.mu)):
            raise DomainError(f"mu must be positive, got {self.mu}")
        object.__setattr__(self, "mu", float(self.mu))
        assert abs(1.0 / self.p + 1.0 / self.q - 1.0) <= 1e-12

    @classmethod
    def euclidean(cls, dim: int = 2) -> "SpaceSpec":
        return cls(q=2.0, mu=1.0, dim=dim)

    @property
    def is_hilbert(self) -> bool:
        return self.q == 2.0 and self.mu == 1.0

    def with_dim(self, dim: int) -> "SpaceSpec":
        return SpaceSpec(q=self.q, mu=self.mu, dim=dim)


def _check_finite(v):
    v = np.asarray(v, dtype=float)
    if not np.all(np.isfinite(v)):
        raise DomainError("vector has non-finite entries")
    return v


def norm(v, exponent: float = 2.0):
    """l_exponent norm along the last axis; ``exponent=INF`` gives max |v_i|."""
    v = _check_finite(v)
    if exponent < 1:
        raise DomainError(f"norm exponent must be >= 1, got {exponent}")
    a = np.abs(v)
    if exponent == INF:
        out = a.max(axis=-1, initial=0.0)
    elif exponent == 2:
        out = np.sqrt(np.sum(a * a, axis=-1))
    elif exponent == 1:
        out = np.sum(a, axis=-1)
    else:
        # scale first so large entries do not overflow the power sum
        m = a.max(axis=-1, initial=0.0, keepdims=True)
        safe = np.where(m > 0, m, 1.0)
        out = np.squeeze(safe, -1) * np.sum((a / safe) ** exponent, axis=-1) ** (1.0 / exponent)
    return out if out.ndim else float(out)


def norm_power(v, exponent: float):
    """sum_i |v_i|^exponent, i.e. ||v||^exponent without the root."""
    a = np.abs(np.asarray(v, dtype=float))
    if exponent == 2:
        out = np.sum(a * a, axis=-1)
    else:
        out = np.sum(a ** exponent, axis=-1)
    return out if out.ndim else float(out)


def pairing(c, x):
    """Apply the dual vector c to the primal vector x (batched dot product)."""
    out = np.sum(np.asarray(c, dtype=float) * np.asarray(x, dtype=float), axis=-1)
    return out if out.ndim else float(out)


def signed_power(v, exponent: float):
    """sign(v) |v|^exponent, elementwise."""
    v = np.asarray(v, dtype=float)
    if exponent == 1:
        return v.copy()
    return np.sign(v) * np.abs(v) ** exponent


def ball_argmin(C, A, spec: SpaceSpec):
    """Minimize <C, x> + (A/q) ||x||_q^q over the unit q-ball.

    Stationarity gives x_i = -sign(C_i) (|C_i| / (A + nu))^{1/(q-1)} with the
    ball multiplier nu >= 0.  The q-norm of that point equals
    (||C||_p / (A + nu))^{1/(q-1)}, so complementary slackness pins
    A + nu = max(A, ||C||_p).  ``A = 0, C = 0`` returns the origin.
    """
    C = _check_finite(C)
    A = np.asarray(A, dtype=float)
    if np.any(A < 0):
        raise DomainError("A must be nonnegative")
    q = spec.q
    scale = np.maximum(A, norm(C, spec.p))
    scale = np.where(scale > 0, scale, 1.0)[..., None]
    x = -signed_power(C / scale, 1.0 / (q - 1.0))
    return x


def best_comparator(z, spec: SpaceSpec):
    """Return (u*, <z, u*>) with u* = argmin over the unit q-ball of <z, u>.

    The minimum value is -||z||_p.  For z = 0 the origin and 0 are returned.
    """
    z = _check_finite(z)
    p = spec.p
    zn = norm(z, p)
    zn_arr = np.asarray(zn, dtype=float)
    safe = np.where(zn_arr > 0, zn_arr, 1.0)[..., None]
    u = -signed_power(z / safe, p - 1.0) + 0.0  # + 0.0 clears signed zeros
    value = -zn_arr
    return u, (float(value) if value.ndim == 0 else value)


def dual_maximizer(c, spec: SpaceSpec):
    """Unit-q-norm point x with <c, x> = ||c||_p (origin when c = 0)."""
    return -best_comparator(c, spec)[0] + 0.0


def is_feasible(x, spec: SpaceSpec, tol: float = FEAS_TOL) -> bool:
    return bool(np.all(np.asarray(norm(x, spec.q)) <= 1.0 + tol))
