"""Unconstrained learning with hints by adding two parameter-free learners.

The base learner is a polar decomposition: a coin-betting scalar chooses the
magnitude (Krichevsky-Trofimov fraction clipped to [-1/2, 1/2] of current
wealth) and projected gradient descent on the unit ball chooses the
direction.  Wealth never drops below half its previous value, so regret
against u = 0 never exceeds the initial wealth epsilon.

The combiner plays z_t = x_t - y_t h_t where x_t comes from a vector base
learner fed c_t and y_t from a scalar one fed -<c_t, h_t>.  Euclidean
geometry (q = 2) only.
"""

from __future__ import annotations

import math

import numpy as np

from .hinted_learner import ProtocolError
from .spaces import DomainError, SpaceSpec, pairing
from .trace import Trace, TraceRecorder

BET_CAP = 1e100  # keeps exponentially growing bets finite; |bet| <= wealth/2 still holds


def _project_unit_ball(v):
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    return v / np.maximum(n, 1.0)


class ParamFreeLearner:
    """Parameter-free OLO over R^dim (dim = 1 gives the scalar learner)."""

    def __init__(self, dim: int, epsilon: float = 1.0, batch_shape=()):
        if not epsilon > 0:
            raise DomainError(f"epsilon must be positive, got {epsilon}")
        self.dim = int(dim)
        self.epsilon = float(epsilon)
        self.batch_shape = tuple(batch_shape)
        z = np.zeros(self.batch_shape)
        self.wealth = z + self.epsilon
        self.bet_grad_sum = z.copy()   # sum of scalar betting gradients
        self.t = 0
        self.direction = np.zeros(self.batch_shape + (self.dim,))
        self.grad_sq_sum = z.copy()    # sum ||c||^2, also drives the direction step
        self.grad_sum = np.zeros(self.batch_shape + (self.dim,))
        self._pending = None

    def bet_fraction(self):
        beta = -self.bet_grad_sum / (self.t + 1)
        return np.clip(beta, -0.5, 0.5)

    def predict(self) -> np.ndarray:
        if self._pending is not None:
            raise ProtocolError("predict called twice without an update")
        v = np.clip(self.bet_fraction() * self.wealth, -BET_CAP, BET_CAP)
        x = v[..., None] * self.direction
        self._pending = (v, x)
        return x

    def update(self, c):
        if self._pending is None:
            raise ProtocolError("update called without a pending prediction")
        c = np.asarray(c, dtype=float)
        v, _ = self._pending
        s = pairing(c, self.direction)   # in [-1, 1]
        self.wealth = self.wealth - v * s
        self.bet_grad_sum = self.bet_grad_sum + s
        self.t += 1
        self.grad_sum = self.grad_sum + c
        self.grad_sq_sum = self.grad_sq_sum + np.sum(c * c, axis=-1)
        step = np.where(self.grad_sq_sum > 0,
                        1.0 / np.sqrt(np.where(self.grad_sq_sum > 0, self.grad_sq_sum, 1.0)), 0.0)
        self.direction = _project_unit_ball(self.direction - step[..., None] * c)
        self._pending = None


def _as_vec(a):
    return np.asarray(a, dtype=float)[..., None]


class HintCombiner:
    """z_t = x_t - y_t h_t from a vector and a scalar parameter-free learner."""

    def __init__(self, dim: int, epsilon: float = 1.0, batch_shape=()):
        self.dim = int(dim)
        self.epsilon = float(epsilon)
        self.batch_shape = tuple(batch_shape)
        self.vector_learner = ParamFreeLearner(dim, epsilon, batch_shape)
        self.scalar_learner = ParamFreeLearner(1, epsilon, batch_shape)
        self.pending_hint = None
        self._parts = None

    def predict(self, h) -> np.ndarray:
        if self.pending_hint is not None:
            raise ProtocolError("predict called twice without an update")
        h = np.asarray(h, dtype=float)
        if np.any(np.linalg.norm(h, axis=-1) > 1 + 1e-9):
            raise DomainError("hint must lie in the unit ball")
        x = self.vector_learner.predict()
        y = self.scalar_learner.predict()[..., 0]
        self.pending_hint = h
        self._parts = (x, y)
        return x - y[..., None] * h

    def update(self, c) -> dict:
        if self.pending_hint is None:
            raise ProtocolError("update called without a pending hint")
        c = np.asarray(c, dtype=float)
        h = self.pending_hint
        x, y = self._parts
        corr = pairing(c, h)
        z = x - y[..., None] * h
        self.vector_learner.update(c)
        self.scalar_learner.update(-_as_vec(corr))
        self.pending_hint = None
        return dict(h=h, c=c, x=z, xbar=x, y=y, loss=pairing(c, z), base_loss=pairing(c, x),
                    corr=corr, cost_norm=np.linalg.norm(c, axis=-1))

    def run(self, stream, keep_vectors: bool = False, **meta) -> Trace:
        rec = TraceRecorder(keep_vectors)
        spec = SpaceSpec.euclidean(self.dim)
        cost_sum = np.zeros(self.batch_shape + (self.dim,))
        base, ys = [], []
        for h, c in stream:
            self.predict(h)
            row = self.update(c)
            cost_sum = cost_sum + row["c"]
            base.append(row.pop("base_loss"))
            ys.append(row.pop("y"))
            rec.add(**row)
        shape = (0,) + self.batch_shape
        extras = {"base_loss": np.stack(base) if base else np.zeros(shape),
                  "y": np.stack(ys) if ys else np.zeros(shape)}
        return rec.build(spec, "unconstrained", cost_sum, self.batch_shape,
                         columns=("loss", "corr", "cost_norm"), vectors=("h", "c", "xbar", "x"),
                         extras=extras, **meta)


def f_bound(u_norm, C_T, epsilon, mu: float = 1.0):
    """Regret bound f(||u||, C_T, eps) of the cited parameter-free base learner."""
    if not epsilon > 0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")
    if not mu > 0:
        raise DomainError(f"mu must be positive, got {mu}")
    u = np.asarray(u_norm, dtype=float)
    C = np.asarray(C_T, dtype=float)
    if np.any(u < 0) or np.any(C < 0):
        raise DomainError("u_norm and C_T must be nonnegative")
    e2 = epsilon * epsilon
    t1 = 8.0 * u * np.log(8.0 * u * u * (1.0 + 4.0 * C) ** 4.5 / e2 + 1.0)
    t2 = (4.0 * u / math.sqrt(mu)) * np.sqrt(
        C * (2.0 + np.log(5.0 * u * u * (2.0 + 8.0 * C) ** 9 / e2 + 1.0)))
    out = epsilon + t1 + t2
    return float(out) if out.ndim == 0 else out


MARGIN_TOL = 1e-12  # margins this close to zero count as met (rounding in <c, h>)


def relaxed_bad_set_from_margins(margins) -> list[int]:
    """Smallest index set whose removal leaves a nonnegative margin sum.

    Removing the most negative margins first is optimal; equal margins go
    lowest index first.
    """
    m = np.asarray(margins, dtype=float).ravel()
    if m.size == 0:
        return []
    # sums that vanish up to rounding count as met, like single margins
    tol = MARGIN_TOL * max(1.0, float(np.abs(m).sum()))
    order = np.lexsort((np.arange(m.size), m))
    # remaining[k] = sum of margins left after removing the first k in order
    remaining = np.concatenate([np.cumsum(m[order][::-1])[::-1], [0.0]])
    k = int(np.argmax(remaining >= -tol))
    return sorted(int(i) for i in order[:k])


def correlation_margins(corr, cost_norm, alpha: float, power: float = 2.0):
    """<c_t, h_t> - alpha ||c_t||^power, with |margin| <= MARGIN_TOL snapped to 0."""
    m = np.asarray(corr, dtype=float) - alpha * np.asarray(cost_norm, dtype=float) ** power
    return np.where(np.abs(m) <= MARGIN_TOL, 0.0, m)


def relaxed_bad_set(trace, alpha: float, power: float | None = None) -> list[int]:
    """B*_{T,alpha}: minimal rounds to drop so the rest are alpha-correlated on average.

    ``power`` defaults to 2, or p for general-q traces.
    """
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    if power is None:
        power = trace.spec.p if trace.variant == "general_q" else 2.0
    corr = np.asarray(trace.corr, dtype=float)
    if corr.ndim != 1:
        raise ValueError("relaxed_bad_set expects a single-replica trace")
    return relaxed_bad_set_from_margins(correlation_margins(corr, trace.cost_norm, alpha, power))
