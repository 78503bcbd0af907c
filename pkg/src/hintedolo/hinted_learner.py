"""Constrained online linear optimization with imperfect hints.

The learner keeps a confidence scale r_t >= 1 that grows only on rounds where
the hint turns out negatively correlated with the cost.  It plays the FTRL
iterate shifted along the hint, x_t = xbar_t - delta_{r_t}(xbar_t) h_t, and
feeds the inner FTRL the strongly convex surrogate of the round.

All state is batched: pass ``batch_shape=(n,)`` to run n independent
replicas in lockstep, with hints and costs of shape (n, dim).
"""

from __future__ import annotations

from typing import Iterable

import numpy as np

from .adaptive_ftrl import GENERAL_Q, MAIN_Q2, FtrlState, _check_variant, ftrl_step, solve_lambda
from .spaces import FEAS_TOL, DomainError, SpaceSpec, norm, pairing
from .surrogate import SurrogateLoss, hint_shift
from .trace import Trace, TraceRecorder


class ProtocolError(RuntimeError):
    """predict/update called out of order."""


def grow_r(r, corr, spec: SpaceSpec, variant: str, eta: float = 1.0):
    """Confidence-scale update after observing <c, h> = corr."""
    r = np.asarray(r, dtype=float)
    corr = np.asarray(corr, dtype=float)
    bad = corr < 0
    if variant == MAIN_Q2:
        grown = np.sqrt(r * r + np.abs(corr))
    else:
        p = spec.p
        grown = (r ** p + np.abs(corr) / eta ** p) ** (1.0 / p)
    out = np.where(bad, grown, r)
    return float(out) if out.ndim == 0 else out


class HintedLearner:
    """Hint-shifted FTRL with adaptive rate (q = 2 or general q with scale eta)."""

    def __init__(self, spec: SpaceSpec, variant: str = MAIN_Q2, eta: float = 1.0,
                 batch_shape=()):
        _check_variant(variant, spec)
        if variant == GENERAL_Q and not eta >= 1:
            raise DomainError(f"eta must be >= 1, got {eta}")
        self.spec = spec
        self.variant = variant
        self.eta = float(eta) if variant == GENERAL_Q else 1.0
        self.batch_shape = tuple(batch_shape)
        self.r = np.ones(self.batch_shape) if self.batch_shape else 1.0
        self.ftrl = FtrlState.initial(spec, variant, self.batch_shape)
        self.xbar = self.ftrl.prediction()
        self.pending_hint = None
        self._played = None
        self._r_played = None

    @property
    def lambda0(self) -> float:
        return self.ftrl.lambda0

    def predict(self, h) -> np.ndarray:
        if self.pending_hint is not None:
            raise ProtocolError("predict called twice without an update")
        h = np.asarray(h, dtype=float)
        if h.shape != self.xbar.shape:
            raise DomainError(f"hint shape {h.shape} does not match {self.xbar.shape}")
        x = hint_shift(self.xbar, h, self.r, self.spec)
        self.pending_hint = h
        self._played = x
        self._r_played = self.r
        return x

    def update(self, c) -> dict:
        """Observe the cost; returns the round's record."""
        if self.pending_hint is None:
            raise ProtocolError("update called without a pending hint")
        spec = self.spec
        c = np.asarray(c, dtype=float)
        if c.shape != self.xbar.shape:
            raise DomainError(f"cost shape {c.shape} does not match {self.xbar.shape}")
        c_norm = np.asarray(norm(c, spec.p))
        if np.any(c_norm > 1 + FEAS_TOL):
            raise DomainError("cost outside the dual unit ball")
        h, x, r_t, xbar = self.pending_hint, self._played, self._r_played, self.xbar

        loss = SurrogateLoss(h=h, c=c, r=r_t, spec=spec)
        corr = np.asarray(loss.corr)
        sigma = np.asarray(loss.strong_convexity)
        lam = solve_lambda(c_norm, self.ftrl.sigma_sum + sigma, self.ftrl.lambda_sum,
                           spec, self.variant)
        g = loss.subgradient(xbar)
        rec = dict(h=h, c=c, xbar=xbar, x=x, g=g,
                   loss=pairing(c, x), r=r_t, sigma=sigma, lam=lam, corr=corr,
                   cost_norm=c_norm, g_norm=norm(g, spec.p),
                   surrogate_xbar=loss.eval(xbar), x_norm=norm(x, spec.q))

        self.r = grow_r(r_t, corr, spec, self.variant, self.eta)
        self.ftrl, self.xbar = ftrl_step(self.ftrl, loss, lam)
        self.pending_hint = None
        self._played = None
        return rec

    def run(self, stream: Iterable, keep_vectors: bool = True, **meta) -> Trace:
        """Drive the learner over (hint, cost) pairs and record a trace."""
        rec = TraceRecorder(keep_vectors)
        cost_sum = np.zeros(self.batch_shape + (self.spec.dim,))
        for h, c in stream:
            self.predict(h)
            row = self.update(c)
            cost_sum = cost_sum + row["c"]
            rec.add(**row)
        return rec.build(self.spec, self.variant, cost_sum, self.batch_shape,
                         lambda0=self.lambda0, eta=self.eta, r_final=self.r, **meta)

