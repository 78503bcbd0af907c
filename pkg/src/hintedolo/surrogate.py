"""Hint scale factor, hint-shifted play, and the strongly convex surrogate loss.

For a hint h, cost c and confidence scale r >= 1 the surrogate is

    l(x) = <c, x> + (|<c, h>| / (q r)) (||x||^q - 1),

which equals <c, x> - |<c, h>| delta_r(x) with delta_r(x) = (1 - ||x||^q)/(q r).
Its norm-power coefficient |<c, h>|/r multiplies ||x||^q / q, so sums of
surrogates keep the shape <C, x> + (A/q)||x||^q that ``ball_argmin`` solves.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spaces import FEAS_TOL, DomainError, SpaceSpec, norm, norm_power, pairing, signed_power


def _as_float(a):
    a = np.asarray(a, dtype=float)
    return float(a) if a.ndim == 0 else a


def delta(x, r, spec: SpaceSpec):
    """(1 - ||x||_q^q) / (q r), defined on the unit ball."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 1):
        raise DomainError("confidence scale r must be >= 1")
    xq = np.asarray(norm_power(x, spec.q))
    if np.any(xq > (1.0 + FEAS_TOL) ** spec.q):
        raise DomainError("delta is only defined on the unit ball")
    return _as_float(np.maximum(1.0 - xq, 0.0) / (spec.q * r))


def hint_shift(xbar, h, r, spec: SpaceSpec):
    """Play x = xbar - delta_r(xbar) h; stays in the unit ball whenever ||h|| <= 1."""
    h = np.asarray(h, dtype=float)
    if np.any(np.asarray(norm(h, spec.q)) > 1.0 + FEAS_TOL):
        raise DomainError("hint must lie in the unit ball")
    d = np.asarray(delta(xbar, r, spec))
    return np.asarray(xbar, dtype=float) - d[..., None] * h


@dataclass(frozen=True)
class SurrogateLoss:
    h: np.ndarray
    c: np.ndarray
    r: float
    spec: SpaceSpec

    @property
    def corr(self):
        """<c, h>."""
        return pairing(self.c, self.h)

    @property
    def weight(self):
        """|<c, h>| / r, the coefficient of ||x||^q / q."""
        return _as_float(np.abs(self.corr) / np.asarray(self.r, dtype=float))

    @property
    def strong_convexity(self):
        """sigma = |<c, h>| mu / r."""
        return _as_float(np.asarray(self.weight) * self.spec.mu)

    def validate(self) -> "SurrogateLoss":
        if np.any(np.asarray(self.r) < 1):
            raise DomainError("r must be >= 1")
        if np.any(np.asarray(norm(self.h, self.spec.q)) > 1 + FEAS_TOL):
            raise DomainError("hint outside the unit ball")
        if np.any(np.asarray(norm(self.c, self.spec.p)) > 1 + FEAS_TOL):
            raise DomainError("cost outside the dual unit ball")
        return self

    def eval(self, x):
        q = self.spec.q
        w = np.asarray(self.weight)
        return _as_float(pairing(self.c, x) + (w / q) * (np.asarray(norm_power(x, q)) - 1.0))

    __call__ = eval

    def subgradient(self, x):
        # grad of ||x||^q / q is sign(x)|x|^{q-1}; 0 at x_i = 0
        w = np.asarray(self.weight)
        return np.asarray(self.c, dtype=float) + w[..., None] * signed_power(x, self.spec.q - 1.0)
