"""Explicit right-hand sides of the regret bounds.

Each bound has a scalar form taking the summary quantities directly (used by
the ``bounds`` CLI command) and a trace form that computes those quantities
from a recorded run.  Trace forms broadcast over batched traces.
"""

from __future__ import annotations

import numpy as np

from ..adaptive_ftrl import GENERAL_Q, MAIN_Q2
from ..spaces import DomainError
from ..unconstrained import f_bound
from .audit import set_sums


class BoundError(ValueError):
    """The trace does not satisfy the bound's hypotheses (wrong variant or geometry)."""


def _out(v):
    v = np.asarray(v, dtype=float)
    return float(v) if v.ndim == 0 else v


def s_integral(G, q: float):
    """int_1^{1+G} z^{-p/q} dz = log(1+G) at q = 2, else ((q-1)/(q-2))((1+G)^{(q-2)/(q-1)} - 1)."""
    G = np.asarray(G, dtype=float)
    if np.any(G < 0):
        raise DomainError("G must be nonnegative")
    if q == 2:
        return _out(np.log1p(G))
    e = (q - 2.0) / (q - 1.0)
    return _out((1.0 / e) * np.expm1(e * np.log1p(G)))


def main_bound_value(mu, alpha, Q_alpha, G_sum, B_corr_sum):
    """1/(2mu) + 4(sqrt(Q_alpha)/mu + (r_T/(alpha mu)) log(1 + mu G_sum)) + 2 sqrt(B_corr_sum).

    Q_alpha and G_sum are sums of ||c_t||^2 over B_{T,alpha} and G_{T,alpha};
    B_corr_sum is the sum of |<c_t, h_t>| over B_T and r_T = sqrt(1 + B_corr_sum).
    """
    if not alpha > 0 or not mu > 0:
        raise DomainError("alpha and mu must be positive")
    B = np.asarray(B_corr_sum, dtype=float)
    r_T = np.sqrt(1.0 + B)
    ftrl = 1.0 / (2.0 * mu) + 4.0 * (np.sqrt(Q_alpha) / mu
                                     + (r_T / (alpha * mu)) * np.log1p(mu * np.asarray(G_sum)))
    return _out(ftrl + 2.0 * np.sqrt(B))


def q_bound_value(q, mu, alpha, eta, G_sum, B_alpha_sum, B_corr_sum):
    """General-q bound; sums use ||c_t||_p^p over G_{T,alpha} and B_{T,alpha}."""
    if not eta >= 1:
        raise DomainError(f"eta must be >= 1, got {eta}")
    if not alpha > 0 or not mu > 0:
        raise DomainError("alpha and mu must be positive")
    p = q / (q - 1.0)
    S = np.asarray(s_integral(G_sum, q))
    a = p / q
    out = (2.0 / (mu * p) ** (1.0 / p)
           + 2.0 ** (p + 1) / (p * (alpha * mu) ** a) * S
           + 2.0
           + (8.0 / p ** (1.0 / p)) * np.asarray(B_alpha_sum, dtype=float) ** (1.0 / p)
           + 2.0 * (eta + 2.0 ** p * S / (p * (eta * alpha * mu) ** a))
           * np.asarray(B_corr_sum, dtype=float) ** (1.0 / q))
    return _out(out)


def optimistic_bound_value(T, Z):
    """1/2 + (8 + 16 log(1 + T)) sqrt(Z)."""
    return _out(0.5 + (8.0 + 16.0 * np.log1p(np.asarray(T, dtype=float))) * np.sqrt(Z))


def optimistic_Z(corr, cost_norm):
    """1 + sum max(||c - h||^2 - ||h||^2, 0); in a Hilbert space the summand is ||c||^2 - 2<c, h>."""
    corr = np.asarray(corr, dtype=float)
    cn = np.asarray(cost_norm, dtype=float)
    return _out(1.0 + np.maximum(cn * cn - 2.0 * corr, 0.0).sum(axis=0))


def combiner_bound_value(u_norm, C_T, corr_sum, epsilon, mu=1.0):
    """min{f + eps, inf_{0<=y<=||u||} 2f - y sum<c,h>} for the hint combiner."""
    f = np.asarray(f_bound(u_norm, C_T, epsilon, mu))
    return _out(np.minimum(f + epsilon, 2.0 * f - np.asarray(u_norm) * np.maximum(corr_sum, 0.0)))


def unconstrained_bound_value(u_norm, C_T, epsilon, mu, alpha, n_relaxed_bad):
    """2eps + Q1 + ||u|| Q2^2 s/(4 alpha) + 2||u|| |B*|/s with s = max(1, sqrt(|B*|)).

    This is the explicit bound with y = ||u|| / s, which keeps y in [0, ||u||]
    when |B*| < 1.
    """
    if not epsilon > 0 or not mu > 0 or not alpha > 0:
        raise DomainError("epsilon, mu and alpha must be positive")
    u = np.asarray(u_norm, dtype=float)
    C = np.asarray(C_T, dtype=float)
    nb = np.asarray(n_relaxed_bad, dtype=float)
    e2 = epsilon * epsilon
    Q1 = 16.0 * u * np.log(8.0 * u * u * (1.0 + 4.0 * C) ** 4.5 / e2 + 1.0)
    Q2sq = (64.0 / mu) * (2.0 + np.log(5.0 * u * u * (2.0 + 8.0 * C) ** 9 / e2 + 1.0))
    s = np.maximum(1.0, np.sqrt(nb))
    return _out(2.0 * epsilon + Q1 + u * Q2sq * s / (4.0 * alpha) + 2.0 * u * nb / s)


def _require(trace, variant):
    if trace.variant != variant:
        raise BoundError(f"bound needs a {variant} trace, got {trace.variant}")


def bound_main(trace, alpha: float):
    """Explicit-constant bound for the q = 2 learner on a recorded run."""
    _require(trace, MAIN_Q2)
    if trace.spec.q != 2:
        raise BoundError("bound_main needs q = 2")
    s = set_sums(trace, alpha)
    return main_bound_value(trace.spec.mu, alpha, s.bad_norm_sum, s.good_norm_sum, s.bad0_corr_sum)


def bound_q(trace, alpha: float, eta: float | None = None):
    """General-q bound on a recorded general_q run; eta defaults to the run's eta."""
    _require(trace, GENERAL_Q)
    eta = trace.eta if eta is None else eta
    if not eta >= 1:
        raise DomainError(f"eta must be >= 1, got {eta}")
    s = set_sums(trace, alpha)
    return q_bound_value(trace.spec.q, trace.spec.mu, alpha, eta,
                         s.good_norm_sum, s.bad_norm_sum, s.bad0_corr_sum)


def bound_optimistic(trace):
    """(bound, Z) for a Hilbert-space run of the q = 2 learner."""
    _require(trace, MAIN_Q2)
    if not trace.spec.is_hilbert:
        raise BoundError("optimistic bound needs a Hilbert space (q = 2, mu = 1)")
    Z = optimistic_Z(trace.corr, trace.cost_norm)
    return optimistic_bound_value(trace.T, Z), Z


def slack_sum(trace):
    """sum over B_T of |<c_t, h_t>| / r_t and its bound 2 sqrt(sum over B_T |<c_t, h_t>|)."""
    corr = np.asarray(trace.corr, dtype=float)
    bad = corr < 0
    lhs = np.where(bad, np.abs(corr) / trace.r, 0.0).sum(axis=0)
    rhs = 2.0 * np.sqrt(np.where(bad, np.abs(corr), 0.0).sum(axis=0))
    return _out(lhs), _out(rhs)

