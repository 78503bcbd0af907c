"""Good/bad round sets and regret/bound reports for recorded traces.

Set membership uses <c_t, h_t> >= alpha ||c_t||^k with k = 2, or k = p for
general-q traces.  Rounds with c_t = 0 are good.  B0 (= B_T) holds the rounds
with <c_t, h_t> < 0 exactly, the same test the learner uses to grow r_t.
Index sets are 0-based positions into the trace.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ..adaptive_ftrl import GENERAL_Q
from ..spaces import DomainError
from ..unconstrained import correlation_margins, relaxed_bad_set

DEFAULT_ALPHA_GRID = (0.01, 0.02, 0.05, 0.1, 0.2, 0.25, 0.5, 0.75, 1.0)


def set_power(trace) -> float:
    return trace.spec.p if trace.variant == GENERAL_Q else 2.0


def audit_masks(trace, alpha: float):
    """Boolean masks (good, bad_alpha, bad0), each shaped like ``trace.corr``."""
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    m = correlation_margins(trace.corr, trace.cost_norm, alpha, set_power(trace))
    good = m >= 0
    return good, ~good, np.asarray(trace.corr) < 0


def audit_sets(trace, alpha: float):
    """Index arrays (G_{T,alpha}, B_{T,alpha}, B_T) of a single-replica trace."""
    good, bad, bad0 = audit_masks(trace, alpha)
    if good.ndim != 1:
        raise ValueError("audit_sets expects a single-replica trace")
    return np.flatnonzero(good), np.flatnonzero(bad), np.flatnonzero(bad0)


@dataclass
class SetSums:
    """Counts and sums over the audit sets (batched like the trace)."""

    n_good: np.ndarray
    n_bad_alpha: np.ndarray
    n_bad0: np.ndarray
    good_norm_sum: np.ndarray     # sum over G of ||c||^k
    bad_norm_sum: np.ndarray      # Q_alpha: sum over B_alpha of ||c||^k
    bad0_corr_sum: np.ndarray     # sum over B_T of |<c, h>|


def set_sums(trace, alpha: float) -> SetSums:
    good, bad, bad0 = audit_masks(trace, alpha)
    cn = np.asarray(trace.cost_norm, dtype=float) ** set_power(trace)
    corr = np.abs(np.asarray(trace.corr, dtype=float))
    return SetSums(
        n_good=good.sum(axis=0), n_bad_alpha=bad.sum(axis=0), n_bad0=bad0.sum(axis=0),
        good_norm_sum=np.where(good, cn, 0.0).sum(axis=0),
        bad_norm_sum=np.where(bad, cn, 0.0).sum(axis=0),
        bad0_corr_sum=np.where(bad0, corr, 0.0).sum(axis=0),
    )


@dataclass
class RegretReport:
    comparator: list
    regret: float
    best_comparator: list
    best_regret: float
    tested: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)


def regret_report(trace, u=None, tested=None) -> RegretReport:
    """Regret of a single-replica trace against u (default: best in hindsight)."""
    u_best, _ = trace.best_comparator()
    best = float(trace.best_regret())
    u = u_best if u is None else np.asarray(u, dtype=float)
    out = {name: float(trace.regret(v)) for name, v in (tested or {}).items()}
    return RegretReport(comparator=np.asarray(u).tolist(), regret=float(trace.regret(u)),
                        best_comparator=np.asarray(u_best).tolist(), best_regret=best,
                        tested=out)


def _f(v):
    if v is None:
        return None
    v = float(v)
    return None if math.isnan(v) else v


@dataclass
class BoundReport:
    """Per-alpha set sizes and bound values for one replica."""

    T: int
    variant: str
    best_regret: float
    entries: list

    def to_dict(self):
        return asdict(self)

    def violations(self, slack: float = 1e-6):
        """(alpha, bound name, bound value) for every bound the regret exceeds."""
        out = []
        for e in self.entries:
            for name in ("bound_main", "bound_q", "bound_optimistic"):
                b = e.get(name)
                if b is not None and self.best_regret > b + slack:
                    out.append((e["alpha"], name, b))
        return out


def bound_report(trace, alpha_grid=DEFAULT_ALPHA_GRID, best_regret=None, eta=None) -> BoundReport:
    """Evaluate every applicable bound on a single-replica trace over ``alpha_grid``."""
    from . import bounds

    if np.ndim(trace.corr) != 1:
        raise ValueError("bound_report expects a single-replica trace")
    if best_regret is None:
        best_regret = float(trace.best_regret())
    entries = []
    opt, Z = (None, None)
    if trace.variant == "main_q2" and trace.spec.is_hilbert:
        opt, Z = bounds.bound_optimistic(trace)
    for alpha in alpha_grid:
        s = set_sums(trace, alpha)
        bstar = len(relaxed_bad_set(trace, alpha))
        e = dict(alpha=float(alpha), n_good=int(s.n_good), n_bad_alpha=int(s.n_bad_alpha),
                 n_bad0=int(s.n_bad0), n_relaxed_bad=bstar,
                 r_T=math.sqrt(1.0 + float(s.bad0_corr_sum)), Q_alpha=float(s.bad_norm_sum),
                 bound_main=None, bound_q=None, bound_optimistic=_f(opt),
                 Z=_f(Z), S=None)
        if trace.variant == "main_q2":
            e["bound_main"] = _f(bounds.bound_main(trace, alpha))
        elif trace.variant == GENERAL_Q:
            e["bound_q"] = _f(bounds.bound_q(trace, alpha, eta))
            e["S"] = float(bounds.s_integral(s.good_norm_sum, trace.spec.q))
        entries.append(e)
    return BoundReport(T=trace.T, variant=trace.variant, best_regret=float(best_regret),
                       entries=entries)
