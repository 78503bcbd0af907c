"""FTRL over the unit ball with a self-referential adaptive regularization rate.

Each round adds a regularizer (lambda_t / q)||x||^q where lambda_t solves

    lambda_t = G_t / (sigma_{1:t} + mu lambda_{1:t})^a

with (G_t, a) = (||c_t||^2, 1) for the Euclidean variant and
((2^p/p)||c_t||^p, p/q) for the general-q variant.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .spaces import SOLVER_TOL, DomainError, SpaceSpec, ball_argmin
from .surrogate import SurrogateLoss

MAIN_Q2 = "main_q2"
GENERAL_Q = "general_q"
VARIANTS = (MAIN_Q2, GENERAL_Q)


def _check_variant(variant: str, spec: SpaceSpec) -> None:
    if variant not in VARIANTS:
        raise DomainError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    if variant == MAIN_Q2 and spec.q != 2:
        raise DomainError("variant main_q2 requires q = 2")


def lambda_numerator(c_dual_norm, spec: SpaceSpec, variant: str):
    """G_t of the fixed-point equation."""
    c = np.asarray(c_dual_norm, dtype=float)
    if variant == MAIN_Q2:
        return c * c
    p = spec.p
    return (2.0 ** p / p) * c ** p


def lambda_exponent(spec: SpaceSpec, variant: str) -> float:
    return 1.0 if variant == MAIN_Q2 else spec.p / spec.q


def initial_lambda(spec: SpaceSpec, variant: str) -> float:
    """lambda_0: 1/mu (Euclidean variant) or 2 / (mu p)^{1/p} (general q)."""
    _check_variant(variant, spec)
    if variant == MAIN_Q2:
        return 1.0 / spec.mu
    p = spec.p
    return 2.0 / (spec.mu ** (1.0 / p) * p ** (1.0 / p))


def fixed_point_rhs(lam, G, sigma_cum, lambda_cum_prev, mu, a):
    denom = np.asarray(sigma_cum + mu * (lambda_cum_prev + lam), dtype=float)
    with np.errstate(divide="ignore"):
        out = np.where(denom > 0, G / np.where(denom > 0, denom, 1.0) ** a,
                       np.where(G > 0, np.inf, 0.0))
    return out


def solve_fixed_point(G, b, mu: float, a: float, tol: float = SOLVER_TOL, method: str = "newton"):
    """Solve L = G / (b + mu L)^a for L >= 0, elementwise.

    a = 1 is the positive root of mu L^2 + b L - G = 0, written as
    2G / (b + sqrt(b^2 + 4 mu G)) to avoid cancellation when b >> G.  Other
    exponents: f(L) = L - G / (b + mu L)^a is increasing and concave, so
    Newton's method started below the root climbs monotonically to it
    without overshooting.  ``method="bisect"`` bisects on [0, (G / mu^a)^{1/(a+1)}]
    instead (slower, kept as a cross-check).
    """
    G, b = np.broadcast_arrays(np.asarray(G, dtype=float), np.asarray(b, dtype=float))
    if np.any(G < 0) or np.any(b < 0):
        raise DomainError("fixed-point inputs must be nonnegative")
    if a == 1 and method == "newton":
        den = b + np.sqrt(b * b + 4.0 * mu * G)
        lam = np.where(den > 0, 2.0 * G / np.where(den > 0, den, 1.0), 0.0)
        return float(lam) if lam.ndim == 0 else lam
    # with b = 0 the root is this bound exactly
    hi = (G / mu ** a) ** (1.0 / (a + 1.0))
    zero = G == 0
    if method == "bisect":
        lam = _bisect_fixed_point(G, b, mu, a, hi, tol)
    elif method == "newton":
        # rhs is decreasing and the root is <= hi, so rhs(hi) is a lower bound
        lam = np.where(zero, 0.0, G / np.where(zero, 1.0, b + mu * hi) ** a)
        live = ~zero
        for _ in range(100):
            if not np.any(live):
                break
            d = np.where(live, b + mu * lam, 1.0)
            rhs = G / d ** a
            step = np.where(live, (rhs - lam) / (1.0 + a * mu * rhs / d), 0.0)
            lam = lam + np.maximum(step, 0.0)
            live = live & (step > 1e-16 * np.maximum(1.0, lam))
    else:
        raise ValueError(f"unknown method {method!r}")
    lam = np.where(zero, 0.0, lam)
    return float(lam) if lam.ndim == 0 else lam


def _bisect_fixed_point(G, b, mu, a, hi, tol):
    hi = hi * (1.0 + 1e-12) + 1e-300
    lo = np.zeros_like(hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        below = mid < fixed_point_rhs(mid, G, b, 0.0, mu, a)
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.all(hi - lo <= 1e-3 * tol * np.maximum(1.0, hi)):
            break
    return 0.5 * (lo + hi)


def solve_lambda(c_dual_norm, sigma_cum, lambda_cum_prev, spec: SpaceSpec, variant: str,
                 tol: float = SOLVER_TOL):
    """Return lambda_t >= 0 solving the adaptive-rate fixed point.

    ``sigma_cum`` is sigma_{1:t} (this round included) and ``lambda_cum_prev``
    is lambda_{1:t-1}.  Accepts batched inputs.
    """
    _check_variant(variant, spec)
    G = lambda_numerator(c_dual_norm, spec, variant)
    b = np.asarray(sigma_cum + spec.mu * np.asarray(lambda_cum_prev, dtype=float), dtype=float)
    return solve_fixed_point(G, b, spec.mu, lambda_exponent(spec, variant), tol)


def lambda_residual(lam, c_dual_norm, sigma_cum, lambda_cum_prev, spec: SpaceSpec, variant: str):
    """|lambda - RHS(lambda)| for the fixed-point equation."""
    G = lambda_numerator(c_dual_norm, spec, variant)
    a = lambda_exponent(spec, variant)
    rhs = fixed_point_rhs(lam, G, np.asarray(sigma_cum, dtype=float), lambda_cum_prev, spec.mu, a)
    out = np.abs(np.asarray(lam) - rhs)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class FtrlState:
    """Accumulated FTRL objective <lin_sum, x> + ((quad_coeff_sum + lambda0 + lambda_sum)/q)||x||^q."""

    lin_sum: np.ndarray
    quad_coeff_sum: np.ndarray | float
    sigma_sum: np.ndarray | float
    lambda_sum: np.ndarray | float
    lambda0: float
    round: int
    spec: SpaceSpec
    variant: str = MAIN_Q2

    @classmethod
    def initial(cls, spec: SpaceSpec, variant: str = MAIN_Q2, batch_shape=()) -> "FtrlState":
        _check_variant(variant, spec)
        zeros = np.zeros(batch_shape) if batch_shape else 0.0
        return cls(
            lin_sum=np.zeros(tuple(batch_shape) + (spec.dim,)),
            quad_coeff_sum=zeros,
            sigma_sum=zeros,
            lambda_sum=zeros,
            lambda0=initial_lambda(spec, variant),
            round=0,
            spec=spec,
            variant=variant,
        )

    @property
    def norm_coeff(self):
        return np.asarray(self.quad_coeff_sum) + self.lambda0 + np.asarray(self.lambda_sum)

    def prediction(self) -> np.ndarray:
        """argmin over the ball of the accumulated objective; the origin before any loss."""
        if self.round == 0:
            return np.zeros_like(self.lin_sum)
        return ball_argmin(self.lin_sum, self.norm_coeff, self.spec)


def ftrl_step(state: FtrlState, new_loss: SurrogateLoss, lambda_t, spec: SpaceSpec | None = None):
    """Fold one surrogate and its rate into the state; return (state, next prediction)."""
    spec = spec or state.spec
    lam = np.asarray(lambda_t, dtype=float)
    if np.any(lam < 0):
        raise DomainError("lambda_t must be nonnegative")
    w = new_loss.weight
    new = replace(
        state,
        lin_sum=state.lin_sum + np.asarray(new_loss.c, dtype=float),
        quad_coeff_sum=state.quad_coeff_sum + w,
        sigma_sum=state.sigma_sum + np.asarray(w) * spec.mu,
        lambda_sum=state.lambda_sum + lam,
        round=state.round + 1,
    )
    return new, new.prediction()


def ftrl_bound(trace, u, spec: SpaceSpec | None = None, include_lambda0: bool = True):
    """Explicit FTRL regret bound evaluated on a recorded run against comparator u.

        lambda_{0:T-1} ||u||^q + (1/p) sum_t ||g_t||_p^p / (sigma_{1:t} + mu lambda_{0:t-1})^{p/q}

    ``include_lambda0=False`` drops the lambda_0 ||u||^q term, which is not
    a valid bound in general (a single linear round already violates it).
    """
    spec = spec or trace.spec
    if trace.lam is None or trace.sigma is None or trace.g_norm is None:
        raise ValueError("trace lacks lambda/sigma/subgradient records")
    lam = np.asarray(trace.lam, dtype=float)
    sigma = np.asarray(trace.sigma, dtype=float)
    gn = np.asarray(trace.g_norm, dtype=float)
    if np.any(np.isnan(lam)) or np.any(np.isnan(sigma)):
        raise ValueError("trace lacks lambda/sigma records")
    T = lam.shape[0]
    q, p, mu = spec.q, spec.p, spec.mu
    lambda0 = trace.lambda0
    u_pow = np.asarray(np.sum(np.abs(np.asarray(u, dtype=float)) ** q, axis=-1))
    if T == 0:
        return float(lambda0 * u_pow) if include_lambda0 else 0.0
    lam_before = lambda0 + np.concatenate([np.zeros_like(lam[:1]), np.cumsum(lam, axis=0)[:-1]])
    denom = np.cumsum(sigma, axis=0) + mu * lam_before
    stab = np.sum(gn ** p / denom ** (p / q), axis=0) / p
    reg = np.sum(lam[:-1], axis=0) + (lambda0 if include_lambda0 else 0.0)
    out = reg * u_pow + stab
    return float(out) if np.ndim(out) == 0 else out
