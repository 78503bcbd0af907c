"""Randomized checks of the scalar inequalities behind the regret analysis.

* sum formula: sum_t a_t h(a_{0:t}) <= int_{a_0}^{a_{0:T}} h for non-increasing h >= 0
* power sum:   sum_t a_t / (a_{1:t})^{1/p} <= q (a_{1:T})^{1/q}
* optimal lambda: inf_{L >= z} A L + B / L^{p/q} <= A z + p^{1/p} q^{1/q} A^{1/q} B^{1/p}
                  <= A z + 2 A^{1/q} B^{1/p}
* rate competitiveness: the self-referential rates are within a factor 2
  of any other rate sequence.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from ..adaptive_ftrl import solve_fixed_point

VIOLATION_TOL = 1e-9

# non-increasing h on [0, inf) paired with its antiderivative
_H_FAMILY = {
    "inv_power": (lambda z, s: z ** -s,
                  lambda lo, hi, s: (np.log(hi / lo) if s == 1
                                     else (hi ** (1 - s) - lo ** (1 - s)) / (1 - s))),
    "exp": (lambda z, s: np.exp(-s * z),
            lambda lo, hi, s: (np.exp(-s * lo) - np.exp(-s * hi)) / s),
    "shifted_inv_square": (lambda z, s: 1.0 / (s + z) ** 2,
                           lambda lo, hi, s: 1.0 / (s + lo) - 1.0 / (s + hi)),
}


def sum_formula_sides(a, h, H):
    """(sum_{t>=1} a_t h(a_{0:t}), int_{a_0}^{a_{0:T}} h) with ``H(lo, hi)`` the integral."""
    a = np.asarray(a, dtype=float)
    cum = np.cumsum(a)
    lhs = float(np.sum(np.where(a[1:] > 0, a[1:] * h(np.maximum(cum[1:], 1e-300)), 0.0)))
    rhs = float(H(cum[0], cum[-1])) if cum[-1] > cum[0] else 0.0
    return lhs, rhs


def polysum_sides(a, p: float):
    """(sum a_t / (a_{1:t})^{1/p}, q (a_{1:T})^{1/q}); zero-prefix terms contribute 0."""
    a = np.asarray(a, dtype=float)
    q = p / (p - 1.0)
    cum = np.cumsum(a)
    safe = np.where(cum > 0, cum, 1.0)
    lhs = float(np.sum(np.where(a > 0, a / safe ** (1.0 / p), 0.0)))
    return lhs, float(q * cum[-1] ** (1.0 / q)) if a.size else 0.0


def optlambda_sides(A, B, z, p: float, grid: int = 2001):
    """(approximate inf, Young-constant bound, loose bound) for inf_{L>=z} A L + B/L^{p/q}."""
    q = p / (p - 1.0)
    e = p / q

    def obj(L):
        return A * L + B / L ** e

    star = (p * B / (q * A)) ** (1.0 / p)
    cand = z + star
    hi = max(cand, z) * 4.0 + 1.0
    lo = max(z, 1e-12)
    Ls = np.concatenate([np.geomspace(lo, hi, grid), [cand]])
    inf = float(np.min(obj(Ls)))
    tight = A * z + p ** (1.0 / p) * q ** (1.0 / q) * A ** (1.0 / q) * B ** (1.0 / p)
    loose = A * z + 2.0 * A ** (1.0 / q) * B ** (1.0 / p)
    return inf, float(tight), float(loose)


def rate_objective(lams, G, sigma, mu: float, a: float):
    """sum_t lam_t + G_t / (sigma_{1:t} + mu lam_{1:t})^a; rows of a 2-D ``lams`` are separate sequences."""
    lams = np.asarray(lams, dtype=float)
    G = np.asarray(G, dtype=float)
    denom = np.cumsum(sigma) + mu * np.cumsum(lams, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(G > 0, G / np.where(denom > 0, denom, 0.0) ** a, 0.0)
    out = np.sum(lams, axis=-1) + np.sum(terms, axis=-1)
    return float(out) if out.ndim == 0 else out


def self_referential_rates(G, sigma, mu: float, a: float):
    """lam_t = G_t / (sigma_{1:t} + mu lam_{1:t})^a, solved round by round."""
    lams = np.zeros(len(G))
    lsum, ssum = 0.0, 0.0
    for t in range(len(G)):
        ssum += sigma[t]
        lams[t] = solve_fixed_point(G[t], ssum + mu * lsum, mu, a)
        lsum += lams[t]
    return lams


def competitiveness_sides(G, sigma, mu: float, a: float, grid=None):
    """(objective at the self-referential rates, 2 x best objective over the alternatives).

    Alternatives are constant sequences lam*_t = v and front-loaded ones
    lam*_1 = v, lam*_t = 0 after, for v on ``grid`` (default 200 points in [0, 2]).
    """
    G = np.asarray(G, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    grid = np.linspace(0.0, 2.0, 200) if grid is None else np.asarray(grid, dtype=float)
    lams = self_referential_rates(G, sigma, mu, a)
    lhs = rate_objective(lams, G, sigma, mu, a)
    T = len(G)
    const = np.repeat(grid[:, None], T, axis=1)
    front = np.zeros_like(const)
    front[:, :1] = grid[:, None]
    best = min(np.min(rate_objective(const, G, sigma, mu, a)),
               np.min(rate_objective(front, G, sigma, mu, a)))
    return lhs, 2.0 * best


@dataclass
class LemmaCheck:
    name: str
    samples: int = 0
    max_violation: float = 0.0
    worst_case: dict = field(default_factory=dict)

    def record(self, lhs, rhs, case):
        self.samples += 1
        v = lhs - rhs
        if v > self.max_violation:
            self.max_violation = float(v)
            self.worst_case = dict(case, lhs=float(lhs), rhs=float(rhs))


@dataclass
class LemmaReport:
    samples: int
    seed: int
    checks: list

    @property
    def violations(self) -> int:
        return sum(1 for c in self.checks if c.max_violation > VIOLATION_TOL)

    @property
    def ok(self) -> bool:
        return self.violations == 0

    def to_dict(self):
        return dict(samples=self.samples, seed=self.seed, ok=self.ok,
                    checks=[asdict(c) for c in self.checks])


def _random_sequence(rng, n):
    a = rng.exponential(size=n) * 10.0 ** rng.uniform(-3, 1)
    # sprinkle exact zeros, they are allowed
    a[rng.random(n) < 0.2] = 0.0
    return a


def check_math_lemmas(samples: int = 10_000, seed: int = 0) -> LemmaReport:
    """Evaluate both sides of each inequality on ``samples`` random instances apiece."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed])))
    sumf = LemmaCheck("sum_formula")
    poly = LemmaCheck("power_sum")
    optl = LemmaCheck("optimal_lambda")
    optl2 = LemmaCheck("optimal_lambda_loose")
    comp = LemmaCheck("rate_competitiveness")
    names = list(_H_FAMILY)
    for i in range(samples):
        n = int(rng.integers(1, 30))
        a = _random_sequence(rng, n + 1)
        kind = names[i % len(names)]
        h, H = _H_FAMILY[kind]
        s = float(rng.uniform(0.1, 2.0))
        if kind == "inv_power":
            a[0] = max(a[0], 1e-3)  # z^{-s} needs a positive start
        lhs, rhs = sum_formula_sides(a, lambda z: h(z, s), lambda lo, hi: H(lo, hi, s))
        sumf.record(lhs, rhs, dict(kind=kind, s=s, a=a.tolist()))

        p = float(rng.uniform(1.05, 4.0))
        b = _random_sequence(rng, n)
        lhs, rhs = polysum_sides(b, p)
        poly.record(lhs, rhs, dict(p=p, a=b.tolist()))

        A, B = (float(v) for v in 10.0 ** rng.uniform(-2, 2, size=2))
        z = float(rng.uniform(0, 3)) * (rng.random() < 0.8)
        inf, tight, loose = optlambda_sides(A, B, z, p)
        case = dict(A=A, B=B, z=z, p=p)
        optl.record(inf, tight, case)
        optl2.record(tight, loose, case)

        if i % 2 == 0:
            T = int(rng.integers(1, 11))
            G = rng.uniform(0.01, 2.0, size=T)
            sig = rng.uniform(0, 1, size=T) * (rng.random(T) < 0.7)
            mu = float(rng.uniform(0.2, 1.0))
            a_exp = 1.0 if rng.random() < 0.5 else float(rng.uniform(0.2, 1.0))
            lhs, rhs = competitiveness_sides(G, sig, mu, a_exp)
            comp.record(lhs, rhs, dict(G=G.tolist(), sigma=sig.tolist(), mu=mu, a=a_exp))
    return LemmaReport(samples=samples, seed=seed, checks=[sumf, poly, optl, optl2, comp])
