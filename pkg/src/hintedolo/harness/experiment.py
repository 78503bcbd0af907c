"""Config loading and the experiment driver.

A config is a JSON document

    {"learner":   {"variant", "q", "mu", "eta", "epsilon"},
     "adversary": {"kind", "T", "B", "q", "alpha", "bad_fraction", "dim", "drift"},
     "run":       {"seed", "replicas", "alpha_grid"}}

Every key is optional except learner.variant, adversary.kind and adversary.T;
unknown keys are rejected.  All replicas of a run advance in one batched
learner, and replica i draws its stream from seed (run.seed, i).
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from ..adaptive_ftrl import GENERAL_Q, MAIN_Q2, lambda_residual
from ..adversaries import AdversaryConfig, KINDS, generate
from ..hinted_learner import HintedLearner
from ..spaces import DomainError, SpaceSpec
from ..unconstrained import HintCombiner
from . import bounds
from .audit import DEFAULT_ALPHA_GRID, BoundReport, RegretReport, bound_report, regret_report

UNCONSTRAINED = "unconstrained"
LEARNER_VARIANTS = (MAIN_Q2, GENERAL_Q, UNCONSTRAINED)

LEARNER_KEYS = {"variant", "q", "mu", "eta", "epsilon"}
ADVERSARY_KEYS = {"kind", "T", "B", "q", "alpha", "bad_fraction", "dim", "drift"}
RUN_KEYS = {"seed", "replicas", "alpha_grid"}

FEAS_SLACK = 1e-9
BOUND_SLACK = 1e-6


class ConfigError(ValueError):
    """Invalid or inconsistent configuration."""


class InvariantViolation(RuntimeError):
    """A runtime invariant or regret bound failed on a recorded run."""


@dataclass(frozen=True)
class LearnerConfig:
    variant: str = MAIN_Q2
    q: float = 2.0
    mu: float | None = None
    eta: float = 1.0
    epsilon: float = 1.0

    def __post_init__(self):
        if self.variant not in LEARNER_VARIANTS:
            raise ConfigError(f"learner.variant must be one of {LEARNER_VARIANTS}, got {self.variant!r}")
        if not self.q >= 2 or not math.isfinite(self.q):
            raise ConfigError(f"learner.q must be a finite number >= 2, got {self.q}")
        if self.variant in (MAIN_Q2, UNCONSTRAINED) and self.q != 2:
            raise ConfigError(f"learner.variant {self.variant} requires q = 2")
        if self.mu is not None and not self.mu > 0:
            raise ConfigError(f"learner.mu must be positive, got {self.mu}")
        if not self.eta >= 1:
            raise ConfigError(f"learner.eta must be >= 1, got {self.eta}")
        if not self.epsilon > 0:
            raise ConfigError(f"learner.epsilon must be positive, got {self.epsilon}")

    def space(self, dim: int) -> SpaceSpec:
        return SpaceSpec(q=self.q, mu=self.mu, dim=dim)


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    replicas: int = 1
    alpha_grid: tuple = DEFAULT_ALPHA_GRID

    def __post_init__(self):
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError(f"run.seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.replicas < 1:
            raise ConfigError(f"run.replicas must be >= 1, got {self.replicas}")
        if not self.alpha_grid or any(not a > 0 for a in self.alpha_grid):
            raise ConfigError("run.alpha_grid must be a nonempty list of positive numbers")


@dataclass(frozen=True)
class ExperimentConfig:
    learner: LearnerConfig
    adversary: AdversaryConfig
    run: RunConfig = field(default_factory=RunConfig)

    def to_dict(self):
        adv = asdict(self.adversary)
        adv.pop("seed")
        return {"learner": asdict(self.learner), "adversary": adv,
                "run": dict(asdict(self.run), alpha_grid=list(self.run.alpha_grid))}


def _section(doc, name, allowed, required=False):
    sec = doc.get(name)
    if sec is None:
        if required:
            raise ConfigError(f"missing section {name!r}")
        return {}
    if not isinstance(sec, dict):
        raise ConfigError(f"section {name!r} must be an object")
    unknown = set(sec) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in {name}: {', '.join(sorted(unknown))}")
    return dict(sec)


def _number(sec, name, key, integer=False):
    if key not in sec:
        return
    v = sec[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{name}.{key} must be a number, got {v!r}")
    if integer:
        if isinstance(v, float) and not v.is_integer():
            raise ConfigError(f"{name}.{key} must be an integer, got {v!r}")
        sec[key] = int(v)
    else:
        sec[key] = float(v)


def parse_config(doc) -> ExperimentConfig:
    """Validate a config mapping; raises ConfigError with the offending key."""
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(doc) - {"learner", "adversary", "run"}
    if unknown:
        raise ConfigError(f"unknown top-level key(s): {', '.join(sorted(unknown))}")
    lrn = _section(doc, "learner", LEARNER_KEYS, required=True)
    adv = _section(doc, "adversary", ADVERSARY_KEYS, required=True)
    run = _section(doc, "run", RUN_KEYS)
    for key in ("q", "mu", "eta", "epsilon"):
        if lrn.get(key) is not None:
            _number(lrn, "learner", key)
        elif key in lrn:
            lrn.pop(key)
    for key in ("q", "alpha", "bad_fraction", "drift"):
        _number(adv, "adversary", key)
    for key in ("T", "B", "dim"):
        _number(adv, "adversary", key, integer=True)
    _number(run, "run", "seed", integer=True)
    _number(run, "run", "replicas", integer=True)
    if "variant" not in lrn:
        raise ConfigError("learner.variant is required")
    if "kind" not in adv or adv["kind"] not in KINDS:
        raise ConfigError(f"adversary.kind must be one of {KINDS}, got {adv.get('kind')!r}")
    if "T" not in adv:
        raise ConfigError("adversary.T is required")
    if "alpha_grid" in run:
        grid = run["alpha_grid"]
        if not isinstance(grid, list) or any(isinstance(a, bool) or not isinstance(a, (int, float))
                                            for a in grid):
            raise ConfigError("run.alpha_grid must be a list of numbers")
        run["alpha_grid"] = tuple(float(a) for a in grid)
    # the stream and the learner live in one space
    if "q" in lrn and "q" in adv and lrn["q"] != adv["q"]:
        raise ConfigError(f"learner.q = {lrn['q']} and adversary.q = {adv['q']} disagree")
    q = lrn.get("q", adv.get("q", 2.0))
    lrn["q"] = adv["q"] = q
    try:
        learner = LearnerConfig(**lrn)
        run_cfg = RunConfig(**run)
        adversary = AdversaryConfig(seed=run_cfg.seed, **adv)
    except ConfigError:
        raise
    except (DomainError, TypeError) as e:
        raise ConfigError(str(e)) from e
    return ExperimentConfig(learner, adversary, run_cfg)


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"config {path} is not valid JSON: {e}") from e
    return parse_config(doc)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    traces: list
    regret_reports: list[RegretReport]
    bound_reports: list[BoundReport]
    comparator_losses: list          # per replica, <c_t, u*> for u* best in hindsight
    violations: list[str]

    def summary(self) -> dict:
        best = [r.best_regret for r in self.regret_reports]
        return {
            "config": self.config.to_dict(),
            "replicas": len(self.traces),
            "T": self.config.adversary.T,
            "mean_best_regret": float(np.mean(best)) if best else 0.0,
            "regret": [r.to_dict() for r in self.regret_reports],
            "bounds": [b.to_dict() for b in self.bound_reports],
            "violations": self.violations,
        }


def _comparator_losses(stream, u):
    """Per-round <c_t, u> for each replica; u has shape (n, dim)."""
    if stream.H is not None:
        C = stream.C
        return np.einsum("tnd,nd->tn", C, u) if C.size else np.zeros((0, u.shape[0]))
    out = np.zeros((stream.T, u.shape[0]))
    for t in range(1, stream.T + 1):
        _, c = stream.round(t)
        out[t - 1] = np.einsum("nd,nd->n", np.atleast_2d(c), u)
    return out


def check_invariants(trace, alpha_grid=DEFAULT_ALPHA_GRID, best_regret=None) -> list[str]:
    """Runtime invariants of a (batched or single) hinted-learner trace."""
    out = []
    spec = trace.spec
    if trace.T == 0:
        return out
    if np.max(trace.x_norm) > 1.0 + FEAS_SLACK:
        out.append(f"infeasible play: max ||x_t||_q = {np.max(trace.x_norm):.12g}")
    corr = np.asarray(trace.corr)
    bad_abs = np.where(corr < 0, np.abs(corr), 0.0)
    prev = np.concatenate([np.zeros_like(bad_abs[:1]), np.cumsum(bad_abs, axis=0)[:-1]])
    if trace.variant == MAIN_Q2:
        gap = np.max(np.abs(trace.r ** 2 - 1.0 - prev))
    else:
        gap = np.max(np.abs(trace.r ** spec.p - 1.0 - prev / trace.eta ** spec.p))
    if gap > 1e-9:
        out.append(f"confidence-scale identity off by {gap:.3g}")
    lam = np.asarray(trace.lam)
    lam_prev = np.concatenate([np.zeros_like(lam[:1]), np.cumsum(lam, axis=0)[:-1]])
    res = lambda_residual(lam, trace.cost_norm, np.cumsum(trace.sigma, axis=0), lam_prev,
                          spec, trace.variant)
    if np.max(res) > 1e-10:
        out.append(f"lambda fixed-point residual {np.max(res):.3g}")
    if np.max(lam) > trace.lambda0 * (1 + 1e-12):
        out.append(f"lambda_t exceeds lambda_0: {np.max(lam):.12g} > {trace.lambda0:.12g}")
    br = trace.best_regret() if best_regret is None else best_regret
    for alpha in alpha_grid:
        if trace.variant == MAIN_Q2:
            b = bounds.bound_main(trace, alpha)
            name = "bound_main"
        else:
            b = bounds.bound_q(trace, alpha)
            name = "bound_q"
        excess = np.max(np.asarray(br) - b)
        if excess > BOUND_SLACK:
            out.append(f"{name} exceeded at alpha={alpha} by {excess:.6g}")
    if trace.variant == MAIN_Q2 and spec.is_hilbert:
        b, _ = bounds.bound_optimistic(trace)
        excess = np.max(np.asarray(br) - b)
        if excess > BOUND_SLACK:
            out.append(f"bound_optimistic exceeded by {excess:.6g}")
    return out


def check_combiner(trace, epsilon: float) -> list[str]:
    """Decomposition identity and parameter-free guarantee of a combiner trace."""
    out = []
    if trace.T == 0:
        return out
    base, y = trace.extras["base_loss"], trace.extras["y"]
    ident = trace.loss - (base - y * trace.corr)
    scale = np.maximum(1.0, np.abs(base) + np.abs(y * trace.corr))
    if np.max(np.abs(ident) / scale) > 1e-9:
        out.append("combiner decomposition identity fails")
    # each base learner risks at most epsilon, so the sum risks at most 2 epsilon
    loss0 = trace.total_loss()
    if np.max(loss0 - 1e-9 * np.sum(np.abs(trace.loss), axis=0)) > 2 * epsilon:
        out.append(f"regret against u = 0 exceeds 2 epsilon: {np.max(loss0):.6g}")
    return out


def run_experiment(learner, adversary, T: int | None = None, seed: int | None = None,
                   replicas: int | None = None, alpha_grid=None, keep_vectors: bool = False,
                   check: bool = True) -> ExperimentResult:
    """Run ``learner`` against ``adversary`` for each replica.

    ``learner``/``adversary`` are config objects or mappings; ``T`` and
    ``seed`` override the adversary's values.
    """
    if isinstance(learner, dict):
        learner = LearnerConfig(**learner)
    if isinstance(adversary, dict):
        adversary = AdversaryConfig(**adversary)
    changes = {}
    if T is not None:
        changes["T"] = T
    if seed is not None:
        changes["seed"] = seed
    if changes:
        d = asdict(adversary)
        d.update(changes)
        if adversary.kind == "lq_orthogonal":
            d["dim"] = None
        adversary = AdversaryConfig(**d)
    if adversary.q != learner.q:
        raise ConfigError(f"learner.q = {learner.q} and adversary.q = {adversary.q} disagree")
    run = RunConfig(seed=adversary.seed, replicas=replicas or 1,
                    alpha_grid=tuple(alpha_grid or DEFAULT_ALPHA_GRID))
    config = ExperimentConfig(learner, adversary, run)
    n = run.replicas
    stream = generate(adversary, n, batched=True)
    spec = learner.space(adversary.dim)
    meta = dict(learner_config=asdict(learner), adversary_config=asdict(adversary),
                seed=adversary.seed)
    violations = []
    if learner.variant == UNCONSTRAINED:
        batch = HintCombiner(adversary.dim, learner.epsilon, (n,)).run(
            stream, keep_vectors=keep_vectors, **meta)
        if check:
            violations += check_combiner(batch, learner.epsilon)
    else:
        agent = HintedLearner(spec, learner.variant, learner.eta, (n,))
        batch = agent.run(stream, keep_vectors=keep_vectors, **meta)
        if check:
            violations += check_invariants(batch, run.alpha_grid)
    u_best, _ = batch.best_comparator()
    comp = _comparator_losses(stream, u_best)
    traces = batch.replicas()
    regret_reports, bound_reports = [], []
    for tr in traces:
        regret_reports.append(regret_report(tr, tested={"zero": np.zeros(adversary.dim)}))
        if learner.variant != UNCONSTRAINED:
            bound_reports.append(bound_report(tr, run.alpha_grid))
    return ExperimentResult(config, traces, regret_reports, bound_reports,
                            [comp[:, i] for i in range(n)], violations)


def run_config(config: ExperimentConfig, keep_vectors: bool = False, check: bool = True):
    return run_experiment(config.learner, config.adversary, replicas=config.run.replicas,
                          alpha_grid=config.run.alpha_grid, keep_vectors=keep_vectors,
                          check=check)
