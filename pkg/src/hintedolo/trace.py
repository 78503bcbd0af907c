"""Per-round records of a run, stored column-wise.

Scalar columns have shape (T, *batch); vector columns, kept only when asked
for, have shape (T, *batch, dim).  The final cost sum C_T is always kept, so
regret against any fixed comparator is available without the vectors.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from typing import Any

import numpy as np

from .spaces import SpaceSpec, best_comparator, norm_power, pairing

SCALAR_COLUMNS = ("loss", "r", "sigma", "lam", "corr", "cost_norm", "g_norm",
                  "surrogate_xbar", "x_norm")
VECTOR_COLUMNS = ("h", "c", "xbar", "x", "g")


@dataclass(frozen=True)
class RoundRecord:
    t: int
    h: np.ndarray | None
    c: np.ndarray | None
    xbar: np.ndarray | None
    x: np.ndarray | None
    r: float
    sigma: float
    lam: float
    g: np.ndarray | None
    loss: float
    corr: float
    cost_norm: float


@dataclass(frozen=True)
class Trace:
    spec: SpaceSpec
    variant: str
    loss: np.ndarray
    corr: np.ndarray
    cost_norm: np.ndarray
    cost_sum: np.ndarray
    r: np.ndarray | None = None
    sigma: np.ndarray | None = None
    lam: np.ndarray | None = None
    g_norm: np.ndarray | None = None
    surrogate_xbar: np.ndarray | None = None
    x_norm: np.ndarray | None = None
    h: np.ndarray | None = None
    c: np.ndarray | None = None
    xbar: np.ndarray | None = None
    x: np.ndarray | None = None
    g: np.ndarray | None = None
    lambda0: float = float("nan")
    eta: float = 1.0
    r_final: np.ndarray | float | None = None
    learner_config: dict[str, Any] = field(default_factory=dict)
    adversary_config: dict[str, Any] = field(default_factory=dict)
    seed: int | None = None
    extras: dict[str, np.ndarray] = field(default_factory=dict)
    """Additional per-round columns with leading axis T."""

    @property
    def T(self) -> int:
        return int(self.loss.shape[0])

    @property
    def t(self) -> np.ndarray:
        return np.arange(1, self.T + 1)

    @property
    def batch_shape(self) -> tuple:
        return tuple(self.cost_sum.shape[:-1])

    @property
    def has_vectors(self) -> bool:
        return self.c is not None

    def replica(self, i: int) -> "Trace":
        """Slice replica i out of a batched trace."""
        if not self.batch_shape:
            raise ValueError("trace is not batched")
        kw = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name in SCALAR_COLUMNS or f.name in VECTOR_COLUMNS:
                kw[f.name] = None if v is None else v[:, i]
            elif f.name in ("cost_sum", "r_final"):
                kw[f.name] = None if v is None else np.asarray(v)[i]
        kw["extras"] = {k: v[:, i] for k, v in self.extras.items()}
        if kw.get("r_final") is not None:
            kw["r_final"] = float(kw["r_final"])
        seed = self.seed[i] if isinstance(self.seed, (list, tuple)) else self.seed
        return replace(self, seed=seed, **kw)

    def replicas(self) -> list["Trace"]:
        if not self.batch_shape:
            return [self]
        return [self.replica(i) for i in range(self.batch_shape[0])]

    @property
    def rounds(self) -> list[RoundRecord]:
        if self.batch_shape:
            raise ValueError("rounds view is only available on single-replica traces")

        def vec(name, i):
            v = getattr(self, name)
            return None if v is None else v[i]

        def sc(name, i):
            v = getattr(self, name)
            return float("nan") if v is None else float(v[i])

        return [RoundRecord(t=i + 1, h=vec("h", i), c=vec("c", i), xbar=vec("xbar", i),
                            x=vec("x", i), r=sc("r", i), sigma=sc("sigma", i),
                            lam=sc("lam", i), g=vec("g", i), loss=float(self.loss[i]),
                            corr=float(self.corr[i]), cost_norm=float(self.cost_norm[i]))
                for i in range(self.T)]

    # --- regret accounting -------------------------------------------------

    def total_loss(self):
        return np.sum(self.loss, axis=0)

    def regret(self, u):
        """sum_t <c_t, x_t - u>."""
        return self.total_loss() - pairing(self.cost_sum, u)

    def best_comparator(self):
        return best_comparator(self.cost_sum, self.spec)

    def best_regret(self):
        """Regret against the best point of the unit ball in hindsight."""
        _, val = self.best_comparator()
        return self.total_loss() - val

    def surrogate_regret(self, u):
        """sum_t l_t(xbar_t) - l_t(u) for the recorded surrogates."""
        if self.surrogate_xbar is None:
            raise ValueError("trace has no surrogate records")
        q = self.spec.q
        coeff = np.sum(np.abs(self.corr) / (q * self.r), axis=0)
        u_pow = np.asarray(norm_power(u, q))
        sur_u = pairing(self.cost_sum, u) + coeff * (u_pow - 1.0)
        return np.sum(self.surrogate_xbar, axis=0) - sur_u

    def cumulative_regret(self, comparator_losses):
        """Running regret given per-round comparator losses <c_t, u>."""
        return np.cumsum(self.loss, axis=0) - np.cumsum(comparator_losses, axis=0)


class TraceRecorder:
    """Accumulates per-round columns and stacks them into a :class:`Trace`."""

    def __init__(self, keep_vectors: bool = True):
        self.keep_vectors = keep_vectors
        self.cols: dict[str, list] = {}

    def add(self, **cols):
        for k, v in cols.items():
            if k in VECTOR_COLUMNS and not self.keep_vectors:
                continue
            self.cols.setdefault(k, []).append(np.asarray(v, dtype=float))

    def build(self, spec: SpaceSpec, variant: str, cost_sum, batch_shape=(),
              columns=SCALAR_COLUMNS, vectors=VECTOR_COLUMNS, **meta) -> Trace:
        batch_shape = tuple(batch_shape)
        kw = {}
        for name in columns:
            kw[name] = (np.stack(self.cols[name]) if name in self.cols
                        else np.zeros((0,) + batch_shape))
        if self.keep_vectors:
            for name in vectors:
                kw[name] = (np.stack(self.cols[name]) if name in self.cols
                            else np.zeros((0,) + batch_shape + (spec.dim,)))
        return Trace(spec=spec, variant=variant, cost_sum=np.asarray(cost_sum, dtype=float),
                     **kw, **meta)
