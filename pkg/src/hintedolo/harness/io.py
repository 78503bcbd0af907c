"""Flat-file formats: trace CSV (+ JSON sidecar) and vector stream files.

Trace CSV columns, in order: t, loss, cum_regret_best_u, r_t, sigma_t,
lambda_t, corr, cost_dual_norm.  Floats use 17 significant digits so values
round-trip exactly; the writer is deterministic, so identical runs give
byte-identical files.

Stream files hold one round per line, ``h_1 ... h_d | c_1 ... c_d``, each
number in shortest round-trip plain decimal.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from ..spaces import SpaceSpec
from ..trace import Trace

CSV_COLUMNS = ("t", "loss", "cum_regret_best_u", "r_t", "sigma_t", "lambda_t", "corr",
               "cost_dual_norm")


def _g17(v) -> str:
    return format(float(v), ".17g")


def meta_path(csv_path) -> Path:
    p = Path(csv_path)
    return p.with_name(p.name + ".meta.json")


def write_trace_csv(path, trace: Trace, comparator_losses, meta: dict | None = None) -> Path:
    """Write a single-replica trace; ``comparator_losses`` are the per-round <c_t, u*>."""
    T = trace.T
    nan = np.full(T, np.nan)
    cum = np.cumsum(trace.loss) - np.cumsum(np.asarray(comparator_losses, dtype=float))

    def col(v):
        return nan if v is None else np.asarray(v, dtype=float)

    cols = [np.arange(1, T + 1), trace.loss, cum, col(trace.r), col(trace.sigma), col(trace.lam),
            trace.corr, trace.cost_norm]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for i in range(T):
            w.writerow([str(i + 1)] + [_g17(c[i]) for c in cols[1:]])
    if meta is not None:
        meta_path(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return path


def trace_meta(trace: Trace) -> dict:
    """Sidecar fields needed to audit a CSV trace."""
    return {"variant": trace.variant, "q": trace.spec.q, "mu": trace.spec.mu,
            "dim": trace.spec.dim, "eta": trace.eta, "lambda0": trace.lambda0,
            "learner_config": trace.learner_config, "adversary_config": trace.adversary_config,
            "seed": trace.seed}


def read_trace_csv(path) -> dict:
    """Columns of a trace CSV as float arrays keyed by header name."""
    with Path(path).open(newline="") as f:
        rows = list(csv.reader(f))
    if not rows or tuple(rows[0]) != CSV_COLUMNS:
        raise ValueError(f"{path}: header must be {','.join(CSV_COLUMNS)}")
    body = np.array([[float(x) for x in r] for r in rows[1:]], dtype=float).reshape(-1, len(CSV_COLUMNS))
    cols = {name: body[:, i] for i, name in enumerate(CSV_COLUMNS)}
    if len(body) and not np.array_equal(cols["t"], np.arange(1, len(body) + 1)):
        raise ValueError(f"{path}: t must run 1, 2, ... without gaps")
    return cols


def load_trace(path, meta: dict | None = None) -> Trace:
    """Rebuild an auditable Trace from a CSV and its sidecar (or an explicit ``meta``)."""
    if meta is None:
        mp = meta_path(path)
        if not mp.exists():
            raise FileNotFoundError(f"no sidecar {mp}; pass the learner settings explicitly")
        meta = json.loads(mp.read_text())
    cols = read_trace_csv(path)
    spec = SpaceSpec(q=float(meta.get("q", 2.0)), mu=meta.get("mu"), dim=int(meta.get("dim", 1)))

    def opt(name):
        v = cols[name]
        return None if v.size and np.all(np.isnan(v)) else v

    cum = cols["cum_regret_best_u"]
    return Trace(spec=spec, variant=meta.get("variant", "main_q2"), loss=cols["loss"],
                 corr=cols["corr"], cost_norm=cols["cost_dual_norm"],
                 cost_sum=np.full(spec.dim, np.nan), r=opt("r_t"), sigma=opt("sigma_t"),
                 lam=opt("lambda_t"), lambda0=float(meta.get("lambda0", np.nan)),
                 eta=float(meta.get("eta", 1.0)),
                 learner_config=meta.get("learner_config") or {},
                 adversary_config=meta.get("adversary_config") or {}, seed=meta.get("seed"),
                 extras={"cum_regret_best_u": cum})


def csv_best_regret(trace: Trace) -> float:
    cum = trace.extras.get("cum_regret_best_u")
    if cum is None:
        return float(trace.best_regret())
    return float(cum[-1]) if len(cum) else 0.0


def _num(x) -> str:
    return np.format_float_positional(float(x) + 0.0, unique=True, trim="-")


def write_stream(path, H, C) -> Path:
    """Write rounds (h_t, c_t); H and C have shape (T, dim)."""
    H = np.asarray(H, dtype=float)
    C = np.asarray(C, dtype=float)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as f:
        for h, c in zip(H, C):
            f.write(" ".join(map(_num, h)) + " | " + " ".join(map(_num, c)) + "\n")
    return path


def write_stream_rounds(path, rounds) -> Path:
    """Like ``write_stream`` but consumes an iterator of (h, c), for streams too big to stack."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as f:
        for h, c in rounds:
            f.write(" ".join(map(_num, h)) + " | " + " ".join(map(_num, c)) + "\n")
    return path


def read_stream(path):
    """(H, C) arrays of shape (T, dim) from a stream file."""
    H, C = [], []
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        if not line.strip():
            continue
        if line.count("|") != 1:
            raise ValueError(f"{path}:{n}: expected 'h ... | c ...'")
        left, right = line.split("|")
        h = [float(x) for x in left.split()]
        c = [float(x) for x in right.split()]
        if len(h) != len(c):
            raise ValueError(f"{path}:{n}: hint and cost lengths differ")
        H.append(h)
        C.append(c)
    return np.array(H, dtype=float), np.array(C, dtype=float)
