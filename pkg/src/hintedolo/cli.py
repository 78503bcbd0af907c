"""Command-line workbench.

    hintedolo run CONFIG [--out trace.csv]       run an experiment, write trace CSV(s)
    hintedolo audit TRACE.csv                    set sizes and bounds for a trace
    hintedolo bounds KIND --name value ...       evaluate a bound from scalars
    hintedolo adversary [CONFIG] --out FILE      write a hint/cost stream
    hintedolo check-lemmas [--samples N]         fuzz the scalar inequalities

Exit codes: 0 success, 1 configuration error, 2 invariant or bound violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

from .adversaries import AdversaryConfig, KINDS, generate
from .harness import bounds as B
from .harness.audit import DEFAULT_ALPHA_GRID, bound_report
from .harness.experiment import ConfigError, load_config, run_config
from .harness.io import (csv_best_regret, load_trace, trace_meta, write_stream,
                         write_stream_rounds, write_trace_csv)
from .harness.lemmas import check_math_lemmas
from .spaces import DomainError
from .unconstrained import f_bound

EXIT_OK, EXIT_CONFIG, EXIT_VIOLATION = 0, 1, 2


def _dump(obj, path=None):
    text = json.dumps(obj, indent=2, sort_keys=True, allow_nan=True)
    if path:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text + "\n")
    else:
        print(text)


def _grid(text):
    try:
        vals = tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"bad alpha grid {text!r}") from e
    if not vals or any(v <= 0 for v in vals):
        raise argparse.ArgumentTypeError("alpha grid needs positive values")
    return vals


def replica_path(out: Path, i: int, n: int) -> Path:
    if n == 1:
        return out
    return out.with_name(f"{out.stem}_r{i}{out.suffix}")


def cmd_run(args) -> int:
    config = load_config(args.config)
    result = run_config(config, check=not args.no_check)
    out = Path(args.out)
    n = len(result.traces)
    for i, tr in enumerate(result.traces):
        meta = dict(trace_meta(tr), replica=i)
        write_trace_csv(replica_path(out, i, n), tr, result.comparator_losses[i], meta)
    summary = result.summary()
    if args.report:
        _dump(summary, args.report)
    else:
        brief = {k: summary[k] for k in ("T", "replicas", "mean_best_regret", "violations")}
        _dump(brief)
    for v in result.violations:
        print(f"invariant violation: {v}", file=sys.stderr)
    return EXIT_VIOLATION if result.violations else EXIT_OK


def cmd_audit(args) -> int:
    meta = None
    if args.meta:
        meta = json.loads(Path(args.meta).read_text())
    elif args.variant:
        meta = {"variant": args.variant, "q": args.q, "mu": args.mu, "eta": args.eta or 1.0}
    trace = load_trace(args.trace, meta)
    rep = bound_report(trace, args.alpha_grid, best_regret=csv_best_regret(trace), eta=args.eta)
    _dump(rep.to_dict())
    bad = rep.violations()
    for alpha, name, val in bad:
        print(f"bound violation: {name} at alpha={alpha}: regret {rep.best_regret:.6g} > {val:.6g}",
              file=sys.stderr)
    return EXIT_VIOLATION if bad else EXIT_OK


def cmd_bounds(args) -> int:
    k = args.kind
    if k == "main":
        val = B.main_bound_value(args.mu, args.alpha, args.Q_alpha, args.G_sum, args.B_corr_sum)
    elif k == "q":
        val = B.q_bound_value(args.q, args.mu, args.alpha, args.eta, args.G_sum, args.B_alpha_sum,
                              args.B_corr_sum)
    elif k == "optimistic":
        val = B.optimistic_bound_value(args.T, args.Z)
    elif k == "S":
        val = B.s_integral(args.G_sum, args.q)
    elif k == "f":
        val = f_bound(args.u_norm, args.C_T, args.epsilon, args.mu)
    elif k == "unconstrained":
        val = B.unconstrained_bound_value(args.u_norm, args.C_T, args.epsilon, args.mu,
                                          args.alpha, args.n_relaxed_bad)
    else:  # argparse restricts choices
        raise AssertionError(k)
    _dump({"bound": k, "value": val})
    return EXIT_OK


def cmd_adversary(args) -> int:
    fields = {}
    if args.config:
        cfg = load_config(args.config)
        fields = asdict(cfg.adversary)
    for key in ("kind", "T", "B", "q", "alpha", "bad_fraction", "seed", "dim", "drift"):
        v = getattr(args, key)
        if v is not None:
            fields[key] = v
    if "kind" not in fields or "T" not in fields:
        raise ConfigError("adversary needs --kind and --T (or a config file)")
    if fields["kind"] == "lq_orthogonal" and args.dim is None:
        fields["dim"] = None  # follows T
    try:
        config = AdversaryConfig(**fields)
    except DomainError as e:
        raise ConfigError(str(e)) from e
    stream = generate(config, (args.replica,), batched=False)
    if stream.H is None:
        write_stream_rounds(args.out, stream)
    else:
        H, C = stream.arrays()
        write_stream(args.out, H, C)
    return EXIT_OK


def cmd_check_lemmas(args) -> int:
    rep = check_math_lemmas(args.samples, args.seed)
    _dump(rep.to_dict() if args.verbose else
          {"samples": rep.samples, "seed": rep.seed, "ok": rep.ok,
           "max_violation": {c.name: c.max_violation for c in rep.checks}})
    return EXIT_OK if rep.ok else EXIT_VIOLATION


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hintedolo", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an experiment from a JSON config")
    p.add_argument("config")
    p.add_argument("--out", default="trace.csv",
                   help="trace CSV path; replicas get _r<i> suffixes (default trace.csv)")
    p.add_argument("--report", help="write the full JSON report here")
    p.add_argument("--no-check", action="store_true", help="skip runtime invariant checks")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("audit", help="set sizes and bounds for a trace CSV")
    p.add_argument("trace")
    p.add_argument("--meta", help="sidecar JSON (default: TRACE.meta.json)")
    p.add_argument("--variant", choices=("main_q2", "general_q", "unconstrained"),
                   help="learner variant when there is no sidecar")
    p.add_argument("--q", type=float, default=2.0)
    p.add_argument("--mu", type=float, default=None)
    p.add_argument("--eta", type=float, default=None)
    p.add_argument("--alpha-grid", type=_grid, default=DEFAULT_ALPHA_GRID)
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("bounds", help="evaluate a bound from explicit scalars")
    p.add_argument("kind", choices=("main", "q", "optimistic", "S", "f", "unconstrained"))
    for name, default in (("mu", 1.0), ("alpha", 1.0), ("q", 2.0), ("eta", 1.0), ("Q-alpha", 0.0),
                          ("G-sum", 0.0), ("B-corr-sum", 0.0), ("B-alpha-sum", 0.0), ("T", 0.0),
                          ("Z", 1.0), ("u-norm", 1.0), ("C-T", 0.0), ("epsilon", 1.0),
                          ("n-relaxed-bad", 0.0)):
        p.add_argument(f"--{name}", type=float, default=default,
                       dest=name.replace("-", "_"))
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("adversary", help="write a hint/cost stream file")
    p.add_argument("config", nargs="?", help="experiment config to take the adversary from")
    p.add_argument("--out", required=True)
    p.add_argument("--kind", choices=KINDS)
    p.add_argument("--T", type=int)
    p.add_argument("--B", type=int)
    p.add_argument("--q", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--bad-fraction", type=float, dest="bad_fraction")
    p.add_argument("--seed", type=int)
    p.add_argument("--dim", type=int)
    p.add_argument("--drift", type=float)
    p.add_argument("--replica", type=int, default=0)
    p.set_defaults(func=cmd_adversary)

    p = sub.add_parser("check-lemmas", help="fuzz the scalar inequalities")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--verbose", action="store_true", help="include worst cases")
    p.set_defaults(func=cmd_check_lemmas)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, DomainError, FileNotFoundError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
