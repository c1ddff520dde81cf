"""Command-line front end: ``fkppg validate | oracle | run``.

Every report is JSON (or a single CSV row) on stdout carrying a
``schema_version`` field.  Diagnostics go to stderr.  Exit codes:

    0  success
    1  any other error (numeric domain, query out of range, ...)
    2  model syntax or validation error (including out-of-range scores)
    3  I/O error reading the model
    4  oracle asked to handle a continuous distribution
    5  oracle path explosion (more live prefixes than --cap)
    6  particle weight collapse (partial report on stderr)

If ``<model>.json`` exists next to ``<model>.ppg`` its ``query``, ``bound``
and ``t`` entries provide defaults for the corresponding flags.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .engine import ENGINES, infer
from .errors import (
    ContinuousDistribution,
    ModelError,
    PathExplosion,
    PpgError,
    ScoreOutOfRange,
    ValidationError,
    ZeroWeightEnsemble,
    PredicateNotBoolean,
)
from .oracle import DEFAULT_CAP, enumerate_paths, filtering_distribution, semantics_bounds
from .ppg import LiftedQuery, Ppg, load_model
from .resample import RESAMPLERS

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_OTHER = 1
EXIT_VALIDATION = 2
EXIT_IO = 3
EXIT_CONTINUOUS = 4
EXIT_EXPLOSION = 5
EXIT_COLLAPSE = 6

RUN_FIELDS = (
    "model", "query", "M", "t", "N", "seed", "engine", "resampler", "estimate",
    "beta_lower", "beta_upper", "alpha", "p_term", "ess", "wall_time_ms",
    "collapsed_at_step",
)


@dataclass
class RunConfig:
    model: str
    query: Optional[str] = None
    bound: Optional[float] = None
    t: Optional[int] = None
    n: int = 10_000
    seed: int = 0
    engine: str = "vpf"
    resampler: str = "multinomial"
    fmt: str = "json"
    cap: int = DEFAULT_CAP
    threads: int = 1

    def __post_init__(self):
        if self.t is not None and self.t < 1:
            raise ValueError("--t must be >= 1")
        if self.n < 1:
            raise ValueError("--N must be >= 1")
        if self.engine not in ENGINES:
            raise ValueError(f"--engine must be one of {ENGINES}")
        if self.resampler not in RESAMPLERS:
            raise ValueError(f"--resampler must be one of {RESAMPLERS}")


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, OSError | UnicodeDecodeError):
        return EXIT_IO
    if isinstance(exc, ModelError | ValidationError | ScoreOutOfRange | PredicateNotBoolean):
        return EXIT_VALIDATION
    if isinstance(exc, ContinuousDistribution):
        return EXIT_CONTINUOUS
    if isinstance(exc, PathExplosion):
        return EXIT_EXPLOSION
    if isinstance(exc, ZeroWeightEnsemble):
        return EXIT_COLLAPSE
    return EXIT_OTHER


def _sidecar(model_path: str) -> dict:
    p = Path(model_path).with_suffix(".json")
    if p.is_file():
        with open(p, encoding="utf-8") as f:
            return json.load(f)
    return {}


def _load(path: str, samples: int = 10_000) -> Ppg:
    with open(path, encoding="utf-8") as f:
        text = f.read()
    return load_model(text, samples=samples)


def _jsonable(x):
    """Infinite floats become the strings "inf" / "-inf" (JSON has no infinity)."""
    if isinstance(x, float) and not math.isfinite(x):
        return "inf" if x > 0 else "-inf"
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def _resolve(cfg: RunConfig, need_t=True):
    side = _sidecar(cfg.model)
    query = cfg.query if cfg.query is not None else side.get("query")
    if query is None:
        raise ValueError("no --query given and no sidecar default")
    bound = cfg.bound if cfg.bound is not None else side.get("bound")
    t = cfg.t if cfg.t is not None else side.get("t")
    if need_t and t is None:
        raise ValueError("no --t given and no sidecar default")
    return query, bound, t


def _emit(record: dict, fmt: str, stream):
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=list(record), lineterminator="\n")
        w.writeheader()
        w.writerow({k: "" if v is None else v for k, v in _jsonable(record).items()})
        stream.write(buf.getvalue())
    else:
        stream.write(json.dumps(_jsonable(record), allow_nan=False) + "\n")


# -- subcommands ---------------------------------------------------------------------

def cmd_validate(path: str, fmt: str = "json", samples: int = 10_000, out=None) -> int:
    out = out or sys.stdout
    g = _load(path, samples)
    summary = {
        "schema_version": SCHEMA_VERSION,
        "model": path,
        "variables": list(g.variables),
        "checkpoints": list(g.checkpoints),
        "nil": g.nil,
        "init": g.init,
        "transitions": sum(len(v) for v in g.transitions.values()),
        "discrete": g.discrete,
    }
    if fmt == "csv":
        summary = {k: " ".join(map(str, v)) if isinstance(v, list) else v for k, v in summary.items()}
    _emit(summary, fmt, out)
    return EXIT_OK


def cmd_oracle(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    g = _load(cfg.model)
    if not g.discrete:
        raise ContinuousDistribution(
            f"{cfg.model}: the exact oracle needs finite-support sampling only"
        )
    query, bound, t = _resolve(cfg)
    q = LiftedQuery.parse(query, g.variables, bound)
    table = enumerate_paths(g, t, cap=cfg.cap)
    rep = semantics_bounds(table, q)
    phi = filtering_distribution(table)
    entries = sorted(phi.items(), key=lambda kv: (kv[0].checkpoint, kv[0].store))
    record = {
        "schema_version": SCHEMA_VERSION,
        "model": cfg.model,
        "query": query,
        "M": bound,
        "t": t,
        "beta_lower": rep.beta_lower,
        "beta_upper": rep.beta_upper,
        "alpha": rep.alpha,
        "mass_terminated": rep.mass_terminated,
        "mass_total": rep.mass_total,
        "exact": rep.exact,
        "paths": len(table.paths),
    }
    if cfg.fmt == "csv":
        _emit(record, "csv", out)
    else:
        record["filtering"] = [
            {"state": list(s.store), "node": s.checkpoint, "mass": m} for s, m in entries
        ]
        _emit(record, "json", out)
    return EXIT_OK


def _run_record(cfg, query, bound, t, **values):
    rec = {
        "schema_version": SCHEMA_VERSION,
        "model": cfg.model,
        "query": query,
        "M": bound,
        "t": t,
        "N": cfg.n,
        "seed": cfg.seed,
        "engine": cfg.engine,
        "resampler": cfg.resampler,
    }
    for k in RUN_FIELDS[8:]:
        rec[k] = values.get(k)
    return rec


def cmd_run(cfg: RunConfig, out=None, err=None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    g = _load(cfg.model)
    query, bound, t = _resolve(cfg)
    q = LiftedQuery.parse(query, g.variables, bound)
    try:
        rep = infer(g, q, t, cfg.n, cfg.seed, cfg.engine, cfg.resampler, cfg.threads)
    except ZeroWeightEnsemble as exc:
        _emit(_run_record(cfg, query, bound, t, collapsed_at_step=exc.step), cfg.fmt, err)
        raise
    record = _run_record(
        cfg, query, bound, t,
        estimate=rep.estimate,
        beta_lower=rep.beta_lower,
        beta_upper=rep.beta_upper,
        alpha=rep.alpha,
        p_term=rep.p_term,
        ess=rep.ess,
        wall_time_ms=rep.wall_time * 1e3,
        collapsed_at_step=None,
    )
    _emit(record, cfg.fmt, out)
    return EXIT_OK


# -- argument parsing ----------------------------------------------------------------

def _default_seed():
    raw = os.environ.get("FKPPG_SEED")
    if raw is None or raw == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise SystemExit(f"error: FKPPG_SEED={raw!r} is not an integer")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="fkppg",
        description="Exact truncated semantics and particle filtering for "
        "probabilistic program graphs.",
        epilog="exit codes: 0 ok, 1 other error, 2 syntax/validation, 3 I/O, "
        "4 continuous model in oracle, 5 path explosion, 6 weight collapse",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--model", required=True, help="model file in the DSL (.ppg)")
        sp.add_argument("--format", choices=("json", "csv"), default="json",
                        help="output format (default json)")

    sp = sub.add_parser("validate", help="parse and validate a model")
    common(sp)
    sp.add_argument("--samples", type=int, default=10_000,
                    help="random stores for the guard-partition check (default 10000)")

    def query_flags(sp):
        sp.add_argument("--query", help="lifted query h as an expression over the "
                        "model variables (default: sidecar JSON)")
        sp.add_argument("--bound", type=float,
                        help="upper bound M on h, may be inf (default: sidecar JSON)")
        sp.add_argument("--t", type=int, help="horizon, counting the initial state "
                        "(default: sidecar JSON)")

    sp = sub.add_parser("oracle", help="exact bounds and filtering distribution "
                        "(finite-support models only)")
    common(sp)
    query_flags(sp)
    sp.add_argument("--cap", type=int, default=DEFAULT_CAP,
                    help=f"maximum live path prefixes (default {DEFAULT_CAP})")

    sp = sub.add_parser("run", help="bootstrap particle filter estimate")
    common(sp)
    query_flags(sp)
    sp.add_argument("--N", type=int, default=10_000, help="particle count (default 10000)")
    sp.add_argument("--seed", type=int, default=None,
                    help="RNG seed (default: $FKPPG_SEED, else 0)")
    sp.add_argument("--engine", choices=ENGINES, default="vpf",
                    help="scalar loop or vectorised engine (default vpf)")
    sp.add_argument("--resampler", choices=RESAMPLERS, default="multinomial",
                    help="resampling scheme (default multinomial)")
    sp.add_argument("--threads", type=int, default=1,
                    help="worker threads for the vectorised engine; a hint only, "
                    "results never depend on it (default 1)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "validate":
            return cmd_validate(args.model, args.format, args.samples)
        if args.command == "oracle":
            cfg = RunConfig(args.model, args.query, args.bound, args.t,
                            fmt=args.format, cap=args.cap)
            return cmd_oracle(cfg)
        cfg = RunConfig(
            model=args.model,
            query=args.query,
            bound=args.bound,
            t=args.t,
            n=args.N,
            seed=args.seed if args.seed is not None else _default_seed(),
            engine=args.engine,
            resampler=args.resampler,
            fmt=args.format,
            threads=args.threads,
        )
        return cmd_run(cfg)
    except (PpgError, OSError, UnicodeDecodeError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return _exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
