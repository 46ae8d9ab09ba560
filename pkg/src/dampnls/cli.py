"""Command-line entry point.

    dampnls simulate --config run.json [--seed S] [--out DIR] [--resume CKPT]
    dampnls experiment NAME [--config cfg.json] [--seed S] [--out DIR]
    dampnls bourgain NAME [--config cfg.json] [--seed S] [--out DIR]
    dampnls check [--out DIR]

Exit codes: 0 success, 1 checks failed, 2 config error, 3 blow-up guard,
4 I/O error.  A JSON summary is printed on stdout in every case.  Log
verbosity is read from ``DAMPNLS_LOG`` (e.g. ``DEBUG``, default ``WARNING``).
"""
from __future__ import annotations

import argparse
import inspect
import json
import logging
import os
import sys
import time

import numpy as np

from . import bourgain as bg
from .equations import absorbing_radius
from .experiments import EXPERIMENTS, _jsonable
from .integrator import BlowUpError, integrate
from .invariants import invariant_suite
from .io import (
    Checkpoint,
    CheckpointError,
    ConfigError,
    atomic_write_text,
    export_timeseries,
    load_checkpoint,
    load_config,
    save_checkpoint,
)
from .spectral import l2_norm

EXIT_OK, EXIT_CHECKS, EXIT_CONFIG, EXIT_BLOWUP, EXIT_IO = 0, 1, 2, 3, 4
BOURGAIN = ("resonance", "damping", "l4")
log = logging.getLogger("dampnls")


class _Fail(Exception):
    def __init__(self, code, summary):
        super().__init__(summary.get("error", ""))
        self.code = code
        self.summary = summary


def _emit(summary: dict, stream=None) -> None:
    print(json.dumps(_jsonable(summary), sort_keys=True), file=stream or sys.stdout)


def _load(args):
    if args.config is None:
        return None
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    return cfg


def _outdir(args, cfg) -> str:
    out = args.out or (cfg.out if cfg is not None else "out")
    os.makedirs(out, exist_ok=True)
    return out


def _meta(out: str, command: str) -> None:
    # timestamps live only here, so every other artifact is reproducible byte for byte
    atomic_write_text(os.path.join(out, "meta.json"),
                      json.dumps({"command": command, "finished": time.strftime("%Y-%m-%dT%H:%M:%S")}))


# ---------------------------------------------------------------- simulate

def cmd_simulate(args) -> dict:
    cfg = _load(args)
    if cfg is None:
        raise ConfigError(["simulate needs --config"])
    out = _outdir(args, cfg)
    p, scheme = cfg.phys, cfg.scheme
    dt = scheme.resolved_dt(cfg.M)
    total = scheme.n_steps(cfg.M)
    state, t0, step0 = cfg.u0, 0.0, 0
    h = cfg.config_hash()
    if args.resume:
        ck = load_checkpoint(args.resume, expected_hash=h)
        if ck.kind != "full" or ck.dt != dt:
            raise CheckpointError(f"{args.resume}: checkpoint does not match this run (kind/dt)")
        state, t0, step0 = ck.state, ck.t0, ck.step
        if step0 >= total:
            raise ConfigError([f"horizon: checkpoint is already at step {step0} of {total}"])
    remaining = type(scheme)(scheme.method, dt, (total - step0) * dt, scheme.store_every)
    ckpt_path = os.path.join(out, "checkpoint.ckpt")

    def on_sample(step, t, s):
        if cfg.checkpoint_every and step % cfg.checkpoint_every == 0 and step != step0:
            save_checkpoint(Checkpoint("full", s, t0, step, dt, h), ckpt_path)

    # guard scale from the original data so a resumed run aborts exactly where the full run would
    guard = max(l2_norm(cfg.u0), absorbing_radius(p), 1e-300)
    try:
        traj = integrate(state, p, remaining, "full", t0=t0, step0=step0, on_sample=on_sample,
                         guard_scale=guard)
    except BlowUpError as e:
        raise _Fail(EXIT_BLOWUP, {"status": "blow-up", "error": str(e)}) from None
    artifacts = []
    for fmt in cfg.formats:
        path = os.path.join(out, f"timeseries.{fmt}")
        export_timeseries(traj, p, path, fmt, tail_N=cfg.tail_N, probe_kmax=cfg.probe_kmax)
        artifacts.append(path)
    save_checkpoint(Checkpoint("full", traj.final, t0, traj.steps[-1], dt, h), ckpt_path)
    atomic_write_text(os.path.join(out, "config.json"), json.dumps(cfg.raw, indent=2, sort_keys=True))
    artifacts += [ckpt_path, os.path.join(out, "config.json")]
    _meta(out, "simulate")
    return {"status": "ok", "samples": len(traj), "t_final": traj.times[-1],
            "l2_sq_final": traj.diagnostics[-1]["l2_sq"], "artifacts": artifacts}


# ---------------------------------------------------------------- experiment

# config keys forwarded to an experiment when its signature accepts them
_FORWARD = {"M": "M", "gamma": "gamma", "dt": "dt", "seed": "seed", "n_list": "n_list",
            "ensemble": "members", "horizon": "horizon", "store_every": "store_every"}


def experiment_kwargs(name: str, cfg) -> dict:
    fn = EXPERIMENTS[name]
    accepted = set(inspect.signature(fn).parameters) - {"out_dir"}
    kw = {}
    if cfg is not None:
        for key, arg in _FORWARD.items():
            if key in cfg.raw and arg in accepted:
                kw[arg] = cfg.raw[key]
        if "f" in accepted and ("f" in cfg.raw or "f_profile" in cfg.raw):
            kw["f"] = cfg.raw.get("f", cfg.raw.get("f_profile"))
        if "N" in accepted and "N" in cfg.raw:
            kw["N"] = cfg.raw["N"]
        bad = sorted(set(cfg.params) - accepted)
        if bad:
            raise ConfigError([f"params: {name} does not accept {bad}"])
        kw.update(cfg.params)
    return kw


def cmd_experiment(args) -> dict:
    name = args.name[4:] if args.name.startswith("run_") else args.name
    if name not in EXPERIMENTS:
        raise ConfigError([f"unknown experiment {args.name!r}; expected one of {sorted(EXPERIMENTS)}"])
    cfg = _load(args)
    kw = experiment_kwargs(name, cfg)
    if args.seed is not None:
        kw["seed"] = args.seed
    out = _outdir(args, cfg)
    try:
        report = EXPERIMENTS[name](**kw, out_dir=out)
    except BlowUpError as e:
        raise _Fail(EXIT_BLOWUP, {"status": "blow-up", "experiment": name, "error": str(e)}) from None
    except (TypeError, ValueError) as e:
        raise ConfigError([f"{name}: {e}"]) from None
    _meta(out, f"experiment {name}")
    summary = {"status": report.outcome, "experiment": name, "artifacts": report.artifacts,
               "checks": [{"claim": c.claim, "measured": c.measured, "target": c.target,
                           "passed": c.passed} for c in report.checks]}
    if not report.passed:
        raise _Fail(EXIT_CHECKS, summary)
    return summary


# ---------------------------------------------------------------- bourgain

def cmd_bourgain(args) -> dict:
    if args.name not in BOURGAIN:
        raise ConfigError([f"unknown bourgain study {args.name!r}; expected one of {list(BOURGAIN)}"])
    cfg = _load(args)
    params = dict(cfg.params) if cfg is not None else {}
    seed = args.seed if args.seed is not None else (cfg.seed if cfg is not None else 0)
    out = _outdir(args, cfg)
    allowed = {"resonance": {"trials", "kmax"}, "damping": {"N_list", "trials", "M", "eps", "L_tau"},
               "l4": {"M", "L", "trials"}}[args.name]
    bad = sorted(set(params) - allowed)
    if bad:
        raise ConfigError([f"params: {args.name} does not accept {bad}"])
    if args.name == "resonance":
        n = int(params.get("trials", 10 ** 4))
        bad_triples = bg.resonance_sweep(n, seed, int(params.get("kmax", 10 ** 4)))
        records = [{"trials": n, "mismatches": len(bad_triples), "examples": bad_triples[:10]}]
        ok = not bad_triples
    elif args.name == "damping":
        rep = bg.damping_scaling(params.get("N_list", [8, 16, 32, 64]), int(params.get("trials", 100)), seed,
                                 M=int(params.get("M", 256)), eps=float(params.get("eps", bg.DEFAULT_EPS)),
                                 L_tau=int(params.get("L_tau", 8)))
        records = rep.to_records()
        ok = rep.slope <= -0.15
    else:
        M, L, n = int(params.get("M", 64)), int(params.get("L", 64)), int(params.get("trials", 200))
        e1, e2 = bg.l4_ensemble(M, L, n, seed), bg.l4_ensemble(2 * M, 2 * L, n, seed)
        change = abs(e2.max_ratio - e1.max_ratio) / e1.max_ratio
        records = [{"M": M, "L": L, "max_ratio": e1.max_ratio}, {"M": 2 * M, "L": 2 * L, "max_ratio": e2.max_ratio},
                   {"relative_change": change}]
        ok = change < 0.2
    path = os.path.join(out, f"bourgain_{args.name}.json")
    atomic_write_text(path, json.dumps(_jsonable(records), indent=2))
    _meta(out, f"bourgain {args.name}")
    summary = {"status": "pass" if ok else "fail", "study": args.name, "records": records, "artifacts": [path]}
    if not ok:
        raise _Fail(EXIT_CHECKS, summary)
    return summary


# ---------------------------------------------------------------- check

def cmd_check(args) -> dict:
    results = invariant_suite(seed=args.seed or 0)
    bad = [r for r in results if not r.passed]
    resonance_bad = bg.resonance_sweep(1000, args.seed or 0)
    summary = {"status": "pass" if not bad and not resonance_bad else "fail",
               "results": [{"name": r.name, "M": r.M, "error": r.error, "tol": r.tol, "passed": r.passed}
                           for r in results],
               "resonance_mismatches": len(resonance_bad)}
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        atomic_write_text(os.path.join(args.out, "check.json"), json.dumps(summary, indent=2))
    if summary["status"] != "pass":
        raise _Fail(EXIT_CHECKS, summary)
    return summary


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dampnls", description="Damped driven cubic NLS on the torus.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--seed", type=int, help="override the config seed")
        sp.add_argument("--out", help="output directory")

    sp = sub.add_parser("simulate", help="integrate the full equation and export diagnostics")
    common(sp)
    sp.add_argument("--resume", help="checkpoint to continue from")
    sp.set_defaults(func=cmd_simulate)
    sp = sub.add_parser("experiment", help="run a scripted experiment")
    sp.add_argument("name", help=", ".join(sorted(EXPERIMENTS)))
    common(sp)
    sp.set_defaults(func=cmd_experiment)
    sp = sub.add_parser("bourgain", help="space-time lattice studies")
    sp.add_argument("name", help=", ".join(BOURGAIN))
    common(sp)
    sp.set_defaults(func=cmd_bourgain)
    sp = sub.add_parser("check", help="run the invariant suite")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_check)
    return ap


def main(argv=None) -> int:
    level = os.environ.get("DAMPNLS_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        summary = args.func(args)
    except ConfigError as e:
        _emit({"status": "config-error", "errors": e.errors})
        return EXIT_CONFIG
    except _Fail as e:
        _emit(e.summary)
        return e.code
    except (OSError, CheckpointError) as e:
        _emit({"status": "io-error", "error": str(e), "path": getattr(e, "filename", None)})
        return EXIT_IO
    _emit(summary)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
