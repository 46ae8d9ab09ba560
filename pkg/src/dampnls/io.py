"""Configuration parsing, checkpoints and time-series export.

Config files are JSON objects with flat keys; see :data:`CONFIG_KEYS`.
Every artifact is written to a temporary file in the target directory and
moved into place with :func:`os.replace`, so a crash never leaves a partial
file at a final path.
"""
from __future__ import annotations

import csv
import hashlib
import json
import math
import os
import struct
import tempfile
from dataclasses import dataclass, field

import numpy as np

from .diagnostics import diagnostic_records, probe_family
from .equations import DecompState, ModifiedState, PhysParams
from .integrator import METHODS, SchemeSpec
from .spectral import GridSpec, SpectralField, power_law_field

CONFIG_KEYS = {
    "gamma": "damping rate > 0",
    "f": "forcing modes [[k, amp]] or [[k, re, im]]",
    "f_profile": "forcing profile {exponent, kmax, norm}, phases drawn from seed",
    "u0": "initial modes, same format as f (default: zero)",
    "u0_profile": "initial profile {exponent, kmax, norm}",
    "M": "number of Fourier modes (even)",
    "N": "frequency cutoff, 0 <= N < M/2",
    "pad": "dealiasing factor >= 2",
    "sign": "nonlinearity sign, +1 or -1 (0: linear flow)",
    "method": "strang_split | etd_rk2 | rk4_reference",
    "dt": "time step (default resolution-aware)",
    "horizon": "final time",
    "store_every": "diagnostic cadence in steps",
    "tail_N": "cutoffs for tail columns",
    "probe_kmax": "weak-pairing probes exp(ikx), |k| <= probe_kmax",
    "experiment": "experiment name",
    "params": "experiment keyword parameters",
    "n_list": "oscillation modes for the weak-limit experiment",
    "ensemble": "ensemble size",
    "seed": "64-bit seed",
    "out": "output directory",
    "formats": "subset of [csv, json]",
    "checkpoint_every": "steps between checkpoints (0: final only)",
}

# keys that may change between a run and its resumption
_HASH_EXEMPT = ("horizon", "out", "formats", "checkpoint_every")


class ConfigError(ValueError):
    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class CheckpointError(ValueError):
    pass


@dataclass
class SimConfig:
    gamma: float
    forcing: SpectralField
    u0: SpectralField
    M: int
    N: int = 0
    pad: float = 2.0
    sign: int = 1
    method: str = "strang_split"
    dt: float | None = None
    horizon: float = 1.0
    store_every: int = 1
    tail_N: list = field(default_factory=list)
    probe_kmax: int = 0
    experiment: str | None = None
    params: dict = field(default_factory=dict)
    n_list: list = field(default_factory=list)
    ensemble: int | None = None
    seed: int = 0
    out: str = "out"
    formats: list = field(default_factory=lambda: ["csv"])
    checkpoint_every: int = 0
    raw: dict = field(default_factory=dict)

    @property
    def phys(self) -> PhysParams:
        return PhysParams(self.gamma, self.forcing, self.sign, self.pad)

    @property
    def scheme(self) -> SchemeSpec:
        return SchemeSpec(self.method, self.dt, self.horizon, self.store_every)

    def config_hash(self) -> str:
        return config_hash(self.raw)

    def with_seed(self, seed: int) -> "SimConfig":
        raw = dict(self.raw, seed=int(seed))
        return parse_config(json.dumps(raw))


def config_hash(raw: dict) -> str:
    kept = {k: v for k, v in raw.items() if k not in _HASH_EXEMPT}
    text = json.dumps(kept, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def _modes(name, value, M, errors):
    out = {}
    if not isinstance(value, list):
        errors.append(f"{name}: expected a list of [k, amp] or [k, re, im]")
        return out
    for item in value:
        if not isinstance(item, list) or len(item) not in (2, 3) or not all(
                isinstance(x, (int, float)) and not isinstance(x, bool) for x in item):
            errors.append(f"{name}: bad mode entry {item!r}")
            continue
        k = item[0]
        if int(k) != k:
            errors.append(f"{name}: wavenumber {k!r} is not an integer")
            continue
        k = int(k)
        amp = complex(item[1], item[2]) if len(item) == 3 else complex(item[1])
        if not (math.isfinite(amp.real) and math.isfinite(amp.imag)):
            errors.append(f"{name}: non-finite amplitude for k={k}")
        elif M is not None and not abs(k) < M // 2:
            errors.append(f"{name}: mode k={k} outside resolved band |k| < {M // 2}")
        else:
            out[k] = out.get(k, 0) + amp
    return out


def _profile(name, value, M, errors):
    if not isinstance(value, dict):
        errors.append(f"{name}: expected an object with exponent, kmax, norm")
        return None
    extra = set(value) - {"exponent", "kmax", "norm"}
    if extra:
        errors.append(f"{name}: unknown keys {sorted(extra)}")
    if not isinstance(value.get("exponent"), (int, float)):
        errors.append(f"{name}: exponent required")
        return None
    kmax = value.get("kmax")
    if kmax is not None and M is not None and not (isinstance(kmax, int) and 0 <= kmax < M // 2):
        errors.append(f"{name}: cutoff exceeds resolved band (kmax={kmax}, M/2={M // 2})")
        return None
    norm = value.get("norm")
    if norm is not None and not (isinstance(norm, (int, float)) and norm >= 0):
        errors.append(f"{name}: norm must be >= 0")
        return None
    return value


def _num(raw, key, errors, cond, msg, kind=(int, float), default=None):
    if key not in raw:
        return default
    v = raw[key]
    if isinstance(v, bool) or not isinstance(v, kind) or not cond(v):
        errors.append(f"{key}: {msg}, got {v!r}")
        return default
    return v


def parse_config(text: str) -> SimConfig:
    """Parse and validate a JSON config; raises :class:`ConfigError` listing every problem."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError([f"not valid JSON: {e}"]) from None
    if not isinstance(raw, dict):
        raise ConfigError(["config must be a JSON object"])
    errors = []
    unknown = sorted(set(raw) - set(CONFIG_KEYS))
    for k in unknown:
        errors.append(f"unknown key {k!r}")

    M = _num(raw, "M", errors, lambda v: v >= 4 and v % 2 == 0, "must be an even integer >= 4", int)
    if "M" not in raw:
        errors.append("M: required")
    gamma = _num(raw, "gamma", errors, lambda v: math.isfinite(v) and v > 0, "damping must be > 0")
    if "gamma" not in raw:
        errors.append("gamma: required")
    N = _num(raw, "N", errors, lambda v: v >= 0, "must be a nonnegative integer", int, 0)
    pad = _num(raw, "pad", errors, lambda v: v >= 2, "must be >= 2", default=2.0)
    if M is not None and N is not None and not N < M // 2:
        errors.append(f"N: cutoff exceeds resolved band (N={N}, M/2={M // 2})")
    elif M is not None and pad is not None:
        try:
            GridSpec(M, N or 0, pad)
        except ValueError as e:
            errors.append(f"grid: {e}")
    sign = _num(raw, "sign", errors, lambda v: v in (1, -1, 0), "must be +1, -1 or 0", int, 1)
    method = raw.get("method", "strang_split")
    if method not in METHODS:
        errors.append(f"method: must be one of {METHODS}, got {method!r}")
    dt = _num(raw, "dt", errors, lambda v: math.isfinite(v) and v > 0, "must be > 0")
    horizon = _num(raw, "horizon", errors, lambda v: math.isfinite(v) and v > 0, "must be > 0", default=1.0)
    if dt is not None and horizon is not None and horizon < dt:
        errors.append(f"horizon: {horizon} shorter than dt {dt}")
    store_every = _num(raw, "store_every", errors, lambda v: v >= 1, "must be an integer >= 1", int, 1)
    seed = _num(raw, "seed", errors, lambda v: 0 <= v < 2 ** 64, "must be an integer in [0, 2^64)", int, 0)
    ckpt_every = _num(raw, "checkpoint_every", errors, lambda v: v >= 0, "must be an integer >= 0", int, 0)
    probe_kmax = _num(raw, "probe_kmax", errors, lambda v: v >= 0, "must be an integer >= 0", int, 0)
    if M is not None and probe_kmax is not None and not probe_kmax < M // 2:
        errors.append(f"probe_kmax: cutoff exceeds resolved band ({probe_kmax} >= {M // 2})")
    ensemble = _num(raw, "ensemble", errors, lambda v: v >= 1, "must be an integer >= 1", int)

    tail_N = raw.get("tail_N", [])
    if not (isinstance(tail_N, list) and all(isinstance(n, int) and not isinstance(n, bool) for n in tail_N)):
        errors.append("tail_N: expected a list of integers")
        tail_N = []
    elif any(b <= a for a, b in zip(tail_N, tail_N[1:])):
        errors.append("tail_N: must be increasing")
    elif M is not None and any(not 0 <= n < M // 2 for n in tail_N):
        errors.append(f"tail_N: cutoff exceeds resolved band (M/2={M // 2})")
    n_list = raw.get("n_list", [])
    if not (isinstance(n_list, list) and all(isinstance(n, int) and not isinstance(n, bool) for n in n_list)):
        errors.append("n_list: expected a list of integers")
        n_list = []
    elif M is not None and any(not 0 < n < M // 2 for n in n_list):
        errors.append(f"n_list: mode exceeds resolved band (M/2={M // 2})")
    formats = raw.get("formats", ["csv"])
    if not (isinstance(formats, list) and formats and set(formats) <= {"csv", "json"}):
        errors.append(f"formats: expected a nonempty subset of ['csv', 'json'], got {formats!r}")
    out = raw.get("out", "out")
    if not isinstance(out, str) or not out:
        errors.append("out: expected a directory path")
    params = raw.get("params", {})
    if not isinstance(params, dict):
        errors.append("params: expected an object")
        params = {}
    experiment = raw.get("experiment")
    if experiment is not None:
        from .experiments import EXPERIMENTS
        if experiment not in EXPERIMENTS:
            errors.append(f"experiment: unknown name {experiment!r}; expected one of {sorted(EXPERIMENTS)}")

    if "f" in raw and "f_profile" in raw:
        errors.append("f and f_profile are mutually exclusive")
    if "u0" in raw and "u0_profile" in raw:
        errors.append("u0 and u0_profile are mutually exclusive")
    f_modes = _modes("f", raw["f"], M, errors) if "f" in raw else {}
    f_prof = _profile("f_profile", raw["f_profile"], M, errors) if "f_profile" in raw else None
    u_modes = _modes("u0", raw["u0"], M, errors) if "u0" in raw else {}
    u_prof = _profile("u0_profile", raw["u0_profile"], M, errors) if "u0_profile" in raw else None

    if errors:
        raise ConfigError(errors)

    ss = np.random.SeedSequence(seed)
    f_ss, u_ss = ss.spawn(2)

    def build(modes, prof, sub):
        if prof is not None:
            return power_law_field(M, np.random.default_rng(sub), prof["exponent"], prof.get("kmax"),
                                   prof.get("norm"))
        return SpectralField.from_modes(M, modes)

    forcing = build(f_modes, f_prof, f_ss)
    u0 = build(u_modes, u_prof, u_ss)
    return SimConfig(gamma=float(gamma), forcing=forcing, u0=u0, M=M, N=N, pad=float(pad), sign=sign,
                     method=method, dt=dt, horizon=float(horizon), store_every=store_every,
                     tail_N=list(tail_N), probe_kmax=probe_kmax, experiment=experiment,
                     params=dict(params), n_list=list(n_list), ensemble=ensemble, seed=seed,
                     out=out, formats=list(formats), checkpoint_every=ckpt_every, raw=raw)


def load_config(path: str) -> SimConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


# ---------------------------------------------------------------- atomic writes

def atomic_write_bytes(path: str, data: bytes) -> None:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path: str, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


# ---------------------------------------------------------------- checkpoints

MAGIC = b"DNLSCKPT"
CHECKPOINT_VERSION = 1
_HEAD = struct.Struct("<8sII")  # magic, version, header length


@dataclass
class Checkpoint:
    kind: str          # full | modified | decomposition
    state: object      # SpectralField, ModifiedState or DecompState
    t0: float          # time at step 0 of the run
    step: int          # absolute step index of the state
    dt: float
    config_hash: str = ""

    @property
    def t(self) -> float:
        return self.t0 + self.step * self.dt


def _state_arrays(state):
    if isinstance(state, SpectralField):
        return "full", [state.coeffs], {}
    if isinstance(state, ModifiedState):
        return "modified", [state.v.coeffs], {"a": float(state.a).hex()}
    if isinstance(state, DecompState):
        arrs = [state.v.coeffs, state.w.coeffs] + ([state.z.coeffs] if state.z is not None else [])
        return "decomposition", arrs, {"N": state.N}
    raise TypeError(f"cannot checkpoint {type(state).__name__}")


def save_checkpoint(ckpt: Checkpoint, path: str) -> None:
    kind, arrs, extra = _state_arrays(ckpt.state)
    payload = b"".join(np.ascontiguousarray(a, dtype="<c16").tobytes() for a in arrs)
    header = {
        "kind": kind, "M": int(arrs[0].size), "n_arrays": len(arrs), "t0": float(ckpt.t0).hex(),
        "step": int(ckpt.step), "dt": float(ckpt.dt).hex(), "config_hash": ckpt.config_hash, **extra,
    }
    hbytes = json.dumps(header, sort_keys=True).encode()
    digest = hashlib.sha256(hbytes + payload).digest()
    blob = _HEAD.pack(MAGIC, CHECKPOINT_VERSION, len(hbytes)) + hbytes + payload + digest
    atomic_write_bytes(path, blob)


def load_checkpoint(path: str, expected_hash: str | None = None) -> Checkpoint:
    """Read and verify a checkpoint; any corruption raises :class:`CheckpointError`."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _HEAD.size + 32:
        raise CheckpointError(f"{path}: truncated checkpoint")
    magic, version, hlen = _HEAD.unpack_from(blob)
    if magic != MAGIC:
        raise CheckpointError(f"{path}: not a checkpoint file")
    if version != CHECKPOINT_VERSION:
        raise CheckpointError(f"{path}: version {version}, expected {CHECKPOINT_VERSION}")
    body, digest = blob[_HEAD.size:-32], blob[-32:]
    if hashlib.sha256(body).digest() != digest:
        raise CheckpointError(f"{path}: checksum mismatch")
    header = json.loads(body[:hlen])
    payload = body[hlen:]
    M, n = header["M"], header["n_arrays"]
    if len(payload) != 16 * M * n:
        raise CheckpointError(f"{path}: payload size mismatch")
    if expected_hash is not None and header["config_hash"] != expected_hash:
        raise CheckpointError(f"{path}: config hash mismatch; checkpoint belongs to a different config")
    arrs = [SpectralField(np.frombuffer(payload, dtype="<c16", count=M, offset=16 * M * i).astype(np.complex128))
            for i in range(n)]
    kind = header["kind"]
    if kind == "full":
        state = arrs[0]
    elif kind == "modified":
        state = ModifiedState(arrs[0], float.fromhex(header["a"]))
    elif kind == "decomposition":
        state = DecompState(arrs[0], arrs[1], header["N"], arrs[2] if n > 2 else None)
    else:
        raise CheckpointError(f"{path}: unknown state kind {kind!r}")
    return Checkpoint(kind, state, float.fromhex(header["t0"]), header["step"],
                      float.fromhex(header["dt"]), header["config_hash"])


# ---------------------------------------------------------------- time series

def timeseries_columns(tail_N=(), probe_ids=()) -> list:
    cols = ["t", "l2_sq", "h1", "h2", "energy_residual"]
    cols += [f"tail_N{int(n)}" for n in tail_N]
    for pid in probe_ids:
        cols += [f"pairing_{pid}_re", f"pairing_{pid}_im"]
    return cols


def timeseries_rows(traj, p: PhysParams, tail_N=(), probes=None) -> tuple:
    """Column names and one list of floats per stored sample."""
    probes = probes or {}
    recs = diagnostic_records(traj, p, (1.0, 2.0), list(tail_N), probes)
    cols = timeseries_columns(tail_N, list(probes))
    rows = []
    for r in recs:
        row = [r.t, r.l2_sq, r.hs_norms[1.0], r.hs_norms[2.0], r.energy_residual]
        row += [r.tail[int(n)] for n in tail_N]
        for pid in probes:
            z = r.pairings[pid]
            row += [z.real, z.imag]
        rows.append([float(x) for x in row])
    return cols, rows


def _fmt(x: float) -> str:
    return format(x, ".17g")


def export_timeseries(traj, p: PhysParams, path: str, fmt: str = "csv", tail_N=(), probes=None,
                      probe_kmax: int | None = None) -> str:
    """Write one row per sample; columns ``t, l2_sq, h1, h2, energy_residual, tail_N*, pairing_*``."""
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    if probes is None and probe_kmax is not None:
        probes = probe_family(p.M, probe_kmax)
    cols, rows = timeseries_rows(traj, p, tail_N, probes)
    if fmt == "csv":
        import io as _io
        buf = _io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for row in rows:
            w.writerow([_fmt(x) for x in row])
        atomic_write_text(path, buf.getvalue())
    elif fmt == "json":
        # float repr is the shortest string that round-trips exactly
        recs = [dict(zip(cols, row)) for row in rows]
        atomic_write_text(path, json.dumps({"columns": cols, "records": recs}, indent=1))
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return path


def read_timeseries_csv(path: str) -> tuple:
    with open(path, newline="") as fh:
        rd = csv.reader(fh)
        cols = next(rd)
        rows = [[float(x) for x in r] for r in rd]
    return cols, rows


def read_timeseries_json(path: str) -> tuple:
    with open(path) as fh:
        d = json.load(fh)
    return d["columns"], [[rec[c] for c in d["columns"]] for rec in d["records"]]


__all__ = [
    "CONFIG_KEYS", "ConfigError", "CheckpointError", "SimConfig", "config_hash", "parse_config",
    "load_config", "atomic_write_bytes", "atomic_write_text", "Checkpoint", "save_checkpoint",
    "load_checkpoint", "timeseries_columns", "timeseries_rows", "export_timeseries",
    "read_timeseries_csv", "read_timeseries_json", "MAGIC", "CHECKPOINT_VERSION",
]
