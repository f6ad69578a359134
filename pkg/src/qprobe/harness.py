"""Scenario configs, deterministic runs and CSV/JSON output.

Configs are JSON documents with a ``schema_version`` field. Parsing applies
every default, so :func:`serialize_scenario` echoes the complete configuration
and parse/serialize/parse is a fixed point. Complex numbers are ``[re, im]``
pairs and matrices are lists of rows of such pairs.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import decoherence, decoupling, probe, protocol, tomography
from .errors import ConfigError
from .linalg import is_hermitian
from .states import Operator, QuantumState

SCHEMA_VERSION = 1
KINDS = ("direct_measure", "conjugate_protocol", "lambda_sweep", "decoupling_check", "tomography")
CSV_COLUMNS = ("t", "G", "expected_a", "pure_prediction", "mixed_baseline", "coherence_indicator")
OUTPUT_DIR_ENV = "QPROBE_OUTPUT_DIR"
NORMALIZATION_TOL = 1e-6

_COMMON = {"schema_version", "name", "kind", "seed", "output_path"}
_BY_KIND = {
    "direct_measure": ({"n", "state"}, {"probe", "schedule"}),
    "conjugate_protocol": ({"n", "state"}, {"probe", "schedule"}),
    "lambda_sweep": ({"n", "state", "thetas"}, {"probe", "schedule"}),
    "decoupling_check": ({"decoupling"}, set()),
    "tomography": ({"n", "tomography"}, set()),
}


@dataclass(frozen=True)
class Scenario:
    name: str
    kind: str
    seed: int
    output_path: str
    n: int | None = None
    probe: dict | None = None
    state: dict | None = None
    schedule: dict | None = None
    thetas: list | None = None
    decoupling: dict | None = None
    tomography: dict | None = None
    schema_version: int = SCHEMA_VERSION

    def to_dict(self) -> dict:
        return {k: v for k, v in dataclasses.asdict(self).items() if v is not None}

    def with_seed(self, seed: int) -> Scenario:
        return dataclasses.replace(self, seed=int(seed))


@dataclass
class RunRecord:
    scenario: str
    config_hash: str
    seed: int
    kind: str
    config: dict
    rows: list[dict] = field(default_factory=list)
    report: dict | None = None
    estimate: dict | None = None

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> RunRecord:
        return cls(**d)


# -- validation helpers ---------------------------------------------------------

def _require_keys(obj: Any, path: str, required: set[str], optional: set[str]) -> dict:
    if not isinstance(obj, dict):
        raise ConfigError(path, "expected an object")
    unknown = sorted(set(obj) - required - optional)
    if unknown:
        raise ConfigError(f"{path}.{unknown[0]}" if path else unknown[0], "unknown key")
    missing = sorted(required - set(obj))
    if missing:
        raise ConfigError(f"{path}.{missing[0]}" if path else missing[0], "missing required field")
    return obj


def _real(x: Any, path: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
        raise ConfigError(path, f"expected a finite number, got {x!r}")
    return float(x)


def _int(x: Any, path: str, minimum: int | None = None) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise ConfigError(path, f"expected an integer, got {x!r}")
    if minimum is not None and x < minimum:
        raise ConfigError(path, f"must be >= {minimum}")
    return x


def _real_list(x: Any, path: str, length: int | None = None) -> list[float]:
    if not isinstance(x, list):
        raise ConfigError(path, "expected a list")
    if length is not None and len(x) != length:
        raise ConfigError(path, f"expected {length} entries, got {len(x)}")
    return [_real(v, f"{path}[{i}]") for i, v in enumerate(x)]


def _complex(x: Any, path: str) -> complex:
    if not isinstance(x, list) or len(x) != 2:
        raise ConfigError(path, "complex numbers are [re, im] pairs")
    return complex(_real(x[0], f"{path}[0]"), _real(x[1], f"{path}[1]"))


def _complex_list(x: Any, path: str, length: int | None = None) -> list[list[float]]:
    if not isinstance(x, list):
        raise ConfigError(path, "expected a list of [re, im] pairs")
    if length is not None and len(x) != length:
        raise ConfigError(path, f"expected {length} entries, got {len(x)}")
    return [[z.real, z.imag] for z in (_complex(v, f"{path}[{i}]") for i, v in enumerate(x))]


def _matrix(x: Any, path: str, d: int, hermitian: bool) -> list[list[list[float]]]:
    if not isinstance(x, list) or len(x) != d:
        raise ConfigError(path, f"expected {d} rows")
    rows = [_complex_list(r, f"{path}[{i}]", d) for i, r in enumerate(x)]
    if hermitian and not is_hermitian(_to_matrix(rows)):
        raise ConfigError(path, "operator is not Hermitian")
    return rows


def _to_complex(pairs: list) -> np.ndarray:
    return np.array([complex(re, im) for re, im in pairs], dtype=complex)


def _to_matrix(rows: list) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in r] for r in rows], dtype=complex)


# -- section parsers ------------------------------------------------------------

def _parse_probe(obj: Any, n: int) -> dict:
    obj = _require_keys({} if obj is None else obj, "probe", set(), {"a", "s", "hbar", "coupling"})
    hbar = _real(obj.get("hbar", 1.0), "probe.hbar")
    if hbar <= 0:
        raise ConfigError("probe.hbar", "must be positive")
    a = _real_list(obj.get("a", list(range(n))), "probe.a", n)
    s = _real_list(obj.get("s", list(range(n))), "probe.s", n)
    cp = obj.get("coupling", {"breakpoints": [0.0, 1.0], "values": [hbar * 2 * math.pi / n]})
    cp = _require_keys(cp, "probe.coupling", {"breakpoints", "values"}, set())
    bps = _real_list(cp["breakpoints"], "probe.coupling.breakpoints")
    vals = _real_list(cp["values"], "probe.coupling.values", len(bps) - 1)
    try:
        probe.CouplingProfile(tuple(bps), tuple(vals))
    except ValueError as exc:
        raise ConfigError("probe.coupling", str(exc)) from None
    return {"a": a, "s": s, "hbar": hbar, "coupling": {"breakpoints": bps, "values": vals}}


def _parse_state(obj: Any, n: int, need_amplitudes: bool) -> dict:
    obj = _require_keys(obj, "state", set(), {"amplitudes", "populations", "lambda", "candidate"})
    if ("amplitudes" in obj) == ("populations" in obj):
        raise ConfigError("state", "give exactly one of amplitudes or populations")
    if need_amplitudes and "amplitudes" not in obj:
        raise ConfigError("state.amplitudes", "missing required field")
    out: dict = {}
    if "amplitudes" in obj:
        amps = _complex_list(obj["amplitudes"], "state.amplitudes", n)
        norm = float(np.linalg.norm(_to_complex(amps)))
        if abs(norm - 1.0) > NORMALIZATION_TOL:
            raise ConfigError("state.amplitudes", f"amplitudes not normalized (sum |c|^2 = {norm ** 2:.6g})")
        out["amplitudes"] = amps
        default_candidate = amps
    else:
        pops = _real_list(obj["populations"], "state.populations", n)
        if any(p < 0 for p in pops) or abs(sum(pops) - 1.0) > NORMALIZATION_TOL:
            raise ConfigError("state.populations", "populations must be non-negative and sum to 1")
        out["populations"] = pops
        default_candidate = [[math.sqrt(p), 0.0] for p in pops]
    cand = _complex_list(obj.get("candidate", default_candidate), "state.candidate", n)
    if float(np.linalg.norm(_to_complex(cand))) == 0.0:
        raise ConfigError("state.candidate", "candidate must be non-zero")
    out["candidate"] = cand
    if "lambda" in obj:
        if "amplitudes" not in obj:
            raise ConfigError("state.lambda", "an environment-correlation model needs amplitudes")
        lam = _require_keys(obj["lambda"], "state.lambda", {"kind"}, {"theta"})
        kind = lam["kind"]
        if kind not in ("pure", "mixed", "interpolated"):
            raise ConfigError("state.lambda.kind", f"unknown lambda kind {kind!r}")
        entry: dict = {"kind": kind}
        if kind == "interpolated":
            if "theta" not in lam:
                raise ConfigError("state.lambda.theta", "missing required field")
            entry["theta"] = _real(lam["theta"], "state.lambda.theta")
            if entry["theta"] < 0:
                raise ConfigError("state.lambda.theta", "must be non-negative")
        elif "theta" in lam:
            raise ConfigError("state.lambda.theta", f"unknown key for lambda kind {kind!r}")
        out["lambda"] = entry
    return out


def _parse_schedule(obj: Any) -> dict:
    obj = _require_keys({"windows": [[0.0, 1.0]]} if obj is None else obj, "schedule", {"windows"}, set())
    if not isinstance(obj["windows"], list):
        raise ConfigError("schedule.windows", "expected a list of [t_start, t_end] pairs")
    windows = [_real_list(w, f"schedule.windows[{i}]", 2) for i, w in enumerate(obj["windows"])]
    try:
        protocol.PulseSchedule(tuple(tuple(w) for w in windows))
    except ValueError as exc:
        raise ConfigError("schedule.windows", str(exc)) from None
    return {"windows": windows}


def _parse_decoupling(obj: Any) -> dict:
    keys = {"dims", "c0", "drift", "controls", "interaction", "tol", "include_drift", "simulate"}
    obj = _require_keys(obj, "decoupling", {"dims", "c0", "drift"}, keys)
    dims = obj["dims"]
    if not isinstance(dims, list) or not dims:
        raise ConfigError("decoupling.dims", "expected a non-empty list of factor dimensions")
    dims = [_int(x, f"decoupling.dims[{i}]", 1) for i, x in enumerate(dims)]
    d = int(np.prod(dims))
    out = {
        "dims": dims,
        "c0": _matrix(obj["c0"], "decoupling.c0", d, hermitian=False),
        "drift": _matrix(obj["drift"], "decoupling.drift", d, hermitian=True),
    }
    controls = obj.get("controls", [])
    if not isinstance(controls, list):
        raise ConfigError("decoupling.controls", "expected a list of matrices")
    out["controls"] = [_matrix(m, f"decoupling.controls[{i}]", d, True) for i, m in enumerate(controls)]
    zero = [[[0.0, 0.0]] * d for _ in range(d)]
    out["interaction"] = _matrix(obj.get("interaction", zero), "decoupling.interaction", d, True)
    out["tol"] = _real(obj.get("tol", decoupling.DEFAULT_TOL), "decoupling.tol")
    inc = obj.get("include_drift", True)
    if not isinstance(inc, bool):
        raise ConfigError("decoupling.include_drift", "expected a boolean")
    out["include_drift"] = inc
    sim = _require_keys(obj.get("simulate", {}), "decoupling.simulate", set(), {"n_trials", "horizon", "dt"})
    out["simulate"] = {
        "n_trials": _int(sim.get("n_trials", 0), "decoupling.simulate.n_trials", 0),
        "horizon": _real(sim.get("horizon", 10.0), "decoupling.simulate.horizon"),
        "dt": _real(sim.get("dt", 1e-3), "decoupling.simulate.dt"),
    }
    if out["simulate"]["dt"] <= 0 or out["simulate"]["horizon"] <= 0:
        raise ConfigError("decoupling.simulate", "horizon and dt must be positive")
    return out


def _parse_tomography(obj: Any, n: int) -> dict:
    keys = {"populations", "G", "s", "sigma", "center", "n_points", "n_samples", "n_bins"}
    obj = _require_keys(obj, "tomography", {"populations"}, keys)
    pops = _real_list(obj["populations"], "tomography.populations", n)
    if any(p < 0 for p in pops) or abs(sum(pops) - 1.0) > NORMALIZATION_TOL:
        raise ConfigError("tomography.populations", "populations must be non-negative and sum to 1")
    G = _real(obj.get("G", 1.0), "tomography.G")
    if G == 0:
        raise ConfigError("tomography.G", "must be non-zero")
    s = _real_list(obj.get("s", list(range(n))), "tomography.s", n)
    gaps = np.diff(np.sort(s))
    min_gap = float(gaps.min()) if gaps.size else 1.0
    sigma = _real(obj.get("sigma", 0.1 * abs(G) * min_gap), "tomography.sigma")
    if sigma <= 0:
        raise ConfigError("tomography.sigma", "must be positive")
    return {
        "populations": pops,
        "G": G,
        "s": s,
        "sigma": sigma,
        "center": _real(obj.get("center", 0.0), "tomography.center"),
        "n_points": _int(obj.get("n_points", tomography.DEFAULT_POINTS), "tomography.n_points", 2),
        "n_samples": _int(obj.get("n_samples", 0), "tomography.n_samples", 0),
        "n_bins": _int(obj.get("n_bins", 256), "tomography.n_bins", 1),
    }


def scenario_from_dict(doc: Any) -> Scenario:
    doc = _require_keys(doc, "", {"schema_version", "name", "kind"}, _COMMON | {k for r, o in _BY_KIND.values() for k in r | o})
    version = _int(doc["schema_version"], "schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError("schema_version", f"unsupported schema version {version}")
    kind = doc["kind"]
    if kind not in KINDS:
        raise ConfigError("kind", f"unknown kind {kind!r}")
    required, optional = _BY_KIND[kind]
    _require_keys(doc, "", {"schema_version", "name", "kind"} | required, _COMMON | optional)
    name = doc["name"]
    if not isinstance(name, str) or not name:
        raise ConfigError("name", "expected a non-empty string")
    out_path = doc.get("output_path", name)
    if not isinstance(out_path, str) or not out_path:
        raise ConfigError("output_path", "expected a non-empty string")
    fields: dict = {
        "name": name,
        "kind": kind,
        "seed": _int(doc.get("seed", 0), "seed"),
        "output_path": out_path,
        "schema_version": version,
    }
    if "n" in required:
        fields["n"] = n = _int(doc["n"], "n", 1)
    if kind in ("direct_measure", "conjugate_protocol", "lambda_sweep"):
        fields["probe"] = _parse_probe(doc.get("probe"), n)
        fields["state"] = _parse_state(doc["state"], n, need_amplitudes=kind == "lambda_sweep")
        fields["schedule"] = _parse_schedule(doc.get("schedule"))
        if kind == "direct_measure" and "lambda" in fields["state"]:
            raise ConfigError("state.lambda", "not supported for direct_measure")
    if kind == "lambda_sweep":
        if "lambda" in fields["state"]:
            raise ConfigError("state.lambda", "lambda_sweep takes its correlation model from thetas")
        thetas = _real_list(doc["thetas"], "thetas", len(fields["schedule"]["windows"]))
        if any(t < 0 for t in thetas):
            raise ConfigError("thetas", "must be non-negative")
        fields["thetas"] = thetas
    if kind == "decoupling_check":
        fields["decoupling"] = _parse_decoupling(doc["decoupling"])
    if kind == "tomography":
        fields["tomography"] = _parse_tomography(doc["tomography"], n)
    return Scenario(**fields)


def parse_scenario(text: str) -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"not valid JSON: {exc}") from None
    return scenario_from_dict(doc)


def serialize_scenario(sc: Scenario) -> str:
    """Canonical text form: sorted keys, two-space indent, trailing newline."""
    return json.dumps(sc.to_dict(), sort_keys=True, indent=2) + "\n"


def config_hash(sc: Scenario) -> str:
    """Git blob hash of the canonical serialization."""
    body = serialize_scenario(sc).encode()
    return hashlib.sha1(b"blob %d\0" % len(body) + body).hexdigest()


# -- running --------------------------------------------------------------------

def _setup(sc: Scenario) -> probe.ProbeSetup:
    p = sc.probe
    cp = probe.CouplingProfile(tuple(p["coupling"]["breakpoints"]), tuple(p["coupling"]["values"]))
    return probe.ProbeSetup(sc.n, tuple(p["a"]), tuple(p["s"]), cp, p["hbar"])


def _lambda(entry: dict, n: int) -> decoherence.LambdaMatrix:
    if entry["kind"] == "pure":
        return decoherence.lambda_pure(n)
    if entry["kind"] == "mixed":
        return decoherence.lambda_mixed(n)
    return decoherence.lambda_interpolated(n, entry["theta"])


def _initial_state(sc: Scenario) -> QuantumState:
    st = sc.state
    if "populations" in st:
        return QuantumState(np.diag(st["populations"]).astype(complex), (sc.n,))
    c = _to_complex(st["amplitudes"])
    c = c / np.linalg.norm(c)
    if "lambda" in st:
        return decoherence.build_joint(c, _lambda(st["lambda"], sc.n))
    return QuantumState(c, (sc.n,))


def _readout_rows(readouts: list[protocol.CycleReadout]) -> list[dict]:
    return [{k: float(getattr(r, k)) for k in CSV_COLUMNS} for r in readouts]


def _run_decoupling(sc: Scenario) -> dict:
    dc = sc.decoupling
    dims = tuple(dc["dims"])
    prob = decoupling.DecouplingProblem(
        c0=Operator(_to_matrix(dc["c0"]), dims),
        drift=Operator(_to_matrix(dc["drift"]), dims),
        controls=tuple(Operator(_to_matrix(m), dims) for m in dc["controls"]),
        interaction=Operator(_to_matrix(dc["interaction"]), dims),
        tol=dc["tol"],
        include_drift=dc["include_drift"],
    )
    report = decoupling.certify(prob)
    sim = dc["simulate"]
    if sim["n_trials"] > 0:
        dev = decoupling.simulate_output_invariance(prob, sim["n_trials"], sim["horizon"], sim["dt"], sc.seed)
        report = dataclasses.replace(report, simulated_max_deviation=dev)
    return dataclasses.asdict(report)


def _run_tomography(sc: Scenario) -> dict:
    tc = sc.tomography
    phi = tomography.ProbeWavefunction.for_shifts(tc["sigma"], tc["G"], tc["s"], tc["center"], tc["n_points"])
    f = tomography.post_interaction_distribution(phi, tc["G"], tc["s"], tc["populations"])
    if tc["n_samples"] > 0:
        samples = tomography.sample_outcomes(f, tc["n_samples"], sc.seed)
        lo, hi, _ = phi.grid
        data = tomography.Histogram.from_samples(samples, np.linspace(lo, hi, tc["n_bins"] + 1))
    else:
        data = f
    est = tomography.estimate_populations(data, phi, tc["G"], tc["s"])
    p_true = np.asarray(tc["populations"])
    return {
        "p_hat": [float(x) for x in est.p_hat],
        "p_unconstrained": [float(x) for x in est.p_unconstrained],
        "residual_norm": est.residual_norm,
        "p_true": [float(x) for x in p_true],
        "max_abs_error": float(np.max(np.abs(est.p_hat - p_true))),
    }


def run(sc: Scenario) -> RunRecord:
    """Execute a scenario. Deterministic in (config, seed)."""
    record = RunRecord(sc.name, config_hash(sc), sc.seed, sc.kind, sc.to_dict())
    if sc.kind in ("direct_measure", "conjugate_protocol", "lambda_sweep"):
        setup = _setup(sc)
        schedule = protocol.PulseSchedule(tuple(tuple(w) for w in sc.schedule["windows"]))
        candidate = _to_complex(sc.state["candidate"])
        if sc.kind == "direct_measure":
            readouts = protocol.direct_readouts(setup, _initial_state(sc), schedule, candidate)
        elif sc.kind == "conjugate_protocol":
            readouts = protocol.run_schedule(setup, _initial_state(sc), schedule, candidate)[1]
        else:
            c = _to_complex(sc.state["amplitudes"])
            c = c / np.linalg.norm(c)
            readouts = []
            for window, theta in zip(schedule.windows, sc.thetas):
                joint = decoherence.build_joint(c, decoherence.lambda_interpolated(sc.n, theta))
                readouts += protocol.run_schedule(setup, joint, protocol.PulseSchedule((window,)), candidate)[1]
        record.rows = _readout_rows(readouts)
    elif sc.kind == "decoupling_check":
        record.report = _run_decoupling(sc)
    else:
        record.estimate = _run_tomography(sc)
    return record


# -- output ---------------------------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def record_to_csv(record: RunRecord) -> str:
    if record.kind not in ("direct_measure", "conjugate_protocol", "lambda_sweep"):
        raise ConfigError("format", f"csv output is only defined for time-series kinds, not {record.kind}")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in record.rows:
        writer.writerow([_fmt(row[k]) for k in CSV_COLUMNS])
    return buf.getvalue()


def record_to_json(record: RunRecord) -> str:
    return json.dumps(record.to_dict(), sort_keys=True, indent=2) + "\n"


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def default_output_dir() -> Path:
    return Path(os.environ.get(OUTPUT_DIR_ENV, "."))


def emit(record: RunRecord, fmt: str = "csv", out_dir: str | os.PathLike | None = None) -> Path:
    """Write the record as ``<out_dir>/<output_path>.<fmt>`` and return the path."""
    if fmt not in ("csv", "json"):
        raise ConfigError("format", f"unknown format {fmt!r}")
    text = record_to_csv(record) if fmt == "csv" else record_to_json(record)
    out = Path(out_dir) if out_dir is not None else default_output_dir()
    path = out / f"{record.config['output_path']}.{fmt}"
    _atomic_write(path, text)
    return path
