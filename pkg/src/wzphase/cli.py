"""Command-line front end: parse a JSON config describing a Hamiltonian or a
closed loop, route to the library, and emit deterministic CSV or JSON
records (optionally with rendered figures alongside).

Exit status: 0 success, 2 config/parse error, 3 validation error (e.g. open
loop), 4 numerical failure, 5 case-transition error, 1 unexpected.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from io import StringIO
from pathlib import Path

import numpy as np

from . import __version__
from .degeneracy import (DEFAULT_TOL, CaseLabel, canonicalize, classify,
                         condition_residual, degenerate_spectrum)
from .errors import (CaseTransitionError, ConfigError, NumericalError,
                     ValidationError, WzPhaseError)
from .hamiltonian import (MultipoleTensor, Params, multipole_params,
                          params_from_gellmann, params_from_matrix)
from .holonomy import path_ordered_exp, verify_adiabatic
from .loops import AngleSeries, FourierSeries, CanonicalLoop, Loop, ParamsLoop, SampledLoop
from .spectral import frame

MODES = ("classify", "spectrum", "connection", "holonomy", "verify")

SCHEMA_VERSION = 1

DEFAULT_STEPS = {"classify": 128, "spectrum": 128, "connection": 128,
                 "holonomy": 4096, "verify": 20000}


@dataclass
class RunConfig:
    """Validated run description."""

    mode: str
    tolerance: float = DEFAULT_TOL
    n_steps: int = 0  # 0 means mode default
    T_values: list = field(default_factory=list)
    hamiltonian: Params | None = None
    loop: Loop | None = None

    @property
    def steps(self) -> int:
        return self.n_steps if self.n_steps > 0 else DEFAULT_STEPS[self.mode]


def _as_complex(v, where: str) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    raise ConfigError(f"{where}: complex values are numbers or [re, im] pairs, got {v!r}")


def _parse_params(d: dict, where: str) -> Params:
    try:
        return Params(r=float(d.get("r", 0.0)), s=float(d.get("s", 0.0)),
                      t=float(d.get("t", 0.0)),
                      xi=_as_complex(d.get("xi", 0.0), where),
                      zeta=_as_complex(d.get("zeta", 0.0), where),
                      kappa=_as_complex(d.get("kappa", 0.0), where))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: bad Params record: {exc}") from exc


def _parse_hamiltonian(d: dict) -> Params:
    keys = [k for k in ("params", "gellmann", "matrix", "multipole") if k in d]
    if len(keys) != 1:
        raise ConfigError(
            "hamiltonian needs exactly one of: params, gellmann, matrix, multipole")
    kind = keys[0]
    try:
        if kind == "params":
            return _parse_params(d["params"], "hamiltonian.params")
        if kind == "gellmann":
            return params_from_gellmann(d["gellmann"])
        if kind == "matrix":
            rows = d["matrix"]
            M = np.array([[_as_complex(v, "hamiltonian.matrix") for v in row]
                          for row in rows])
            return params_from_matrix(M)
        terms = [MultipoleTensor(int(t["order"]), np.asarray(t["components"], dtype=float))
                 for t in d["multipole"]]
        return multipole_params(terms)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"hamiltonian.{kind}: {exc}") from exc


def _series(d, where: str, angle: bool = False):
    cls = AngleSeries if angle else FourierSeries
    if d is None:
        return cls()
    if not isinstance(d, (dict, int, float)):
        raise ConfigError(f"{where}: expected a series object or number, got {d!r}")
    try:
        return cls.from_dict(d)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: bad series: {exc}") from exc


def _symmetric_tensor_series(order: int, comp: dict, where: str) -> dict:
    series = {}
    for key, val in comp.items():
        try:
            idx = tuple(int(ch) - 1 for ch in str(key))
        except ValueError as exc:
            raise ConfigError(f"{where}: bad index key {key!r}") from exc
        if len(idx) != order or any(i < 0 or i > 2 for i in idx):
            raise ConfigError(
                f"{where}: index {key!r} must have {order} digits in 1..3")
        canon = tuple(sorted(idx))
        if canon in series:
            raise ConfigError(f"{where}: duplicate component for index {key!r}")
        series[canon] = _series(val, f"{where}[{key}]")
    return series


def _parse_loop(d: dict, tol: float) -> Loop:
    kind = d.get("kind")
    if kind not in ("canonical", "multipole", "samples"):
        raise ConfigError(f"loop.kind must be canonical, multipole, or samples, got {kind!r}")
    if "T" not in d:
        raise ConfigError("loop.T (duration) is required")
    T = float(d["T"])
    try:
        if kind == "canonical":
            return CanonicalLoop(
                T,
                rp=_series(d.get("rp"), "loop.rp"),
                sp=_series(d.get("sp"), "loop.sp"),
                tp=_series(d.get("tp"), "loop.tp"),
                gamma=_series(d.get("gamma"), "loop.gamma", angle=True),
                theta=_series(d.get("theta"), "loop.theta", angle=True),
                e2=_series(d.get("e2"), "loop.e2"),
                sign=int(d.get("sign", 1)),
                tol=tol)
        if kind == "multipole":
            term_specs = []
            for k, term in enumerate(d.get("terms", [])):
                order = int(term["order"])
                comp = _symmetric_tensor_series(order, term["components"],
                                                f"loop.terms[{k}].components")
                term_specs.append((order, comp))
            if not term_specs:
                raise ConfigError("loop.terms must list at least one multipole term")
            return ParamsLoop(_multipole_fn(term_specs, T), T, tol)
        samples = [_parse_params(p, f"loop.params[{k}]")
                   for k, p in enumerate(d.get("params", []))]
        return SampledLoop(samples, T, tol)
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"loop.{kind}: {exc}") from exc


def _multipole_fn(term_specs, T: float):
    import itertools

    def params_fn(t: float) -> Params:
        x = t / T
        terms = []
        for order, comp in term_specs:
            tensor = np.zeros((3,) * order)
            for canon, series in comp.items():
                val = float(series.eval(x))
                for perm in set(itertools.permutations(canon)):
                    tensor[perm] = val
            terms.append(MultipoleTensor(order, tensor))
        return multipole_params(terms)

    return params_fn


def parse_config(path: str, mode: str, tol_override: float | None,
                 steps_override: int | None) -> RunConfig:
    """Load and validate a JSON config document."""
    if mode not in MODES:
        raise ConfigError(f"unknown mode {mode!r}; expected one of {MODES}")
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a JSON object")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(f"schema_version must be {SCHEMA_VERSION}, got {version!r}")
    if "mode" in doc and doc["mode"] != mode:
        raise ConfigError(f"config mode {doc['mode']!r} conflicts with CLI mode {mode!r}")
    tol = float(tol_override if tol_override is not None else doc.get("tolerance", DEFAULT_TOL))
    if tol <= 0:
        raise ConfigError(f"tolerance must be positive, got {tol}")
    steps = int(steps_override if steps_override is not None else doc.get("n_steps", 0))
    if steps < 0:
        raise ConfigError(f"n_steps must be non-negative, got {steps}")
    cfg = RunConfig(mode=mode, tolerance=tol, n_steps=steps,
                    T_values=[float(v) for v in doc.get("T_values", [])])
    if "hamiltonian" in doc:
        cfg.hamiltonian = _parse_hamiltonian(doc["hamiltonian"])
    if "loop" in doc:
        try:
            cfg.loop = _parse_loop(doc["loop"], tol)
        except ConfigError:
            raise
        except WzPhaseError:
            raise  # validation of the loop itself keeps its own category
    if cfg.hamiltonian is None and cfg.loop is None:
        raise ConfigError("config needs a 'hamiltonian' or a 'loop' section")
    if mode == "verify" and not cfg.T_values:
        raise ConfigError("verify mode requires a non-empty T_values list")
    if mode in ("connection", "holonomy", "verify") and cfg.loop is None:
        raise ConfigError(f"{mode} mode requires a 'loop' section")
    return cfg


def _sample_points(cfg: RunConfig):
    """(t, Params) pairs: loop samples or the single configured Hamiltonian."""
    if cfg.loop is not None:
        n = cfg.steps
        ts = np.arange(n) * (cfg.loop.T / n)
        return [(float(t), cfg.loop.params_at(float(t))) for t in ts]
    return [(0.0, cfg.hamiltonian)]


def _complex_fields(rec: dict, name: str, z: complex) -> None:
    rec[f"{name}_re"] = float(np.real(z))
    rec[f"{name}_im"] = float(np.imag(z))


def _matrix_fields(rec: dict, name: str, M: np.ndarray) -> None:
    for i in range(M.shape[0]):
        for j in range(M.shape[1]):
            _complex_fields(rec, f"{name}_{i + 1}{j + 1}", M[i, j])


def _provenance(rec: dict, cfg: RunConfig) -> dict:
    if "steps" not in rec and "n_steps" not in rec:
        rec["steps"] = cfg.steps
    rec["tol"] = cfg.tolerance
    rec["version"] = __version__
    return rec


def _run_classify(cfg: RunConfig) -> list[dict]:
    records = []
    points = _sample_points(cfg)
    for k, (t, p) in enumerate(points):
        label = classify(p, cfg.tolerance)
        rec = {"index": k, "t": t, "case": label.value, "steps": len(points)}
        if label.is_canonical_case or label is CaseLabel.TRIVIAL_DIAGONAL:
            try:
                e1, e2, _ = degenerate_spectrum(p, label, cfg.tolerance)
                rec["e1"], rec["e2"] = e1, e2
            except ValidationError:
                rec["e1"] = rec["e2"] = None
        else:
            rec["e1"] = rec["e2"] = None
        rec["residual"] = condition_residual(p, label, cfg.tolerance)
        records.append(_provenance(rec, cfg))
    return records


def _run_spectrum(cfg: RunConfig) -> list[dict]:
    records = []
    points = _sample_points(cfg)
    for k, (t, p) in enumerate(points):
        label = classify(p, cfg.tolerance)
        if not label.is_canonical_case:
            raise ValidationError(
                f"spectrum mode needs Case1-Case4 input, sample {k} is {label.value}")
        c = canonicalize(p, label, cfg.tolerance)
        f = frame(c, label)
        rec = {"index": k, "t": t, "case": label.value, "steps": len(points),
               "e1": c.e2 + c.e1p, "e2": c.e2, "sign": c.sign}
        for name, vec in (("v1", f.v1), ("w1", f.w1), ("w2", f.w2)):
            for i in range(3):
                _complex_fields(rec, f"{name}_{i + 1}", vec[i])
        records.append(_provenance(rec, cfg))
    return records


def _run_connection(cfg: RunConfig) -> list[dict]:
    loop = cfg.loop
    n = cfg.steps
    dt = loop.T / n
    ts = (np.arange(n) + 0.5) * dt
    a1, a2 = loop.connection_batch(ts)
    records = []
    for k in range(n):
        rec = {"index": k, "t": float(ts[k]), "case": loop.label.value,
               "steps": n, "a1": float(a1[k])}
        _matrix_fields(rec, "a2", a2[k])
        records.append(_provenance(rec, cfg))
    return records


def _run_holonomy(cfg: RunConfig) -> list[dict]:
    res = path_ordered_exp(cfg.loop, cfg.steps)
    rec = {"case": cfg.loop.label.value, "steps": res.steps}
    _complex_fields(rec, "gamma1", res.gamma1)
    _complex_fields(rec, "dyn1", res.dyn1)
    _matrix_fields(rec, "gamma2", res.gamma2)
    _complex_fields(rec, "dyn2", res.dyn2)
    return [_provenance(rec, cfg)]


def _run_verify(cfg: RunConfig) -> list[dict]:
    reports = verify_adiabatic(cfg.loop, cfg.T_values, cfg.steps)
    records = []
    for rep in reports:
        rec = {"T": rep.T, "n_steps": rep.n_steps,
               "unitary_distance": rep.unitary_distance,
               "subspace_leakage": rep.subspace_leakage,
               "case": cfg.loop.label.value}
        records.append(_provenance(rec, cfg))
    return records


_RUNNERS = {"classify": _run_classify, "spectrum": _run_spectrum,
            "connection": _run_connection, "holonomy": _run_holonomy,
            "verify": _run_verify}


def run(cfg: RunConfig) -> list[dict]:
    """Execute the configured mode and return its output records."""
    return _RUNNERS[cfg.mode](cfg)


def _fmt_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def render_csv(records: list[dict]) -> str:
    out = StringIO()
    cols = list(records[0].keys())
    out.write(",".join(cols) + "\n")
    for rec in records:
        out.write(",".join(_fmt_cell(rec[c]) for c in cols) + "\n")
    return out.getvalue()


def render_json(records: list[dict], cfg: RunConfig) -> str:
    doc = {"schema_version": SCHEMA_VERSION, "mode": cfg.mode,
           "records": records}
    return json.dumps(doc, indent=2) + "\n"


def parse_output(text: str, fmt: str) -> list[dict]:
    """Re-parse emitted records (the documented schema round-trip)."""
    if fmt == "json":
        doc = json.loads(text)
        return doc["records"]
    lines = [ln for ln in text.splitlines() if ln]
    cols = lines[0].split(",")
    records = []
    for ln in lines[1:]:
        rec = {}
        for c, cell in zip(cols, ln.split(",")):
            if cell == "":
                rec[c] = None
            elif c in ("case", "version"):
                rec[c] = cell
            elif c in ("index", "steps", "n_steps", "sign"):
                rec[c] = int(cell)
            else:
                rec[c] = float(cell)
        records.append(rec)
    return records


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="wzphase",
        description="Geometric phases of doubly degenerate three-level systems")
    parser.add_argument("mode", choices=MODES)
    parser.add_argument("--config", required=True, help="JSON config document")
    parser.add_argument("--tol", type=float, default=None, help="relative tolerance")
    parser.add_argument("--steps", type=int, default=None, help="sample/step count")
    parser.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
    parser.add_argument("--out", default=None, help="output path (default stdout)")
    parser.add_argument("--plot", action="store_true",
                        help="render figures next to the output")
    args = parser.parse_args(argv)
    try:
        cfg = parse_config(args.config, args.mode, args.tol, args.steps)
        records = run(cfg)
        text = render_json(records, cfg) if args.fmt == "json" else render_csv(records)
        if args.out:
            Path(args.out).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
        if args.plot:
            from . import plotting
            stem = str(Path(args.out).with_suffix("")) if args.out else f"wzphase_{cfg.mode}"
            for path in plotting.render(cfg.mode, records, stem):
                print(f"wrote {path}", file=sys.stderr)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 4
    except CaseTransitionError as exc:
        print(f"case transition error: {exc}", file=sys.stderr)
        return 5
    except WzPhaseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
