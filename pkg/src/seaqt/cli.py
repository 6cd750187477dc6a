"""Command-line interface: ``seaqt simulate | verify | contrast | scenario-list``.

Runs are described by an INI file with the sections ``scenario``,
``tau``, ``stepper`` and ``output`` (plus ``corpus`` for ``verify`` and
``contrast`` for ``contrast``); flags override individual keys.  Every
command writes its files into a fresh temporary directory next to the
output directory and moves them into place only after the run finished,
so a failed run never leaves partial output.

Exit codes: 0 success, 1 configuration or validation error, 2 numerical
failure, 3 invariant violation.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import logging
import math
import os
import shutil
import sys
import tempfile
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import scenarios
from .dynamics import AdaptiveRK45, EvolutionSpec, FixedRK4, Mode, integrate
from .errors import DegenerateSpreadError, IntegrationError, SeaError, ValidationError
from .hilbert import DensityOperator, UnitSystem
from .metrics import energy_projectors, inequality_suite, trajectory_report
from .pauli import TransitionMatrix, contrast_run
from .sea import AdaptiveTau, ConstantTau, SeaModel

logger = logging.getLogger("seaqt")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_INVARIANT = 0, 1, 2, 3
RESIDUAL_TOL = -1e-8
ENTROPY_STEP_TOL = -1e-9

TRAJECTORY_TAIL = (
    "entropy", "entropy_rate", "theta", "delta_H", "delta_S", "delta_M",
    "tau_U", "tau_D", "tau_K", "tau_S", "tau_UD", "a_tau",
)


class ConfigError(SeaError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


# --------------------------------------------------------------------------
# configuration


@dataclass
class RunConfig:
    scenario: str | None = None
    levels: tuple | None = None
    initial: tuple | None = None
    hamiltonian: str | None = None
    initial_state: str | None = None
    delta: float | None = None
    t_start: float | None = None
    t_end: float | None = None
    sample_every: float | None = None
    backward: bool = False
    stop_when_relaxed: bool = True
    tau_policy: str | None = None
    tau: float = 1.0
    hbar: float = 1.0
    kB: float = 1.0
    stepper: str = "adaptive"
    dt: float = 1e-3
    rtol: float = 1e-9
    atol: float = 1e-12
    dt_min: float = 1e-12
    dt_max: float = 0.1
    out: str = "seaqt-out"
    observables: tuple = ("H", "S", "P")
    seed: int = 0
    corpus: dict = field(default_factory=dict)
    contrast: dict = field(default_factory=dict)

    def echo(self) -> dict:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(self).items()}

    def digest(self) -> str:
        text = json.dumps(self.echo(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()


_SCHEMA = {
    "scenario": {
        "name": "scenario", "levels": "levels", "initial": "initial", "hamiltonian": "hamiltonian",
        "initial_state": "initial_state", "delta": "delta", "t_start": "t_start", "t_end": "t_end",
        "sample_every": "sample_every", "backward": "backward", "stop_when_relaxed": "stop_when_relaxed",
        "seed": "seed",
    },
    "tau": {"policy": "tau_policy", "tau": "tau", "hbar": "hbar", "kb": "kB"},
    "stepper": {"kind": "stepper", "dt": "dt", "rtol": "rtol", "atol": "atol", "dt_min": "dt_min", "dt_max": "dt_max"},
    "output": {"dir": "out", "observables": "observables"},
}
_FREE_SECTIONS = ("corpus", "contrast")


def _float_list(text, name):
    try:
        return tuple(float(x) for x in text.replace(";", ",").split(",") if x.strip())
    except ValueError:
        raise ConfigError(name, f"expected a comma-separated list of numbers, got {text!r}") from None


def _matrix(text, name):
    try:
        rows = [[complex(x.strip().replace(" ", "")) for x in row.split(",")] for row in text.split(";") if row.strip()]
        m = np.array(rows, dtype=complex)
    except ValueError:
        raise ConfigError(name, f"could not parse matrix {text!r}") from None
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ConfigError(name, f"matrix must be square, got shape {m.shape}")
    return m


def _convert(attr, raw, name):
    current = RunConfig.__dataclass_fields__[attr]
    if attr in ("levels", "initial"):
        return _float_list(raw, name)
    if attr == "observables":
        return tuple(x.strip() for x in raw.split(",") if x.strip())
    if attr in ("backward", "stop_when_relaxed"):
        low = raw.strip().lower()
        if low not in ("true", "false", "yes", "no", "1", "0", "on", "off"):
            raise ConfigError(name, f"expected a boolean, got {raw!r}")
        return low in ("true", "yes", "1", "on")
    if attr == "seed":
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(name, f"expected an integer, got {raw!r}") from None
    if current.type in ("float", "float | None"):
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(name, f"expected a number, got {raw!r}") from None
    return raw.strip()


def parse_config(text: str) -> RunConfig:
    """Parse INI text into a :class:`RunConfig`; unknown keys are errors."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError("config", str(exc).splitlines()[0]) from None
    cfg = RunConfig()
    for section in parser.sections():
        if section in _FREE_SECTIONS:
            setattr(cfg, section, dict(parser[section]))
            continue
        if section not in _SCHEMA:
            raise ConfigError(f"[{section}]", "unknown section")
        for key, raw in parser[section].items():
            attr = _SCHEMA[section].get(key)
            if attr is None:
                raise ConfigError(f"[{section}] {key}", "unknown key")
            setattr(cfg, attr, _convert(attr, raw, f"[{section}] {key}"))
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig):
    if cfg.tau_policy not in (None, "constant", "adaptive"):
        raise ConfigError("[tau] policy", f"must be 'constant' or 'adaptive', got {cfg.tau_policy!r}")
    if cfg.stepper not in ("adaptive", "rk4"):
        raise ConfigError("[stepper] kind", f"must be 'adaptive' or 'rk4', got {cfg.stepper!r}")
    for attr, name in (("tau", "[tau] tau"), ("hbar", "[tau] hbar"), ("kB", "[tau] kb"), ("dt", "[stepper] dt")):
        value = getattr(cfg, attr)
        if not (math.isfinite(value) and value > 0):
            raise ConfigError(name, f"must be positive, got {value!r}")
    if cfg.sample_every is not None and not cfg.sample_every > 0:
        raise ConfigError("[scenario] sample_every", "must be positive")
    if cfg.scenario is not None and cfg.scenario not in scenarios.SCENARIOS:
        raise ConfigError("[scenario] name", f"unknown scenario {cfg.scenario!r}")
    unknown = [o for o in cfg.observables if o not in ("H", "S", "P")]
    if unknown:
        raise ConfigError("[output] observables", f"unknown observables {unknown}; use H, S, P")


def to_ini(cfg: RunConfig) -> str:
    """Serialise ``cfg`` so that ``parse_config(to_ini(cfg)) == cfg``."""
    parser = configparser.ConfigParser(interpolation=None)
    for section, keys in _SCHEMA.items():
        parser[section] = {}
        for key, attr in keys.items():
            value = getattr(cfg, attr)
            if value is None:
                continue
            if isinstance(value, tuple):
                value = ", ".join(repr(v) if isinstance(v, float) else str(v) for v in value)
            elif isinstance(value, float):
                value = repr(value)
            parser[section][key] = str(value)
    for section in _FREE_SECTIONS:
        if getattr(cfg, section):
            parser[section] = dict(getattr(cfg, section))
    from io import StringIO

    buf = StringIO()
    parser.write(buf)
    return buf.getvalue()


def load_config(path: str | None) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError("--config", f"cannot read {path!r}: {exc.strerror}") from None


# --------------------------------------------------------------------------
# output helpers


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, str):
        return x
    return "%.17g" % float(x)


class Bundle:
    """Collects output files in a temporary directory and publishes them together."""

    def __init__(self, out_dir: str):
        self.out_dir = os.path.abspath(out_dir)
        parent = os.path.dirname(self.out_dir)
        os.makedirs(parent, exist_ok=True)
        self.tmp = tempfile.mkdtemp(prefix=".seaqt-", dir=parent)
        self.files = []

    def path(self, name: str) -> str:
        full = os.path.join(self.tmp, name)
        os.makedirs(os.path.dirname(full), exist_ok=True)
        if name not in self.files:
            self.files.append(name)
        return full

    def write_rows(self, name, header, rows):
        with open(self.path(name), "w", encoding="utf-8") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(fmt(v) for v in row) + "\n")

    def write_json(self, name, data):
        with open(self.path(name), "w", encoding="utf-8") as fh:
            json.dump(data, fh, indent=2, sort_keys=True, default=_json_default)
            fh.write("\n")

    def commit(self):
        os.makedirs(self.out_dir, exist_ok=True)
        for name in self.files:
            dst = os.path.join(self.out_dir, name)
            os.makedirs(os.path.dirname(dst), exist_ok=True)
            os.replace(os.path.join(self.tmp, name), dst)
        shutil.rmtree(self.tmp, ignore_errors=True)

    def discard(self):
        shutil.rmtree(self.tmp, ignore_errors=True)


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not serialisable: {type(obj).__name__}")


def _finite(x):
    """JSON has no infinity; encode it as a string."""
    if isinstance(x, float) and not math.isfinite(x):
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    return x


# --------------------------------------------------------------------------
# simulate


def _policy(cfg: RunConfig, default):
    if cfg.tau_policy == "adaptive":
        return AdaptiveTau()
    if cfg.tau_policy == "constant":
        return ConstantTau(cfg.tau)
    return default


def _stepper(cfg: RunConfig):
    if cfg.stepper == "rk4":
        return FixedRK4(cfg.dt)
    return AdaptiveRK45(rtol=cfg.rtol, atol=cfg.atol, dt_min=cfg.dt_min, dt_max=cfg.dt_max)


def _build_run(cfg: RunConfig):
    """Return ``(model, spec)`` for the configured simulation."""
    units = UnitSystem(hbar=cfg.hbar, kB=cfg.kB)
    if cfg.scenario is not None:
        item = scenarios.get_scenario(cfg.scenario)
        if not isinstance(item, scenarios.ScenarioConfig):
            raise ConfigError("[scenario] name", f"{cfg.scenario!r} is not a simulation scenario; use 'contrast'")
        if cfg.delta is not None or cfg.tau_policy is not None:
            policy = _policy(cfg, item.tau_policy)
            lead = scenarios.DEFAULT_LEAD_IN if isinstance(policy, ConstantTau) else 0.0
            item = scenarios.four_level_scenario(
                policy, delta=scenarios.DEFAULT_DELTA if cfg.delta is None else cfg.delta, lead_in=lead
            )
        model = SeaModel.from_levels(item.levels, units=units, tau_policy=item.tau_policy)
        t_end = item.t_end if cfg.t_end is None else cfg.t_end
        every = item.sample_every if cfg.sample_every is None else cfg.sample_every
        if cfg.backward:
            p0, t0, t1 = np.array(item.initial_distribution), 0.0, -item.backward_horizon
        else:
            p0 = scenarios.initial_state(item)
            t0 = item.t_start
            t1 = t_end
        spec = EvolutionSpec(p0, model, t0, t1, _stepper(cfg), every, Mode.DIAGONAL, cfg.stop_when_relaxed)
        return model, spec

    policy = _policy(cfg, ConstantTau(cfg.tau))
    if cfg.hamiltonian is not None:
        H = _matrix(cfg.hamiltonian, "[scenario] hamiltonian")
        if cfg.initial_state is None:
            raise ConfigError("[scenario] initial_state", "required with an inline hamiltonian")
        rho = _matrix(cfg.initial_state, "[scenario] initial_state")
        model = SeaModel(H, units=units, tau_policy=policy)
        mode = Mode.FULL
        state = rho
    else:
        if cfg.levels is None or cfg.initial is None:
            raise ConfigError("[scenario] name", "give a scenario name or inline levels and initial")
        if len(cfg.levels) != len(cfg.initial):
            raise ConfigError("[scenario] initial", "length differs from levels")
        model = SeaModel.from_levels(cfg.levels, units=units, tau_policy=policy)
        mode = Mode.DIAGONAL
        state = np.array(cfg.initial)
    t0 = 0.0 if cfg.t_start is None else cfg.t_start
    t1 = 10.0 if cfg.t_end is None else cfg.t_end
    if cfg.backward:
        t1 = t0 - (t1 - t0)
    every = 0.1 if cfg.sample_every is None else cfg.sample_every
    spec = EvolutionSpec(state, model, t0, t1, _stepper(cfg), every, mode, cfg.stop_when_relaxed)
    return model, spec


def _observable_kind(name):
    return "P" if name.startswith("P") else name


def _trajectory_rows(traj, reports):
    rows = []
    diagonal = traj.mode is Mode.DIAGONAL
    for k, (t, state) in enumerate(zip(traj.times, traj.states)):
        rep = reports[k]
        if diagonal:
            head = list(traj.probabilities[k])
        else:
            m = state.matrix
            head = [v for z in m.ravel() for v in (z.real, z.imag)]
        ts = rep.time_scales
        rows.append(
            [t, *head, rep.entropy, rep.entropy_rate, rep.theta, rep.delta_H, rep.delta_S, rep.delta_M,
             ts.tau_U, ts.tau_D, ts.tau_K, ts.tau_S, ts.tau_UD, ts.a_tau]
        )
    return rows


def _trajectory_header(traj, dim):
    if traj.mode is Mode.DIAGONAL:
        head = [f"p_{n + 1}" for n in range(dim)]
    else:
        head = [f"{part}_{i + 1}{j + 1}" for i in range(dim) for j in range(dim) for part in ("re", "im")]
    return ["t", *head, *TRAJECTORY_TAIL]


def cmd_simulate(cfg: RunConfig) -> int:
    started = time.perf_counter()
    model, spec = _build_run(cfg)
    try:
        traj = integrate(spec)
    except IntegrationError as exc:
        print(f"numerical failure: {exc} (last good time {exc.last_time!r})", file=sys.stderr)
        return EXIT_NUMERIC
    projectors = energy_projectors(model.hamiltonian)
    if len(traj) >= 2:
        treport = trajectory_report(traj, model, projectors=projectors)
        all_reports = treport.reports
    else:
        treport = None
        all_reports = [inequality_suite(s, model) for s in traj.states]

    worst = treport.worst_residuals() if treport is not None else {}
    violations = {k: v for k, v in worst.items() if v < RESIDUAL_TOL}
    if traj.diagnostics["min_entropy_increment"] < ENTROPY_STEP_TOL:
        violations["entropy_monotonicity"] = traj.diagnostics["min_entropy_increment"]

    bundle = Bundle(cfg.out)
    try:
        dim = model.dim
        bundle.write_rows("trajectory.csv", _trajectory_header(traj, dim), _trajectory_rows(traj, all_reports))
        bundle.write_rows(
            "report.csv",
            ["t", "observable", "delta", "rate", "tau", "r_FM", "c_FH", "degenerate"],
            [
                [t, row.name, row.delta, row.rate, row.tau, row.r_FM, row.c_FH, row.degenerate]
                for t, rep in zip(traj.times, all_reports)
                for row in rep.rows
                if _observable_kind(row.name) in cfg.observables
            ],
        )
        bundle.write_rows("residuals.csv", ["family", "worst"], sorted(worst.items()))
        _write_plot_data(bundle, traj, all_reports, projectors)
        final = traj.states[-1]
        summary = {
            "command": "simulate",
            "scenario": cfg.scenario,
            "direction": "backward" if traj.diagnostics["direction"] < 0 else "forward",
            "samples": len(traj),
            "t_first": float(traj.times[0]),
            "t_last": float(traj.times[-1]),
            "relaxed_at": traj.relaxed_at,
            "final_distribution": [float(np.einsum("ij,ji->", final.matrix, p).real) for p in projectors],
            "final_theta": _finite(all_reports[-1].theta),
            "diagnostics": {k: _finite(float(v)) for k, v in traj.diagnostics.items()},
            "worst_residuals": {k: _finite(v) for k, v in worst.items()},
            "invariant_violations": len(violations),
            "violations": {k: _finite(v) for k, v in violations.items()},
            "wall_time_s": time.perf_counter() - started,
            "config": cfg.echo(),
            "config_hash": cfg.digest(),
        }
        summary["files"] = list(bundle.files) + ["summary.json"]
        bundle.write_json("summary.json", summary)
        bundle.commit()
    except BaseException:
        bundle.discard()
        raise
    if violations:
        for name, value in violations.items():
            print(f"invariant violated: {name} = {value:.3e}", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


def _write_plot_data(bundle, traj, reports, projectors):
    """Two-column ``t value`` series for the occupation and time-scale panels."""
    t = traj.times
    pops = np.array([[float(np.einsum("ij,ji->", s.matrix, p).real) for p in projectors] for s in traj.states])
    series = {
        "entropy": [r.entropy for r in reports],
        "entropy_rate": [r.entropy_rate for r in reports],
        "theta": [r.theta for r in reports],
        "tau_U": [r.time_scales.tau_U for r in reports],
        "tau_D": [r.time_scales.tau_D for r in reports],
        "tau_UD": [r.time_scales.tau_UD for r in reports],
    }
    for n in range(len(projectors)):
        series[f"p_{n + 1}"] = pops[:, n]
        taus = []
        for r in reports:
            row = next((row for row in r.rows if row.name == f"P{n + 1}"), None)
            taus.append(math.nan if row is None or row.degenerate else row.tau)
        series[f"tau_P{n + 1}"] = taus
        # 2 tau_D |dp_n/dt|, bounded by 1 when the dynamics is purely dissipative
        vals = []
        for r in reports:
            row = next((row for row in r.rows if row.name == f"P{n + 1}"), None)
            td = r.time_scales.tau_D
            vals.append(0.0 if row is None or row.degenerate or math.isinf(td) else 2 * td * abs(row.rate))
        series[f"two_tauD_dp_{n + 1}"] = vals
    for name, values in series.items():
        bundle.write_rows(f"plots/{name}.dat", ["t", name], zip(t, values))


# --------------------------------------------------------------------------
# verify


def _gibbs_states(dim, count, rng, H):
    w, v = np.linalg.eigh(H)
    out = []
    for _ in range(count):
        beta = rng.uniform(0.1, 5.0)
        p = np.exp(-beta * (w - w.min()))
        p /= p.sum()
        out.append(DensityOperator((v * p) @ v.conj().T))
    return out


def _corpus(cfg: RunConfig):
    spec = cfg.corpus
    try:
        dims = [int(x) for x in spec.get("dims", "4").split(",")]
        count = int(spec.get("count", "100"))
        kinds = [k.strip() for k in spec.get("kinds", "full").split(",")]
    except ValueError as exc:
        raise ConfigError("[corpus]", str(exc)) from None
    for k in kinds:
        if k not in scenarios.CORPUS_KINDS + ("gibbs",):
            raise ConfigError("[corpus] kinds", f"unknown kind {k!r}")
    if any(not 2 <= d <= 8 for d in dims):
        raise ConfigError("[corpus] dims", "dimensions must lie in [2, 8]")
    rng = np.random.default_rng(cfg.seed)
    items = []
    for d in dims:
        H = scenarios.random_hamiltonian(d, seed=int(rng.integers(2**32)))
        model = SeaModel(H, tau_policy=_policy(cfg, ConstantTau(cfg.tau)))
        for kind in kinds:
            sub_seed = int(rng.integers(2**32))
            if kind == "gibbs":
                states = _gibbs_states(d, count, np.random.default_rng(sub_seed), H)
            else:
                states = scenarios.random_state_corpus(d, count, sub_seed, kind, hamiltonian=H)
            items += [(kind, model, s) for s in states]
    path = spec.get("states_file")
    if path:
        try:
            with open(path, encoding="utf-8") as fh:
                extra = json.load(fh)
        except OSError as exc:
            raise ConfigError("[corpus] states_file", f"cannot read {path!r}: {exc.strerror}") from None
        for k, entry in enumerate(extra):
            H = _to_complex(entry["hamiltonian"])
            rho = _to_complex(entry["state"])
            try:
                state = DensityOperator(rho)
            except ValidationError as exc:
                raise ValidationError(f"states_file entry {k}: {exc}") from None
            items.append(("file", SeaModel(H, tau_policy=_policy(cfg, ConstantTau(cfg.tau))), state))
    return items


def _to_complex(data):
    """Matrix from nested lists of numbers or ``[re, im]`` pairs."""
    arr = np.array(data, dtype=float)
    if arr.ndim == 3:
        return arr[..., 0] + 1j * arr[..., 1]
    return arr.astype(complex)


def _from_complex(m):
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def cmd_verify(cfg: RunConfig) -> int:
    started = time.perf_counter()
    items = _corpus(cfg)
    worst = {}
    failures = []
    degenerate = 0
    for index, (kind, model, state) in enumerate(items):
        try:
            rep = inequality_suite(state, model)
        except DegenerateSpreadError:
            degenerate += 1
            continue
        degenerate += len(rep.degenerate_rows)
        for key, value in rep.residuals.items():
            family = key.split("[", 1)[0]
            if family not in worst or value < worst[family][0]:
                worst[family] = (value, index, kind)
            if value < RESIDUAL_TOL:
                failures.append((key, value, index, kind, model, state))

    bundle = Bundle(cfg.out)
    try:
        bundle.write_rows(
            "verify_report.csv",
            ["family", "worst", "state_index", "kind"],
            [[fam, v, i, k] for fam, (v, i, k) in sorted(worst.items())],
        )
        summary = {
            "command": "verify",
            "states": len(items),
            "degenerate_rows": degenerate,
            "worst_residuals": {fam: v for fam, (v, _, _) in worst.items()},
            "invariant_violations": len(failures),
            "wall_time_s": time.perf_counter() - started,
            "config": cfg.echo(),
            "config_hash": cfg.digest(),
        }
        if failures:
            key, value, index, kind, model, state = min(failures, key=lambda f: f[1])
            summary["first_failure"] = {"residual": key, "value": value, "state_index": index, "kind": kind}
            bundle.write_json(
                "failing_state.json",
                [{"hamiltonian": _from_complex(model.hamiltonian), "state": _from_complex(state.matrix)}],
            )
        summary["files"] = list(bundle.files) + ["summary.json"]
        bundle.write_json("summary.json", summary)
        bundle.commit()
    except BaseException:
        bundle.discard()
        raise
    if failures:
        key, value, index, _, _, _ = min(failures, key=lambda f: f[1])
        print(f"inequality violated: {key} = {value:.3e} at state {index}", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


# --------------------------------------------------------------------------
# contrast


def cmd_contrast(cfg: RunConfig) -> int:
    base = scenarios.klgs_contrast()
    spec = cfg.contrast
    levels = _float_list(spec["levels"], "[contrast] levels") if "levels" in spec else base.levels
    p0 = _float_list(spec["initial"], "[contrast] initial") if "initial" in spec else base.initial_distribution
    if "rates" in spec:
        rates = np.array([_float_list(r, "[contrast] rates") for r in spec["rates"].split(";") if r.strip()])
    else:
        rates = np.array(base.rates)
    try:
        horizon = float(spec.get("horizon", base.horizon))
        every = float(spec.get("sample_every", base.sample_every))
    except ValueError as exc:
        raise ConfigError("[contrast]", str(exc)) from None
    model = SeaModel.from_levels(levels, units=UnitSystem(hbar=cfg.hbar, kB=cfg.kB), tau_policy=_policy(cfg, ConstantTau(cfg.tau)))
    try:
        rec = contrast_run(np.array(p0), TransitionMatrix(rates), model, horizon, every)
    except IntegrationError as exc:
        print(f"numerical failure: {exc} (last good time {exc.last_time!r})", file=sys.stderr)
        return EXIT_NUMERIC
    n = len(levels)
    bundle = Bundle(cfg.out)
    try:
        bundle.write_rows(
            "contrast.csv",
            ["t", *[f"pauli_p_{k + 1}" for k in range(n)], *[f"sea_p_{k + 1}" for k in range(n)]],
            [[t, *a, *b] for t, a, b in zip(rec.times, rec.pauli, rec.sea)],
        )
        rate = rec.initial_entropy_rate
        summary = {
            "command": "contrast",
            "applicable": rec.applicable,
            "status": "ok" if rec.applicable else "not applicable",
            "zero_levels": [z + 1 for z in rec.zero_levels],
            "pauli_repopulation_time": rec.pauli_repopulation_time,
            "sea_level_max": rec.sea_level_max,
            "sea_level_exactly_zero": rec.applicable and rec.sea_level_max == 0.0,
            "pauli_initial_entropy_rate": "divergent" if rate.divergent else rate.value,
            "pauli_energy_drift": rec.pauli_energy_drift,
            "config": cfg.echo(),
            "config_hash": cfg.digest(),
        }
        summary["files"] = list(bundle.files) + ["summary.json"]
        bundle.write_json("summary.json", summary)
        bundle.commit()
    except BaseException:
        bundle.discard()
        raise
    return EXIT_OK


def cmd_scenario_list(cfg: RunConfig) -> int:
    for name in sorted(scenarios.SCENARIOS):
        item = scenarios.get_scenario(name)
        if isinstance(item, scenarios.ScenarioConfig):
            policy = "adaptive tau" if isinstance(item.tau_policy, AdaptiveTau) else "constant tau"
            desc = f"four levels, <H> = {item.mean_energy:g}, {policy}, t in [{item.t_start:g}, {item.t_end:g}]"
        else:
            desc = f"Pauli vs SEA from {list(item.initial_distribution)}, horizon {item.horizon:g}"
        print(f"{name}\t{desc}")
    return EXIT_OK


# --------------------------------------------------------------------------
# entry point

COMMANDS = {
    "simulate": cmd_simulate,
    "verify": cmd_verify,
    "contrast": cmd_contrast,
    "scenario-list": cmd_scenario_list,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="seaqt", description="Steepest-entropy-ascent quantum dynamics toolkit")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", metavar="PATH", help="INI run configuration")
        p.add_argument("--scenario", metavar="NAME", help="named scenario (see scenario-list)")
        p.add_argument("--backward", action="store_true", help="integrate backward in time")
        p.add_argument("--out", metavar="DIR", help="output directory")
        p.add_argument("--seed", type=int, metavar="N", help="random seed for corpora")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config)
        if args.scenario is not None:
            cfg.scenario = args.scenario
            if args.command == "simulate":
                cfg.levels = cfg.initial = cfg.hamiltonian = cfg.initial_state = None
        if args.backward:
            cfg.backward = True
        if args.out is not None:
            cfg.out = args.out
        if args.seed is not None:
            cfg.seed = args.seed
        _validate(cfg)
        return COMMANDS[args.command](cfg)
    except (ConfigError, ValidationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IntegrationError as exc:
        print(f"numerical failure: {exc} (last good time {exc.last_time!r})", file=sys.stderr)
        return EXIT_NUMERIC
    except SeaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
