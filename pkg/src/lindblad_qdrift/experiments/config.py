"""Experiment configuration: JSON loading, defaults and validation."""
from __future__ import annotations

import copy
import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ConfigError

KINDS = ("scaling-average", "scaling-random", "gibbs", "davies-verify", "gap-cert",
         "spectrum", "step-order")
ALGS = ("exact", "trotter", "dilation")
SYSTEM_KINDS = ("tfim", "heisenberg", "pauli-strings", "spectrum")
ENSEMBLE_KINDS = ("qubit-pair", "twirled-davies", "random-davies")
STATES = ("random-pure", "mixed", "basis0", "gibbs")

SYSTEM_KEYS = {"kind", "n", "J", "g", "h", "m", "values"}
ENSEMBLE_KEYS = {"kind", "n_base", "weight", "sign_method", "gain", "lam", "Lambda"}


@dataclass
class ExperimentConfig:
    kind: str
    seed: int | None = None
    system: dict = field(default_factory=lambda: {"kind": "tfim", "n": 1, "h": -0.5})
    ensemble: dict = field(default_factory=lambda: {"kind": "qubit-pair"})
    alg: str = "exact"
    beta: float = 1.0
    beta_grid: list | None = None
    tau: float | None = None
    tau_grid: list | None = None
    M: int | None = None
    M_grid: list | None = None
    T: float | None = None
    n_traj: int = 200
    S_grid: list | None = None
    repetitions: int = 10
    algs: list | None = None
    initial_state: str = "basis0"
    probes: list = field(default_factory=lambda: ["mixed", "random-pure"])
    out: str | None = None

    def validate(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}; expected one of {KINDS}")
        if self.seed is None:
            raise ConfigError("a seed is mandatory (config 'seed' or --seed)")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        _check_section("system", self.system, SYSTEM_KEYS, SYSTEM_KINDS)
        _check_section("ensemble", self.ensemble, ENSEMBLE_KEYS, ENSEMBLE_KINDS)
        if self.alg not in ALGS:
            raise ConfigError(f"unknown alg {self.alg!r}")
        for a in self.algs or []:
            if a not in ALGS:
                raise ConfigError(f"unknown alg {a!r}")
        for name in ("M_grid", "tau_grid", "S_grid", "beta_grid", "algs", "probes"):
            val = getattr(self, name)
            if val is not None and len(val) == 0:
                raise ConfigError(f"{name} must be nonempty")
        for name in ("M_grid", "S_grid"):
            for x in getattr(self, name) or []:
                if not isinstance(x, int) or x < 1:
                    raise ConfigError(f"{name} entries must be positive integers")
        for x in self.tau_grid or []:
            if not x > 0:
                raise ConfigError("tau_grid entries must be positive")
        if self.tau is not None and self.M is not None and self.T is not None:
            if abs(self.tau * self.M - self.T) > 1e-12 * max(1.0, abs(self.T)):
                raise ConfigError(f"tau*M = {self.tau * self.M} does not equal T = {self.T}")
        if self.beta < 0:
            raise ConfigError("beta must be non-negative")
        if self.n_traj < 2:
            raise ConfigError("n_traj must be at least 2")
        if self.repetitions < 1:
            raise ConfigError("repetitions must be positive")
        for p in list(self.probes) + [self.initial_state]:
            if p not in STATES:
                raise ConfigError(f"unknown state {p!r}; expected one of {STATES}")
        return self

    def require(self, *names):
        for name in names:
            if getattr(self, name) is None:
                raise ConfigError(f"{self.kind} needs '{name}'")

    def to_dict(self):
        return dataclasses.asdict(self)

    def sha256(self):
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _check_section(name, sec, allowed, kinds):
    if not isinstance(sec, dict):
        raise ConfigError(f"'{name}' must be an object")
    extra = set(sec) - allowed
    if extra:
        raise ConfigError(f"unknown {name} keys: {sorted(extra)}")
    if sec.get("kind") not in kinds:
        raise ConfigError(f"{name} kind must be one of {kinds}, got {sec.get('kind')!r}")


_FIELDS = {f.name for f in dataclasses.fields(ExperimentConfig)}

_PAULI_SYSTEM = {"kind": "pauli-strings", "n": 10, "m": 2000}
_DAVIES_SYSTEM = {"kind": "tfim", "n": 2, "J": 1.0, "g": 0.6}

DEFAULTS = {
    "scaling-average": dict(T=2.0, M_grid=[8, 16, 32, 64, 128, 256, 512]),
    "scaling-random": dict(T=2.0, M_grid=[16, 32, 64, 128, 256], n_traj=200),
    "gibbs": dict(system=_DAVIES_SYSTEM,
                  ensemble={"kind": "twirled-davies", "n_base": 8, "weight": "metropolis"},
                  tau_grid=[0.1, 0.05], n_traj=400, initial_state="basis0"),
    "davies-verify": dict(system=_DAVIES_SYSTEM,
                          ensemble={"kind": "random-davies", "weight": "metropolis"},
                          S_grid=[100, 300, 1000, 3000, 10000], repetitions=10),
    "gap-cert": dict(system=_PAULI_SYSTEM, beta_grid=[1.0, 2.0, 4.0]),
    "spectrum": dict(system=_PAULI_SYSTEM, beta=4.0),
    "step-order": dict(tau_grid=[2.0**-k for k in range(3, 10)], algs=["trotter", "dilation"]),
}

DEFAULT_TOLERANCES = {
    "scaling-average": {"slope": -1.0, "slope_tol": 0.15, "r2_min": 0.98},
    "scaling-random": {"slope": -1.0, "slope_tol": 0.2},
    "gibbs": {"rate_factor": 2.0, "random_ratio": 2.0, "random_ratio_tol": 0.6,
              "average_ratio": 4.0, "average_ratio_tol": 1.2},
    "davies-verify": {"slope": -0.5, "slope_tol": 0.15},
    "gap-cert": {"gap_over_alpha_min": 0.5},
    "spectrum": {"ks_max": 0.05, "low_energy_factor": 3.0},
    "step-order": {"slope": 2.0, "slope_tol": 0.2},
}


def default_config(kind, seed=0, **overrides) -> ExperimentConfig:
    if kind not in KINDS:
        raise ConfigError(f"unknown experiment kind {kind!r}")
    data = copy.deepcopy(DEFAULTS[kind])
    data.update(overrides)
    return config_from_dict({"kind": kind, "seed": seed, **data})


def config_from_dict(data) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    extra = set(data) - _FIELDS
    if extra:
        raise ConfigError(f"unknown config keys: {sorted(extra)}")
    if "kind" not in data:
        raise ConfigError("config needs 'kind'")
    base = copy.deepcopy(DEFAULTS.get(data["kind"], {}))
    base.update(data)
    try:
        return ExperimentConfig(**base).validate()
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path, kind=None, seed=None) -> ExperimentConfig:
    """Read a JSON config; ``kind`` and ``seed`` fill in or override the file."""
    data = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
    if kind is not None:
        if data.get("kind", kind) != kind:
            raise ConfigError(f"config kind {data['kind']!r} does not match subcommand {kind!r}")
        data["kind"] = kind
    if seed is not None:
        data["seed"] = seed
    return config_from_dict(data)


def load_tolerances(path=None, kind=None):
    tol = copy.deepcopy(DEFAULT_TOLERANCES)
    if path is not None:
        try:
            user = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read tolerances {path}: {exc}") from exc
        for k, v in user.items():
            if k not in tol or not isinstance(v, dict) or set(v) - set(tol[k]):
                raise ConfigError(f"unknown tolerance entry {k!r}: {v!r}")
            tol[k].update(v)
    return tol[kind] if kind else tol
