"""Experiment configuration: TOML ingestion, validation, canonical form.

Config files are TOML with dotted sections. Complex matrices and states
are written as row-major lists of (re, im) pairs; a d×d matrix is d*d
pairs, and the basis matrix's row k is basis vector k. The [fisher]
section (dim_a, dim_b, hamiltonian, initial_b) is only needed by the
fisher subcommand.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, replace

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from .errors import ConfigError, WvaBenchError
from .fisher import JointModel
from .noise import KINDS
from .quantum import (
    CouplingConfig,
    MeterSpec,
    Observable,
    OrthonormalBasis,
    PureState,
)

SWEEP_PARAMS = ("sigma", "x_true", "n_per_trial", "theta")
MODES = ("estimate", "detect", "fisher")

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    """Everything one reproducible run needs."""

    coupling: CouplingConfig
    noise_kind: str
    noise_params: tuple
    n_per_trial: int
    trials: int
    postselect_outcome: int
    seed: int
    mode: str = "estimate"
    sweep_param: str | None = None
    sweep_values: tuple | None = None
    fisher_model: JointModel | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("run.trials", f"must be >= 1, got {self.trials}")
        if self.n_per_trial < 1:
            raise ConfigError("run.n_per_trial", f"must be >= 1, got {self.n_per_trial}")
        d = self.coupling.dim
        if not (1 <= self.postselect_outcome <= d):
            raise ConfigError(
                "run.postselect_outcome",
                f"must lie in [1, {d}], got {self.postselect_outcome}",
            )
        if not (0 <= self.seed <= _MASK64):
            raise ConfigError("run.seed", "must be an unsigned 64-bit integer")
        if self.mode not in MODES:
            raise ConfigError("run.mode", f"unknown mode {self.mode!r}")
        if self.noise_kind not in KINDS:
            raise ConfigError("noise.kind", f"unknown kind {self.noise_kind!r}")
        if self.sweep_param is not None:
            if self.sweep_param not in SWEEP_PARAMS:
                raise ConfigError(
                    "sweep.param",
                    f"must be one of {SWEEP_PARAMS}, got {self.sweep_param!r}",
                )
            if self.sweep_param == "theta" and d != 2:
                raise ConfigError("sweep.param", "theta sweeps need a qubit system")


def _pairs_to_complex(raw, fieldname: str, length: int) -> np.ndarray:
    try:
        arr = np.asarray(raw, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ConfigError(fieldname, f"not a numeric pair list: {exc}") from exc
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ConfigError(fieldname, "expected a list of (re, im) pairs")
    if arr.shape[0] != length:
        raise ConfigError(
            fieldname, f"expected {length} pairs, got {arr.shape[0]}"
        )
    return arr[:, 0] + 1j * arr[:, 1]


def _complex_to_pairs(values: np.ndarray) -> list:
    flat = np.asarray(values, dtype=np.complex128).reshape(-1)
    return [[float(z.real), float(z.imag)] for z in flat]


def _get(table: dict, section: str, key: str, default=None, required: bool = True):
    if section not in table or key not in table[section]:
        if required:
            raise ConfigError(f"{section}.{key}", "missing required key")
        return default
    return table[section][key]


def _build_coupling(table: dict) -> CouplingConfig:
    d = _get(table, "system", "dimension")
    if not isinstance(d, int) or d < 2:
        raise ConfigError("system.dimension", f"must be an integer >= 2, got {d!r}")
    obs_raw = _get(table, "system", "observable")
    state_raw = _get(table, "system", "initial_state")
    basis_raw = _get(table, "system", "basis")
    sigma = _get(table, "meter", "sigma")
    x_true = _get(table, "run", "x_true")
    try:
        observable = Observable(_pairs_to_complex(obs_raw, "system.observable", d * d).reshape(d, d))
    except WvaBenchError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("system.observable", str(exc)) from exc
    try:
        initial = PureState(_pairs_to_complex(state_raw, "system.initial_state", d))
    except WvaBenchError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("system.initial_state", str(exc)) from exc
    try:
        rows = _pairs_to_complex(basis_raw, "system.basis", d * d).reshape(d, d)
        basis = OrthonormalBasis(tuple(PureState(row) for row in rows))
    except WvaBenchError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("system.basis", str(exc)) from exc
    try:
        meter = MeterSpec(float(sigma))
    except WvaBenchError as exc:
        raise ConfigError("meter.sigma", str(exc)) from exc
    try:
        return CouplingConfig(observable, initial, basis, meter, float(x_true))
    except WvaBenchError as exc:
        raise ConfigError("system", str(exc)) from exc


def _build_fisher(table: dict, coupling: CouplingConfig) -> JointModel | None:
    if "fisher" not in table:
        return None
    d_a = _get(table, "fisher", "dim_a")
    d_b = _get(table, "fisher", "dim_b")
    if not isinstance(d_a, int) or not isinstance(d_b, int) or d_a < 2 or d_b < 2:
        raise ConfigError("fisher.dim_a", "dim_a and dim_b must be integers >= 2")
    h_raw = _get(table, "fisher", "hamiltonian")
    phi_raw = _get(table, "fisher", "initial_b")
    dd = d_a * d_b
    try:
        h = _pairs_to_complex(h_raw, "fisher.hamiltonian", dd * dd).reshape(dd, dd)
        phi = PureState(_pairs_to_complex(phi_raw, "fisher.initial_b", d_b))
        return JointModel(
            hamiltonian=h,
            initial_a=coupling.initial_state,
            initial_b=phi,
            basis_a=coupling.basis,
            x=coupling.x_true,
        )
    except WvaBenchError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("fisher", str(exc)) from exc


def load_config(path: str, mode: str = "estimate") -> ExperimentConfig:
    """Parse and validate a TOML config file."""
    try:
        with open(path, "rb") as fh:
            table = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("config", f"invalid TOML: {exc}") from exc
    return config_from_table(table, mode)


def config_from_table(table: dict, mode: str = "estimate") -> ExperimentConfig:
    coupling = _build_coupling(table)
    kind = _get(table, "noise", "kind")
    params = _get(table, "noise", "params")
    try:
        params = tuple(float(p) for p in params)
    except (TypeError, ValueError) as exc:
        raise ConfigError("noise.params", f"must be a list of reals: {exc}") from exc
    n_per_trial = _get(table, "run", "n_per_trial")
    trials = _get(table, "run", "trials")
    postselect = _get(table, "run", "postselect_outcome")
    seed = _get(table, "run", "seed")
    for name, value in (
        ("run.n_per_trial", n_per_trial),
        ("run.trials", trials),
        ("run.postselect_outcome", postselect),
        ("run.seed", seed),
    ):
        if not isinstance(value, int):
            raise ConfigError(name, f"must be an integer, got {value!r}")
    sweep_param = _get(table, "sweep", "param", required=False)
    sweep_values = _get(table, "sweep", "values", required=False)
    if sweep_values is not None:
        try:
            sweep_values = tuple(float(v) for v in sweep_values)
        except (TypeError, ValueError) as exc:
            raise ConfigError("sweep.values", f"must be a list of reals: {exc}") from exc
    if (sweep_param is None) != (sweep_values is None):
        raise ConfigError("sweep", "param and values must be given together")
    return ExperimentConfig(
        coupling=coupling,
        noise_kind=str(kind),
        noise_params=params,
        n_per_trial=n_per_trial,
        trials=trials,
        postselect_outcome=postselect,
        seed=seed,
        mode=mode,
        sweep_param=sweep_param,
        sweep_values=sweep_values,
        fisher_model=_build_fisher(table, coupling),
    )


def config_to_dict(config: ExperimentConfig) -> dict:
    """Canonical plain-data form used for hashing and serialization."""
    c = config.coupling
    out = {
        "system": {
            "dimension": c.dim,
            "observable": _complex_to_pairs(c.observable.matrix),
            "initial_state": _complex_to_pairs(c.initial_state.amplitudes),
            "basis": _complex_to_pairs(c.basis.stack()),
        },
        "meter": {"sigma": c.meter.sigma},
        "noise": {"kind": config.noise_kind, "params": list(config.noise_params)},
        "run": {
            "x_true": c.x_true,
            "n_per_trial": config.n_per_trial,
            "trials": config.trials,
            "postselect_outcome": config.postselect_outcome,
            "seed": config.seed,
            "mode": config.mode,
        },
    }
    if config.sweep_param is not None:
        out["sweep"] = {
            "param": config.sweep_param,
            "values": list(config.sweep_values),
        }
    return out


def config_hash(config: ExperimentConfig) -> str:
    payload = json.dumps(config_to_dict(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode()).hexdigest()


def with_sweep_value(config: ExperimentConfig, param: str, value: float) -> ExperimentConfig:
    """Copy of the config with one swept parameter replaced."""
    c = config.coupling
    if param == "sigma":
        coupling = CouplingConfig(
            c.observable, c.initial_state, c.basis, MeterSpec(float(value)), c.x_true
        )
        return replace(config, coupling=coupling)
    if param == "x_true":
        coupling = CouplingConfig(
            c.observable, c.initial_state, c.basis, c.meter, float(value)
        )
        return replace(config, coupling=coupling)
    if param == "n_per_trial":
        n = int(value)
        if n != value or n < 1:
            raise ConfigError("sweep.values", f"n_per_trial values must be counts, got {value!r}")
        return replace(config, n_per_trial=n)
    if param == "theta":
        if c.dim != 2:
            raise ConfigError("sweep.param", "theta sweeps need a qubit system")
        state = PureState(np.array([math.cos(value), math.sin(value)], dtype=np.complex128))
        coupling = CouplingConfig(c.observable, state, c.basis, c.meter, c.x_true)
        return replace(config, coupling=coupling)
    raise ConfigError("sweep.param", f"unknown sweep parameter {param!r}")
