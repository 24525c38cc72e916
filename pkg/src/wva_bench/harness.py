"""Monte Carlo harness: seeded trials, aggregation, CSV/JSONL emission.

Determinism contract: every trial derives its own RNG from (master seed,
trial index) with a stateless 64-bit mix, so results are bit-identical
no matter how trials are scheduled across workers. Aggregation always
runs over records in trial order.
"""

from __future__ import annotations

import csv
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .config import ExperimentConfig, config_hash, with_sweep_value
from .detection import chi2_quantile, lr_statistic
from .errors import ConfigError, IoError, NoPostselectedEvents, WvaBenchError
from .estimators import Dataset, mle, smle, wva
from .noise import build_covariance, sample_noise
from .quantum import JointSampler

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

# Sweep point k reseeds from index 2^32 + k, far above any trial index,
# so point streams never collide with trial streams.
_SWEEP_OFFSET = 1 << 32

CSV_COLUMNS = (
    "sweep_param",
    "sweep_value",
    "estimator",
    "emp_mean",
    "emp_var",
    "analytic_var",
    "emp_mse",
    "mean_d_null",
    "mean_d_alt",
    "reject_rate",
    "mean_n_check",
    "skipped_trials",
    "seed",
)


def derive_trial_seed(master: int, index: int) -> int:
    """Mix (master, index) into an independent 64-bit stream seed."""
    if not (0 <= master <= _MASK64):
        raise ConfigError("run.seed", "must be an unsigned 64-bit integer")
    if index < 0:
        raise ConfigError("run.trials", f"trial index must be >= 0, got {index}")
    z = (master + (index + 1) * _GAMMA) & _MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
    return z ^ (z >> 31)


@dataclass(frozen=True)
class TrialRecord:
    """Scalar outputs of one trial; the dump file holds one per line."""

    index: int
    n_check: int
    x_mle: float
    var_mle: float
    x_smle: float
    var_smle: float
    x_wva: Optional[float]
    var_wva: Optional[float]
    var_wva_exact: Optional[float]
    d_alt: float
    d_null: float
    reject_alt: bool
    reject_null: bool


@dataclass(frozen=True)
class EstimatorStats:
    estimator: str
    emp_mean: Optional[float]
    emp_var: Optional[float]
    mean_analytic_var: Optional[float]
    emp_mse: Optional[float]
    trials_used: int
    skipped: int


@dataclass(frozen=True)
class RunResult:
    """Aggregates of one run (one sweep point, or a standalone run)."""

    config_hash: str
    seed: int
    trials: int
    x_true: float
    n_per_trial: int
    estimators: tuple
    mean_d_null: float
    mean_d_alt: float
    reject_rate_null: float
    reject_rate_alt: float
    mean_n_check: float
    frac_no_check: float
    wall_time: float
    sweep_param: str = ""
    sweep_value: Optional[float] = None

    def estimator_stats(self, tag: str) -> EstimatorStats:
        for s in self.estimators:
            if s.estimator == tag:
                return s
        raise KeyError(tag)

    def to_dict(self) -> dict:
        # wall_time is deliberately left out: byte-identical reruns.
        out = {
            "config_hash": self.config_hash,
            "seed": self.seed,
            "trials": self.trials,
            "x_true": self.x_true,
            "n_per_trial": self.n_per_trial,
            "estimators": {
                s.estimator: {
                    "emp_mean": s.emp_mean,
                    "emp_var": s.emp_var,
                    "mean_analytic_var": s.mean_analytic_var,
                    "emp_mse": s.emp_mse,
                    "trials_used": s.trials_used,
                    "skipped": s.skipped,
                }
                for s in self.estimators
            },
            "detection": {
                "mean_d_null": self.mean_d_null,
                "mean_d_alt": self.mean_d_alt,
                "reject_rate_null": self.reject_rate_null,
                "reject_rate_alt": self.reject_rate_alt,
            },
            "counts": {
                "mean_n_check": self.mean_n_check,
                "frac_no_check": self.frac_no_check,
            },
        }
        if self.sweep_param:
            out["sweep"] = {"param": self.sweep_param, "value": self.sweep_value}
        return out


def _worker_count(requested: Optional[int]) -> int:
    cap = os.environ.get("WVA_BENCH_THREADS")
    cap = int(cap) if cap else None
    if requested is None:
        requested = cap if cap is not None else 1
    if cap is not None:
        requested = min(requested, cap)
    return max(1, int(requested))


def _run_trial(t, seed, sampler, cov, sigma, n, check, ow_check, threshold):
    rng = np.random.default_rng(derive_trial_seed(seed, t))
    try:
        f, q = sampler.sample(n, rng)
        r = q + sample_noise(cov, rng)
        f0, q0 = sampler.sample(n, rng, x=0.0)
        r0 = q0 + sample_noise(cov, rng)
        wv = sampler.weak_values
        data = Dataset(f, r)
        data0 = Dataset(f0, r0)
        ow = wv[f - 1]
        ow0 = wv[f0 - 1]
        rep_m = mle(data, ow, cov, sigma)
        rep_s = smle(data, ow, cov, sigma)
        n_check = int(np.count_nonzero(f == check))
        try:
            rep_w = wva(data, check, ow_check, sigma, cov)
            x_w, var_w, exact_w = (
                rep_w.estimate,
                rep_w.analytic_variance,
                rep_w.exact_variance,
            )
        except NoPostselectedEvents:
            x_w = var_w = exact_w = None
        d_alt = lr_statistic(data, ow, cov, sigma)
        d_null = lr_statistic(data0, ow0, cov, sigma)
    except WvaBenchError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise type(exc)(f"trial {t}: {exc}") from exc
    return TrialRecord(
        index=t,
        n_check=n_check,
        x_mle=rep_m.estimate,
        var_mle=rep_m.analytic_variance,
        x_smle=rep_s.estimate,
        var_smle=rep_s.analytic_variance,
        x_wva=x_w,
        var_wva=var_w,
        var_wva_exact=exact_w,
        d_alt=d_alt,
        d_null=d_null,
        reject_alt=d_alt > threshold,
        reject_null=d_null > threshold,
    )


def aggregate_records(
    records,
    config: ExperimentConfig,
    wall_time: float = 0.0,
    seed: Optional[int] = None,
    sweep_param: str = "",
    sweep_value: Optional[float] = None,
) -> RunResult:
    """Fold trial records into a RunResult. Order-sensitive by design:
    callers must pass records in trial order."""
    records = list(records)
    trials = len(records)
    x_true = config.coupling.x_true

    def stats(tag, pairs):
        xs = [p[0] for p in pairs]
        vs = [p[1] for p in pairs]
        used = len(xs)
        if used == 0:
            return EstimatorStats(tag, None, None, None, None, 0, trials)
        xs = np.asarray(xs)
        emp_var = float(np.var(xs, ddof=1)) if used >= 2 else 0.0
        return EstimatorStats(
            estimator=tag,
            emp_mean=float(np.mean(xs)),
            emp_var=emp_var,
            mean_analytic_var=float(np.mean(vs)),
            emp_mse=float(np.mean((xs - x_true) ** 2)),
            trials_used=used,
            skipped=trials - used,
        )

    est = (
        stats("mle", [(r.x_mle, r.var_mle) for r in records]),
        stats("smle", [(r.x_smle, r.var_smle) for r in records]),
        stats("wva", [(r.x_wva, r.var_wva) for r in records if r.x_wva is not None]),
    )
    n_checks = np.asarray([r.n_check for r in records])
    return RunResult(
        config_hash=config_hash(config),
        seed=config.seed if seed is None else seed,
        trials=trials,
        x_true=x_true,
        n_per_trial=config.n_per_trial,
        estimators=est,
        mean_d_null=float(np.mean([r.d_null for r in records])),
        mean_d_alt=float(np.mean([r.d_alt for r in records])),
        reject_rate_null=float(np.mean([r.reject_null for r in records])),
        reject_rate_alt=float(np.mean([r.reject_alt for r in records])),
        mean_n_check=float(np.mean(n_checks)),
        frac_no_check=float(np.mean(n_checks == 0)),
        wall_time=wall_time,
        sweep_param=sweep_param,
        sweep_value=sweep_value,
    )


def run_experiment(
    config: ExperimentConfig,
    workers: Optional[int] = None,
    dump_path: Optional[str] = None,
    seed: Optional[int] = None,
    sweep_param: str = "",
    sweep_value: Optional[float] = None,
) -> RunResult:
    """Run config.trials independent trials and aggregate.

    Each trial draws one alternative dataset (x = x_true) and one null
    dataset (x = 0) from the same per-trial stream, runs all three
    estimators on the alternative data (a trial with no post-selected
    events is skipped for the averaged estimator and counted), and the
    detection statistic on both datasets.
    """
    start = time.perf_counter()
    run_seed = config.seed if seed is None else seed
    sampler = JointSampler(config.coupling)
    sigma = config.coupling.meter.sigma
    n = config.n_per_trial
    try:
        cov = build_covariance(config.noise_kind, config.noise_params, n)
    except WvaBenchError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("noise.params", str(exc)) from exc
    check = config.postselect_outcome
    ow_check = float(sampler.weak_values[check - 1])
    if ow_check == 0.0:
        raise ConfigError(
            "run.postselect_outcome",
            f"outcome {check} carries a zero weak value; nothing to average",
        )
    # Prime lazily cached factorizations before any thread touches them.
    cov.factor()
    cov.shifted_cholesky(sigma)
    threshold = chi2_quantile(1, 0.05)

    args = (run_seed, sampler, cov, sigma, n, check, ow_check, threshold)
    records: list = [None] * config.trials
    n_workers = _worker_count(workers)
    if n_workers == 1 or config.trials == 1:
        for t in range(config.trials):
            records[t] = _run_trial(t, *args)
    else:
        def fill(t):
            records[t] = _run_trial(t, *args)

        chunk = max(1, config.trials // (n_workers * 8))
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            list(pool.map(fill, range(config.trials), chunksize=chunk))

    if dump_path is not None:
        dump_trials(records, dump_path, sweep_index=None)
    elapsed = time.perf_counter() - start
    return aggregate_records(
        records, config, elapsed, run_seed, sweep_param, sweep_value
    )


def sweep(
    config: ExperimentConfig,
    workers: Optional[int] = None,
    dump_path: Optional[str] = None,
):
    """Run the configured sweep; one RunResult per value, in list order.

    Every point re-derives its own master seed from the config seed and
    the point index, so points never share trial streams.
    """
    if config.sweep_param is None or config.sweep_values is None:
        raise ConfigError("sweep.param", "sweep requested but no sweep section given")
    if len(config.sweep_values) == 0:
        raise ConfigError("sweep.values", "must list at least one value")
    results = []
    for k, value in enumerate(config.sweep_values):
        point = with_sweep_value(config, config.sweep_param, value)
        point_seed = derive_trial_seed(config.seed, _SWEEP_OFFSET + k)
        point_dump = f"{dump_path}.point{k}" if dump_path is not None else None
        results.append(
            run_experiment(
                point,
                workers=workers,
                dump_path=point_dump,
                seed=point_seed,
                sweep_param=config.sweep_param,
                sweep_value=float(value),
            )
        )
    return results


def dump_trials(records, path: str, sweep_index: Optional[int] = None) -> None:
    """Write one JSON object per trial. repr round-trips every float."""
    try:
        with open(path, "w", newline="\n") as fh:
            for r in records:
                row = asdict(r)
                if sweep_index is not None:
                    row["sweep_index"] = sweep_index
                fh.write(json.dumps(row, sort_keys=True))
                fh.write("\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def load_trial_dump(path: str):
    """Read back a dump file as TrialRecord objects, in file order."""
    records = []
    try:
        with open(path) as fh:
            for line in fh:
                if not line.strip():
                    continue
                row = json.loads(line)
                row.pop("sweep_index", None)
                records.append(TrialRecord(**row))
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    return records


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _csv_rows(result: RunResult):
    sp = result.sweep_param
    sv = _fmt(result.sweep_value) if result.sweep_param else ""
    seed = str(result.seed)
    for s in result.estimators:
        yield [
            sp,
            sv,
            s.estimator,
            _fmt(s.emp_mean),
            _fmt(s.emp_var),
            _fmt(s.mean_analytic_var),
            _fmt(s.emp_mse),
            "",
            "",
            "",
            _fmt(result.mean_n_check) if s.estimator == "wva" else "",
            str(s.skipped),
            seed,
        ]
    yield [
        sp,
        sv,
        "detection",
        "",
        "",
        "",
        "",
        _fmt(result.mean_d_null),
        _fmt(result.mean_d_alt),
        _fmt(result.reject_rate_alt),
        "",
        "",
        seed,
    ]


def emit_results(results, path: str = "-", fmt: str = "csv") -> None:
    """Serialize RunResults to CSV (fixed column set) or JSONL.

    path "-" writes to stdout. The CSV always starts with the header
    row, even for an empty result list.
    """
    if fmt not in ("csv", "jsonl"):
        raise IoError(f"unknown output format {fmt!r}")

    def write(fh):
        if fmt == "csv":
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            for result in results:
                writer.writerows(_csv_rows(result))
        else:
            for result in results:
                fh.write(json.dumps(result.to_dict(), sort_keys=True))
                fh.write("\n")

    if path == "-" or path is None:
        write(sys.stdout)
        return
    try:
        with open(path, "w", newline="") as fh:
            write(fh)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
