"""Figure rendering.

Every plotted value is a cell taken verbatim from the input CSV; the
only transforms applied are axis placement and scaling. One image per
requested kind per sweep group, named <kind>_<group>.png, overwritten
in place on re-runs.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .errors import EmptyData, IoError
from .loader import DETECTION_TAG, ESTIMATOR_TAGS, ResultRow, load_results

KINDS = (
    "variance_ordering",
    "snr_curves",
    "detection_power",
    "fi_inequality",
    "chernoff",
)

_COLORS = {"mle": "tab:blue", "smle": "tab:orange", "wva": "tab:green"}
_DPI = 120


@dataclass(frozen=True)
class FigureSpec:
    """What to draw: input file, destination directory, figure kinds."""

    input_csv: str
    output_dir: str
    kinds: tuple = KINDS

    def __post_init__(self):
        requested = tuple(self.kinds)
        unknown = [k for k in requested if k not in KINDS]
        if unknown:
            raise ValueError(f"unknown figure kinds: {', '.join(sorted(unknown))}")
        ordered = tuple(k for k in KINDS if k in requested)
        object.__setattr__(self, "kinds", ordered)


def _axis_positions(rows):
    """Sweep values when the group has them, else row order."""
    values = [r.sweep_value for r in rows]
    if all(v is not None for v in values):
        return values
    return list(range(len(rows)))


def _by_estimator(rows):
    return {
        tag: [r for r in rows if r.estimator == tag]
        for tag in ESTIMATOR_TAGS
        if any(r.estimator == tag for r in rows)
    }


def _log_if_positive(ax, axis, series):
    flat = [v for vs in series for v in vs]
    if flat and all(v > 0 for v in flat):
        getattr(ax, f"set_{axis}scale")("log")


def _select_variance_ordering(rows):
    return [r for r in rows if r.estimator in ESTIMATOR_TAGS and r.emp_mse is not None]


def _draw_variance_ordering(rows, ax, group):
    series = []
    for tag, sub in _by_estimator(rows).items():
        xs = _axis_positions(sub)
        mse = [r.emp_mse for r in sub]
        ax.plot(xs, mse, "o-", color=_COLORS[tag], label=f"{tag} empirical mse")
        series.append(mse)
        var = [r.analytic_var for r in sub]
        if all(v is not None for v in var):
            ax.plot(xs, var, "--", color=_COLORS[tag], label=f"{tag} analytic var")
            series.append(var)
    _log_if_positive(ax, "y", series)
    ax.set_xlabel(group)
    ax.set_ylabel("squared error / variance")
    ax.set_title("estimator error ordering")
    ax.legend(fontsize=8)


def _select_snr_curves(rows):
    return [r for r in rows if r.estimator in ESTIMATOR_TAGS and r.emp_mean is not None]


def _draw_snr_curves(rows, ax, group):
    for tag, sub in _by_estimator(rows).items():
        ax.plot(
            _axis_positions(sub),
            [r.emp_mean for r in sub],
            "o-",
            color=_COLORS[tag],
            label=tag,
        )
    ax.set_xlabel(group)
    ax.set_ylabel("empirical mean estimate")
    ax.set_title("recovered signal level")
    ax.legend(fontsize=8)


def _select_detection_power(rows):
    return [r for r in rows if r.estimator == DETECTION_TAG]


def _draw_detection_power(rows, ax, group):
    xs = _axis_positions(rows)
    ax.plot(xs, [r.reject_rate for r in rows], "o-", color="tab:red", label="reject rate")
    ax.set_xlabel(group)
    ax.set_ylabel("rejection rate")
    ax.set_ylim(-0.05, 1.05)
    twin = ax.twinx()
    twin.plot(xs, [r.mean_d_null for r in rows], "s--", color="tab:gray", label="mean D, null")
    twin.plot(xs, [r.mean_d_alt for r in rows], "^--", color="tab:purple", label="mean D, alt")
    twin.set_ylabel("mean statistic")
    lines = ax.get_lines() + twin.get_lines()
    ax.legend(lines, [ln.get_label() for ln in lines], fontsize=8)
    ax.set_title("detection behaviour")


def _select_fi_inequality(rows):
    """(mle variance, other variance, tag) pairs matched on sweep value."""
    with_var = [
        r for r in rows if r.estimator in ESTIMATOR_TAGS and r.analytic_var is not None
    ]
    mle_at = {r.sweep_value: r for r in with_var if r.estimator == "mle"}
    pairs = []
    for r in with_var:
        if r.estimator != "mle" and r.sweep_value in mle_at:
            pairs.append((mle_at[r.sweep_value].analytic_var, r.analytic_var, r.estimator))
    return pairs


def _draw_fi_inequality(pairs, ax, group):
    for tag in ("smle", "wva"):
        pts = [(x, y) for x, y, t in pairs if t == tag]
        if pts:
            ax.scatter(*zip(*pts), color=_COLORS[tag], label=tag, s=24)
    ax.axline((0.0, 0.0), slope=1.0, color="0.6", linestyle=":", label="equality")
    _log_if_positive(ax, "x", [[x for x, _, _ in pairs]])
    _log_if_positive(ax, "y", [[y for _, y, _ in pairs]])
    ax.set_xlabel("full-weighting analytic variance")
    ax.set_ylabel("alternative analytic variance")
    ax.set_title(f"variance bound, {group} runs")
    ax.legend(fontsize=8)


def _select_chernoff(rows):
    return [r for r in rows if r.mean_n_check is not None]


def _draw_chernoff(rows, ax, group):
    xs = _axis_positions(rows)
    ax.plot(xs, [r.mean_n_check for r in rows], "o-", color="tab:green",
            label="mean kept readings")
    ax.set_xlabel(group)
    ax.set_ylabel("readings per trial")
    twin = ax.twinx()
    twin.plot(xs, [r.skipped_trials for r in rows], "s:", color="tab:brown",
              label="skipped trials")
    twin.set_ylabel("trials without a kept reading")
    lines = ax.get_lines() + twin.get_lines()
    ax.legend(lines, [ln.get_label() for ln in lines], fontsize=8)
    ax.set_title("post-selection yield")


_RENDERERS = {
    "variance_ordering": (_select_variance_ordering, _draw_variance_ordering),
    "snr_curves": (_select_snr_curves, _draw_snr_curves),
    "detection_power": (_select_detection_power, _draw_detection_power),
    "fi_inequality": (_select_fi_inequality, _draw_fi_inequality),
    "chernoff": (_select_chernoff, _draw_chernoff),
}


def _grouped(rows: list[ResultRow]):
    groups: dict[str, list[ResultRow]] = {}
    for row in rows:
        groups.setdefault(row.group, []).append(row)
    return groups


def render_figures(spec: FigureSpec) -> list[str]:
    """Draw every requested kind for every sweep group in the CSV.

    All selections are validated before the first file is written, so a
    failing kind leaves the output directory untouched.
    """
    groups = _grouped(load_results(spec.input_csv))
    if not spec.kinds:
        return []
    if not groups:
        raise EmptyData(f"{spec.kinds[0]}: input has no data rows")

    jobs = []
    for kind in spec.kinds:
        select, draw = _RENDERERS[kind]
        for name, rows in groups.items():
            chosen = select(rows)
            if not chosen:
                raise EmptyData(f"{kind}: no usable rows in group {name!r}")
            jobs.append((kind, name, draw, chosen))

    try:
        os.makedirs(spec.output_dir, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create {spec.output_dir}: {exc}") from exc

    written = []
    for kind, name, draw, chosen in jobs:
        path = os.path.join(str(spec.output_dir), f"{kind}_{name}.png")
        fig, ax = plt.subplots(figsize=(6.0, 4.0), layout="constrained")
        try:
            draw(chosen, ax, name)
            fig.savefig(path, dpi=_DPI)
        except OSError as exc:
            raise IoError(f"cannot write {path}: {exc}") from exc
        finally:
            plt.close(fig)
        written.append(path)
    return written
