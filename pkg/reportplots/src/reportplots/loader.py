"""Typed access to harness result CSV files.

The column set is an exact contract: same names, same order, nothing
extra. Cells are either empty (None) or parse as their column's type.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

from .errors import IoError, SchemaError

COLUMNS = (
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

ESTIMATOR_TAGS = ("mle", "smle", "wva")
DETECTION_TAG = "detection"

_FLOAT_FIELDS = (
    "sweep_value",
    "emp_mean",
    "emp_var",
    "analytic_var",
    "emp_mse",
    "mean_d_null",
    "mean_d_alt",
    "reject_rate",
    "mean_n_check",
)
_INT_FIELDS = ("skipped_trials", "seed")


@dataclass(frozen=True)
class ResultRow:
    """One harness output row; empty cells become None."""

    sweep_param: str
    sweep_value: float | None
    estimator: str
    emp_mean: float | None
    emp_var: float | None
    analytic_var: float | None
    emp_mse: float | None
    mean_d_null: float | None
    mean_d_alt: float | None
    reject_rate: float | None
    mean_n_check: float | None
    skipped_trials: int | None
    seed: int | None

    @property
    def group(self) -> str:
        """Sweep-group key; standalone runs share the 'single' group."""
        return self.sweep_param if self.sweep_param else "single"


def _check_header(header):
    if tuple(header) == COLUMNS:
        return
    seen = set(header)
    for name in COLUMNS:
        if name not in seen:
            raise SchemaError(name, "column missing")
    for name in header:
        if name not in COLUMNS:
            raise SchemaError(name, "unknown column")
    for got, want in zip(header, COLUMNS):
        if got != want:
            raise SchemaError(got, f"out of order, expected {want}")
    # same names, same order, yet unequal: duplicates past the prefix
    raise SchemaError(header[len(COLUMNS)], "duplicate column")


def _parse(name: str, text: str):
    if text == "":
        return None
    caster = int if name in _INT_FIELDS else float
    try:
        return caster(text)
    except ValueError as exc:
        raise SchemaError(name, f"cell {text!r} is not a number") from exc


def load_results(path) -> list[ResultRow]:
    """Read one harness CSV into typed rows.

    A header-only file is an empty, valid result set. Any schema
    deviation raises SchemaError naming the first offending column.
    """
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise SchemaError(COLUMNS[0], "file has no header") from None
            _check_header(header)
            rows = []
            for lineno, record in enumerate(reader, start=2):
                if len(record) != len(COLUMNS):
                    raise SchemaError(
                        COLUMNS[min(len(record), len(COLUMNS) - 1)],
                        f"line {lineno} has {len(record)} fields",
                    )
                cells = dict(zip(COLUMNS, record))
                rows.append(
                    ResultRow(
                        sweep_param=cells["sweep_param"],
                        estimator=cells["estimator"],
                        **{
                            name: _parse(name, cells[name])
                            for name in _FLOAT_FIELDS + _INT_FIELDS
                        },
                    )
                )
            return rows
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
