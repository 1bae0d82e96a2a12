"""Sweep result containers shared by the regression/classification sweeps and the CLI."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .exceptions import EmptyInputError, MalformedRecordError


@dataclass
class SweepRecord:
    """One temperature grid point.

    ``metrics`` holds the fixed, serialized metric names for the experiment
    type; ``extras`` carries diagnostics (Monte Carlo errors and the like)
    that never reach the results CSV.
    """

    temperature: float
    metrics: dict
    seed: int
    extras: dict = field(default_factory=dict)


@dataclass
class SweepResult:
    records: list
    best_temperature: float
    diagnostics: dict = field(default_factory=dict)


def select_best(records, metric: str, minimize: bool = True) -> float:
    """Temperature of the extremal record; ties go to the smaller temperature."""
    if not records:
        raise EmptyInputError("no records to select from")
    if minimize:
        key = lambda r: (r.metrics[metric], r.temperature)
    else:
        key = lambda r: (-r.metrics[metric], r.temperature)
    return min(records, key=key).temperature


def format_cell(value) -> str:
    """Canonical text for one CSV cell: repr for floats (round-trips exactly),
    str for ints and strings."""
    if isinstance(value, bool):
        raise TypeError("booleans have no CSV representation here")
    # np.float64 subclasses float, so coerce before repr (numpy's own repr
    # wraps the digits in the type name)
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    raise TypeError(f"cannot serialize {type(value).__name__} to CSV")


def write_csv(path, header, rows):
    """Write a results table with a fixed byte layout.

    Unix newlines and repr-based float formatting make the output a pure
    function of the values, so identical runs produce identical files.
    """
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_cell(v) for v in row])


def read_csv(path):
    """Read a results table back as (header list, list of string-valued rows)."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        table = list(reader)
    if not table:
        return [], []
    header, rows = table[0], table[1:]
    for row in rows:
        if len(row) != len(header):
            raise MalformedRecordError(
                f"{path}: row with {len(row)} cells under {len(header)}-column header")
    return header, rows
