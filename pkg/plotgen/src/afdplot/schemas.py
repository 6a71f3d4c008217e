"""CSV schemas shared with the planner CLI, and strict readers for them.

The planner's CSV headers are a frozen public contract; this module pins them
verbatim and refuses anything else with an explicit column diff, so a schema
drift on either side fails loudly instead of producing a subtly wrong figure.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Callable, Optional


def _parse_bool(cell: str) -> bool:
    if cell == "true":
        return True
    if cell == "false":
        return False
    raise ValueError(f"expected 'true' or 'false', got {cell!r}")


def _parse_optional_str(cell: str) -> Optional[str]:
    return cell or None


# column order is part of the contract, hence lists rather than sets
COLUMNS: dict[str, list[tuple[str, Callable]]] = {
    "intensity": [
        ("nf", int),
        ("regime", str),
        ("rank_tokens", float),
        ("local_experts", int),
        ("tokens_per_expert", float),
        ("intensity_ub_norm", float),
        ("intensity_actual_norm", float),
    ],
    "hfu": [
        ("model", str),
        ("hardware", str),
        ("nf", int),
        ("hfu", float),
        ("ofu", float),
        ("s_t", float),
        ("binding", str),
        ("feasible", _parse_bool),
        ("reason", _parse_optional_str),
    ],
    "penalty": [
        ("nf", int),
        ("sigma", float),
        ("lambda", float),
        ("alpha_ep", float),
        ("alpha_exact", float),
        ("alpha_floor", float),
        ("alpha_ceil", float),
        ("alpha_afd", float),
    ],
    "timeline": [
        ("resource", str),
        ("mb", int),
        ("layer", int),
        ("start_us", float),
        ("end_us", float),
    ],
}

KINDS = tuple(COLUMNS)


def expected_header(kind: str) -> list[str]:
    return [name for name, _ in COLUMNS[kind]]


class SchemaMismatch(Exception):
    """Input CSV header differs from the published schema for the kind."""

    def __init__(self, kind: str, found: list[str]):
        self.kind = kind
        self.expected = expected_header(kind)
        self.found = found
        missing = [c for c in self.expected if c not in found]
        unexpected = [c for c in found if c not in self.expected]
        if missing or unexpected:
            diff = (f"missing columns: {missing or 'none'}, "
                    f"unexpected columns: {unexpected or 'none'}")
        else:
            diff = "same columns in the wrong order"
        super().__init__(
            f"CSV header does not match the {kind!r} schema: {diff}\n"
            f"  expected: {','.join(self.expected)}\n"
            f"  found:    {','.join(found)}"
        )


def read_table(path: str | Path, kind: str) -> list[dict]:
    """Load one planner CSV, validating the header and typing every cell."""
    if kind not in COLUMNS:
        raise ValueError(f"unknown figure kind {kind!r}; expected one of {KINDS}")
    spec = COLUMNS[kind]
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaMismatch(kind, [])
        if header != expected_header(kind):
            raise SchemaMismatch(kind, header)
        rows = []
        for lineno, cells in enumerate(reader, start=2):
            if not cells:
                continue
            if len(cells) != len(spec):
                raise ValueError(
                    f"{path}:{lineno}: expected {len(spec)} cells, got {len(cells)}")
            row = {}
            for (name, convert), cell in zip(spec, cells):
                try:
                    row[name] = convert(cell)
                except ValueError as exc:
                    raise ValueError(f"{path}:{lineno}: column {name!r}: {exc}")
            rows.append(row)
    return rows
