"""Rectangular result tables with deterministic CSV/JSON emission."""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field
from typing import Any, Sequence

from .errors import DomainError

VERSION = "0.1.0"

REDUCED_COLUMNS = ("s", "t", "route_a", "route_b", "max_abs_diff", "trace_norm_diff")
MEANFIELD_COLUMNS = ("epsilon", "t", "err_g1_tracenorm", "err_g2_scaled", "cumulant_decay", "fitted_slope")


def config_hash(document: bytes) -> str:
    return hashlib.sha256(document).hexdigest()


def _cell(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        # repr is the shortest round-trip decimal
        return repr(value)
    return str(value)


@dataclass
class ResultTable:
    schema: tuple[str, ...]
    rows: list[tuple] = field(default_factory=list)
    metadata: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        self.schema = tuple(self.schema)
        for row in self.rows:
            self._check(row)

    def _check(self, row: Sequence) -> None:
        if len(row) != len(self.schema):
            raise DomainError(f"row of length {len(row)} does not match schema {self.schema}")

    def append(self, *row) -> None:
        self._check(row)
        self.rows.append(tuple(row))

    def column(self, name: str) -> list:
        i = self.schema.index(name)
        return [row[i] for row in self.rows]

    def extend(self, other: ResultTable) -> None:
        if other.schema != self.schema:
            raise DomainError("cannot merge tables with different schemas")
        self.rows.extend(other.rows)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(self.schema)
        for row in self.rows:
            writer.writerow([_cell(v) for v in row])
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {"schema": list(self.schema), "rows": [list(r) for r in self.rows], "metadata": self.metadata}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
