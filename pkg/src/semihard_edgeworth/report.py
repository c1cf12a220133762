"""Tabulated sweep results and their CSV / JSON serialisation."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field, fields
from typing import Dict, List, Optional

COLUMNS = ("alpha", "n_eff", "leading", "correction", "total", "p_sh",
           "sensitivity", "oracle_value", "abs_error")


def fmt(x: Optional[float]) -> str:
    if x is None:
        return ""
    return "%.17g" % x


@dataclass(frozen=True)
class SweepRow:
    alpha: float
    n_eff: int
    leading: float
    correction: float
    total: float
    p_sh: float
    sensitivity: float
    oracle_value: Optional[float] = None
    abs_error: Optional[float] = None

    def __post_init__(self):
        if (self.oracle_value is None) != (self.abs_error is None):
            raise ValueError("abs_error must be present exactly when oracle_value is")

    def cells(self) -> List[str]:
        return [fmt(self.alpha), str(self.n_eff)] + [
            fmt(getattr(self, name)) for name in COLUMNS[2:]]


@dataclass
class SweepReport:
    rows: List[SweepRow]
    metadata: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        self.rows = sorted(self.rows, key=lambda r: (r.alpha, r.n_eff))
        self.metadata = {str(k): str(v) for k, v in self.metadata.items()}

    def to_csv(self) -> str:
        buf = io.StringIO()
        for key, value in self.metadata.items():
            buf.write(f"# {key}={value}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(COLUMNS)
        for row in self.rows:
            writer.writerow(row.cells())
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "SweepReport":
        metadata: Dict[str, str] = {}
        body = []
        for line in text.splitlines():
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                metadata[key] = value
            elif line.strip():
                body.append(line)
        reader = csv.reader(body)
        header = next(reader)
        if tuple(header) != COLUMNS:
            raise ValueError(f"unexpected header {header}")
        rows = []
        for cells in reader:
            vals = dict(zip(header, cells))
            opt = lambda k: float(vals[k]) if vals[k] != "" else None
            rows.append(SweepRow(
                float(vals["alpha"]), int(vals["n_eff"]), float(vals["leading"]),
                float(vals["correction"]), float(vals["total"]), float(vals["p_sh"]),
                float(vals["sensitivity"]), opt("oracle_value"), opt("abs_error")))
        return cls(rows, metadata)

    def to_dict(self) -> dict:
        return {"metadata": dict(self.metadata),
                "columns": list(COLUMNS),
                "rows": [asdict(r) for r in self.rows]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "SweepReport":
        data = json.loads(text)
        names = {f.name for f in fields(SweepRow)}
        rows = [SweepRow(**{k: v for k, v in r.items() if k in names}) for r in data["rows"]]
        return cls(rows, data.get("metadata", {}))
