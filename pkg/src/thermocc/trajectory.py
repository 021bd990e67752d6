"""Shared trajectory record and its CSV serialization."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["COLUMNS", "CSV_TAG", "TrajectoryRecord"]

CSV_TAG = "# thermocc-csv v1"

COLUMNS = (
    "time",
    "n_imp_alpha",
    "n_imp_beta",
    "n_total",
    "polarization",
    "n_electrons",
    "trace_dev",
    "herm_dev",
    "discarded_weight",
)


@dataclass
class TrajectoryRecord:
    """Time series of observables and diagnostics at a fixed stride.

    Inapplicable columns hold None and serialize as empty CSV fields.
    """

    data: dict = field(default_factory=lambda: {c: [] for c in COLUMNS})

    def add(self, time: float, **values):
        if self.data["time"] and time <= self.data["time"][-1]:
            raise ValueError("timestamps must be strictly increasing")
        self.data["time"].append(float(time))
        for col in COLUMNS[1:]:
            v = values.get(col)
            self.data[col].append(None if v is None else float(v))

    @property
    def times(self) -> np.ndarray:
        return np.asarray(self.data["time"])

    def column(self, name: str) -> np.ndarray:
        """Column as a float array; missing entries become NaN."""
        return np.array(
            [np.nan if v is None else v for v in self.data[name]], dtype=float
        )

    def __len__(self):
        return len(self.data["time"])

    def write_csv(self, path):
        with open(path, "w") as fh:
            fh.write(CSV_TAG + "\n")
            fh.write(",".join(COLUMNS) + "\n")
            for i in range(len(self)):
                row = []
                for col in COLUMNS:
                    v = self.data[col][i]
                    row.append("" if v is None else f"{v:.12g}")
                fh.write(",".join(row) + "\n")

    @classmethod
    def read_csv(cls, path) -> "TrajectoryRecord":
        rec = cls()
        with open(path) as fh:
            tag = fh.readline().strip()
            if tag != CSV_TAG:
                raise ValueError(f"{path}: not a thermocc v1 CSV (got {tag!r})")
            header = fh.readline().strip().split(",")
            if tuple(header) != COLUMNS:
                raise ValueError(f"{path}: unexpected column header")
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                fields = line.split(",")
                vals = {
                    c: (None if f == "" else float(f))
                    for c, f in zip(COLUMNS, fields)
                }
                rec.add(vals["time"], **{c: vals[c] for c in COLUMNS[1:]})
        return rec
