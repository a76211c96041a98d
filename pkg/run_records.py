import csv
import logging
import math
from dataclasses import dataclass, field
from typing import Optional

from utils import ensure_parent_dir, format_number

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunRecord:
    """One evaluation of an average at (index, point) against the known atom weight."""

    method: str
    param: Optional[float]
    index: float
    point: tuple
    value: complex
    truth: complex
    abs_error: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "point", tuple(float(c) for c in self.point))
        object.__setattr__(self, "value", complex(self.value))
        object.__setattr__(self, "truth", complex(self.truth))
        object.__setattr__(self, "abs_error", abs(self.value - self.truth))

    @property
    def has_truth(self) -> bool:
        return not (math.isnan(self.truth.real) or math.isnan(self.truth.imag))

    def row(self) -> list:
        return (
            [self.method, format_number(self.param), format_number(self.index)]
            + [format_number(c) for c in self.point]
            + [
                format_number(self.value.real),
                format_number(self.value.imag),
                format_number(self.truth.real),
                format_number(self.truth.imag),
                format_number(self.abs_error),
            ]
        )


def csv_header(dim: int) -> list:
    return (
        ["method", "param", "index"]
        + [f"x_{j + 1}" for j in range(dim)]
        + ["value_re", "value_im", "truth_re", "truth_im", "abs_error"]
    )


def write_records(records, path, dim: int):
    ensure_parent_dir(path)
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(csv_header(dim))
        for record in records:
            w.writerow(record.row())
    logger.info("wrote %d records to %s", len(records), path)


def read_records(path) -> list:
    records = []
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        for row in reader:
            point = tuple(float(row[k]) for k in reader.fieldnames if k.startswith("x_"))
            records.append(RunRecord(
                row["method"],
                float(row["param"]) if row["param"] else None,
                float(row["index"]),
                point,
                complex(float(row["value_re"]), float(row["value_im"])),
                complex(float(row["truth_re"]), float(row["truth_im"])),
            ))
    return records
