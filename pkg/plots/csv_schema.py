"""Shared reader for the study CSV schema consumed by the plot scripts.

The scripts are pure CSV-to-image transforms: they never recompute any
physics, only parse the columns written by the solver CLI.
"""

import csv
import math

EXPECTED_HEADER = [
    "level",
    "h",
    "n_elements",
    "E_h",
    "E_h_pp",
    "E_upper",
    "lambda_h",
    "err_u_L2",
    "err_sigma_L2",
    "err_E",
    "err_lambda",
    "iters",
    "wall_ms",
]

INT_COLUMNS = {"level", "n_elements", "iters"}


class SchemaError(ValueError):
    """The CSV does not carry the expected study columns."""


def read_rows(path, required=()):
    """Parse a study CSV into a list of dicts; empty cells become NaN.

    ``required`` columns must be present AND carry at least one finite value;
    a violation raises SchemaError naming the offending header.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError("empty CSV: missing header row") from None
        missing = [name for name in EXPECTED_HEADER if name not in header]
        if missing:
            raise SchemaError(f"missing columns: {', '.join(missing)}")
        rows = []
        for cells in reader:
            if not cells or not any(cells):
                continue
            row = {}
            for name, cell in zip(header, cells):
                if name in INT_COLUMNS:
                    row[name] = int(cell)
                else:
                    row[name] = float(cell) if cell else math.nan
            rows.append(row)
    if not rows:
        raise SchemaError("CSV has a header but no data rows")
    for name in required:
        if all(math.isnan(row[name]) for row in rows):
            raise SchemaError(f"column {name!r} carries no values")
    rows.sort(key=lambda row: row["level"])
    return rows
