#!/usr/bin/env python3
"""Energy bounds per level, and gaps to the reference in a log-log panel.

Left panel: discrete energy (blue), post-processed lower bound (red), and
the conforming upper bound per refinement level, with the guaranteed bracket
shaded.  Right panel: |E_ref - E_h| and |E_ref - E_h_pp| against the mesh
size, where E_ref is the conforming upper bound at the finest level; a
series whose gap turns nonpositive is omitted from the log panel entirely.

Usage:  python3 plot_bounds.py IN.csv OUT.png
"""

import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from csv_schema import SchemaError, read_rows

COLOR_EH = "tab:blue"
COLOR_PP = "tab:red"
COLOR_UP = "tab:gray"


def gap_series(rows):
    """Gaps to the finest upper bound; series with nonpositive gaps dropped.

    Returns {column: gaps} for the columns that remain plottable.
    """
    e_ref = rows[-1]["E_upper"]
    out = {}
    for field in ("E_h", "E_h_pp"):
        gaps = np.array([e_ref - row[field] for row in rows])
        if (gaps > 0).all():
            out[field] = gaps
    return out


def render(rows, out_path):
    """Draw the figure; returns the set of series kept in the log panel."""
    levels = [row["level"] for row in rows]
    h = np.array([row["h"] for row in rows])
    e_h = [row["E_h"] for row in rows]
    e_pp = [row["E_h_pp"] for row in rows]
    e_up = [row["E_upper"] for row in rows]

    fig, (left, right) = plt.subplots(1, 2, figsize=(11, 4.5))
    left.fill_between(levels, e_pp, e_up, color=COLOR_UP, alpha=0.2,
                      label="guaranteed bracket")
    left.plot(levels, e_h, "o-", color=COLOR_EH, label="discrete energy")
    left.plot(levels, e_pp, "s-", color=COLOR_PP, label="post-processed lower bound")
    left.plot(levels, e_up, "^-", color=COLOR_UP, label="conforming upper bound")
    left.set_xlabel("refinement level")
    left.set_ylabel("energy")
    left.set_xticks(levels)
    left.grid(True, alpha=0.3)
    left.legend()

    kept = gap_series(rows)
    colors = {"E_h": COLOR_EH, "E_h_pp": COLOR_PP}
    names = {"E_h": "reference gap of the discrete energy",
             "E_h_pp": "reference gap of the lower bound"}
    for field, gaps in kept.items():
        right.loglog(h, gaps, "o-", color=colors[field], label=names[field])
    if kept:
        anchor = next(iter(kept.values()))
        right.loglog(h, anchor[-1] * (h / h[-1]) ** 2, "k:", label="order 2 guide")
    right.set_xlabel("mesh size h")
    right.set_ylabel("gap to the finest upper bound")
    right.grid(True, which="both", alpha=0.3)
    right.legend()

    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return set(kept)


def main(argv=None):
    argv = argv if argv is not None else sys.argv[1:]
    if len(argv) != 2:
        print(__doc__.strip(), file=sys.stderr)
        return 1
    try:
        rows = read_rows(argv[0], required=["E_h", "E_h_pp", "E_upper"])
        kept = render(rows, argv[1])
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    dropped = {"E_h", "E_h_pp"} - kept
    for field in sorted(dropped):
        print(f"{field}: nonpositive gaps, omitted from the log panel")
    print(f"wrote {argv[1]}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
