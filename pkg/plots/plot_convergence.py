#!/usr/bin/env python3
"""Two-panel log-log error plot with reference-slope guides.

Left panel: primal and flux L2 errors against the mesh size with a slope-1
guide line; right panel: energy and eigenvalue errors with a slope-2 guide.
Fitted slopes are annotated per series.

Usage:  python3 plot_convergence.py IN.csv OUT.png
"""

import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from csv_schema import SchemaError, read_rows

PANELS = [
    ("primal and flux", ["err_u_L2", "err_sigma_L2"], 1.0),
    ("energy and eigenvalue", ["err_E", "err_lambda"], 2.0),
]

LABELS = {
    "err_u_L2": "primal L2 error",
    "err_sigma_L2": "flux L2 error",
    "err_E": "energy error",
    "err_lambda": "eigenvalue error",
}


def fitted_slope(h, err):
    """Least-squares slope of log(err) against log(h)."""
    mask = np.isfinite(err) & (np.asarray(err) > 0)
    if mask.sum() < 2:
        raise SchemaError("need at least two positive error values to fit a slope")
    coeffs = np.polyfit(np.log(np.asarray(h)[mask]), np.log(np.asarray(err)[mask]), 1)
    return float(coeffs[0])


def compute_slopes(rows):
    h = np.array([row["h"] for row in rows])
    return {
        field: fitted_slope(h, np.array([row[field] for row in rows]))
        for _, fields, _ in PANELS
        for field in fields
    }


def render(rows, out_path):
    """Draw the figure and return the fitted slopes per error column."""
    h = np.array([row["h"] for row in rows])
    slopes = compute_slopes(rows)

    fig, axes = plt.subplots(1, 2, figsize=(11, 4.5))
    for ax, (title, fields, guide_order) in zip(axes, PANELS):
        for field, marker in zip(fields, ("o", "s")):
            err = np.array([row[field] for row in rows])
            ax.loglog(
                h, err, marker=marker,
                label=f"{LABELS[field]} (slope {slopes[field]:.2f})",
            )
        anchor = np.array([row[fields[0]] for row in rows])
        guide = anchor[-1] * (h / h[-1]) ** guide_order
        ax.loglog(h, guide, "k:", label=f"order {guide_order:g} guide")
        ax.set_xlabel("mesh size h")
        ax.set_ylabel("error")
        ax.set_title(title)
        ax.grid(True, which="both", alpha=0.3)
        ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return slopes


def main(argv=None):
    argv = argv if argv is not None else sys.argv[1:]
    if len(argv) != 2:
        print(__doc__.strip(), file=sys.stderr)
        return 1
    try:
        rows = read_rows(argv[0], required=["err_u_L2", "err_sigma_L2", "err_E", "err_lambda"])
        slopes = render(rows, argv[1])
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for field, slope in slopes.items():
        print(f"{field}: slope {slope:.2f}")
    print(f"wrote {argv[1]}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
