#!/usr/bin/env python3
"""Plot trace CSVs produced by the gridfreq CLI.

Accepts one or more files from `gridfreq simulate` (columns t, df_<region>...,
dp_import_<region>...) or the two-column/three-column curves written by
`gridfreq coi` and `gridfreq analytic2`. Frequency deviations go in the top
panel; import deviations (when present) in the bottom one.

    tools/plot_trace.py trace.csv [more.csv ...] [-o out.png]
"""

import argparse
import csv
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def read_trace(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, data = rows[0], rows[1:]
    cols = {name: [float(r[i]) for r in data] for i, name in enumerate(header)}
    return cols


def main():
    ap = argparse.ArgumentParser(description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("traces", nargs="+", help="CSV files from simulate/coi/analytic2")
    ap.add_argument("-o", "--out", default="trace.png", help="output image (default trace.png)")
    ap.add_argument("--t-max", type=float, default=None, help="clip the time axis")
    args = ap.parse_args()

    panels = 1
    parsed = []
    for path in args.traces:
        cols = read_trace(path)
        if "t" not in cols:
            sys.exit(f"{path}: no 't' column")
        if any(c.startswith("dp_import_") for c in cols):
            panels = 2
        parsed.append((Path(path).stem, cols))

    fig, axes = plt.subplots(panels, 1, sharex=True, figsize=(9, 3.2 * panels), squeeze=False)
    ax_f, ax_p = axes[0][0], axes[panels - 1][0]

    for stem, cols in parsed:
        t = cols["t"]
        for name, series in cols.items():
            if name == "t":
                continue
            label = f"{stem}:{name}"
            if name.startswith("dp_import_"):
                ax_p.plot(t, series, label=label, linewidth=0.9)
            else:
                ax_f.plot(t, series, label=label, linewidth=0.9)

    ax_f.set_ylabel("frequency deviation (Hz)")
    ax_f.axhline(0.0, color="black", linewidth=0.5)
    ax_f.legend(fontsize=7)
    if panels == 2:
        ax_p.set_ylabel("import deviation (MW)")
        ax_p.axhline(0.0, color="black", linewidth=0.5)
        ax_p.legend(fontsize=7)
    ax_p.set_xlabel("time after the outage (s)")
    if args.t_max is not None:
        ax_p.set_xlim(0, args.t_max)

    fig.tight_layout()
    fig.savefig(args.out, dpi=150)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
