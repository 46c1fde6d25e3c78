"""Log-scale SVG charts drawn from the study CSVs."""
from __future__ import annotations

import csv
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .errors import CSVParseError  # noqa: E402

MAX_EIGEN_INDEX = 20

# (file stem, series column, x column, y column, x label, y label)
CHARTS = (
    ("eigenvalues", "source", "index", "lambda", "index i", "eigenvalue"),
    ("energies", "strategy", "n", "energy", "dimension n", "energy"),
    ("distances", "strategy", "m", "distance", "dimension m", "Kolmogorov distance"),
)


def read_table(path, header):
    """Rows of a study CSV as dicts; checks the header and that numeric columns parse."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        first = next(reader, None)
        if first is None:
            raise CSVParseError(path, 1, "missing header")
        if tuple(first) != tuple(header):
            raise CSVParseError(path, 1, f"expected header {','.join(header)}, got {','.join(first)}")
        rows = []
        for row in reader:
            line = reader.line_num
            if len(row) != len(header):
                raise CSVParseError(path, line, f"expected {len(header)} fields, got {len(row)}")
            rec = dict(zip(header, row))
            for key in header[2:]:
                try:
                    rec[key] = float(rec[key])
                except ValueError:
                    raise CSVParseError(path, line, f"{key}={rec[key]!r} is not a number") from None
            rows.append(rec)
    return rows


def median_series(rows, series, x, y, max_x=None):
    """Median of ``y`` over seeds for each (series, x); series keep first-seen order."""
    groups = defaultdict(lambda: defaultdict(list))
    for r in rows:
        if max_x is None or r[x] <= max_x:
            groups[r[series]][r[x]].append(r[y])
    out = {}
    for name, by_x in groups.items():
        xs = np.array(sorted(by_x))
        out[name] = (xs, np.array([np.median(by_x[v]) for v in xs]))
    return out


def render(series: dict, path, xlabel: str, ylabel: str) -> Path:
    with matplotlib.rc_context({"svg.hashsalt": "randbasis", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(7, 4.5))
        ax.set_yscale("log")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        drawn = 0
        for name, (xs, ys) in series.items():
            keep = ys > 0  # log axis
            if keep.any():
                (line,) = ax.plot(xs[keep], ys[keep], marker=".", label=name)
                line.set_gid(f"series-{drawn}")
                drawn += 1
        if drawn:
            ax.legend(fontsize="small")
        else:
            ax.set_xlim(0, 1)
            ax.set_ylim(1e-6, 1)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return Path(path)


def emit_plots(artifact_dir) -> list[Path]:
    """One SVG per CSV present in ``artifact_dir``."""
    from .experiments import DISTANCES_HEADER, EIGENVALUES_HEADER, ENERGIES_HEADER

    headers = {"eigenvalues": EIGENVALUES_HEADER, "energies": ENERGIES_HEADER, "distances": DISTANCES_HEADER}
    artifact_dir = Path(artifact_dir)
    written = []
    for stem, series, x, y, xlabel, ylabel in CHARTS:
        src = artifact_dir / f"{stem}.csv"
        if not src.exists():
            continue
        rows = read_table(src, headers[stem])
        max_x = MAX_EIGEN_INDEX if stem == "eigenvalues" else None
        written.append(render(median_series(rows, series, x, y, max_x), artifact_dir / f"{stem}.svg", xlabel, ylabel))
    return written
