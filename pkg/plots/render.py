"""Render senselink CSV outputs to figures.

Reads only the documented CSV files; never recomputes anything, so the
figure is a faithful view of the experiment record. Four figure kinds:

- ``dg_vs_power``          total discriminant gain vs communication power
- ``accuracy_vs_power``    end-to-end accuracy vs communication power
- ``accuracy_vs_beta``     accuracy vs power split, argmax rows as markers
- ``closed_form_validation``  closed forms vs their Monte Carlo estimates

Invocation::

    python3 plots/render.py --input sweep.csv --kind dg_vs_power --output fig.png

Values pass through untouched: the plotted coordinates are exactly the
parsed CSV floats.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

KINDS = (
    "dg_vs_power",
    "accuracy_vs_power",
    "accuracy_vs_beta",
    "closed_form_validation",
)

_REQUIRED = {
    "dg_vs_power": {"p_c_db", "criterion", "total_dg_mean"},
    "accuracy_vs_power": {"p_c_db", "criterion", "accuracy", "stderr"},
    "accuracy_vs_beta": {"row", "beta", "criterion", "accuracy", "stderr", "valid"},
    "closed_form_validation": {"kind", "x", "closed_form", "monte_carlo", "valid"},
}

_CRITERION_COLORS = {"DG": "#1f77b4", "MSE": "#d62728"}


@dataclass(frozen=True)
class FigureSpec:
    """One figure: which CSVs, which kind, where the image goes."""

    inputs: tuple[str, ...]
    kind: str
    output: str

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; pick one of {KINDS}")
        if not self.inputs:
            raise ValueError("at least one input CSV is required")


def read_table(path) -> list[dict[str, str]]:
    """Parse one CSV, skipping the provenance comment header.

    Raises ValueError if the file has no data rows.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(r for r in fh if not r.startswith("#")))
    if not rows:
        raise ValueError(f"empty input: {path}")
    return rows


def _check_columns(rows, kind, path):
    missing = _REQUIRED[kind] - set(rows[0])
    if missing:
        raise ValueError(f"{path}: missing columns {sorted(missing)} for {kind}")


def _series_label(base, path, multiple):
    return f"{base} ({Path(path).stem})" if multiple else base


def _criterion_series(rows, x_col, y_col):
    """Split rows into per-criterion (x, y, extra-rows) series, CSV order."""
    out = {}
    for r in rows:
        out.setdefault(r["criterion"], []).append(r)
    for crit in sorted(out):
        group = out[crit]
        x = [float(r[x_col]) for r in group]
        y = [float(r[y_col]) for r in group]
        yield crit, x, y, group


def _plot_sweep(ax, spec, y_col, band):
    multiple = len(spec.inputs) > 1
    for path in spec.inputs:
        rows = read_table(path)
        _check_columns(rows, spec.kind, path)
        for crit, x, y, group in _criterion_series(rows, "p_c_db", y_col):
            color = _CRITERION_COLORS.get(crit)
            ax.plot(x, y, marker="o", markersize=3.5, color=color,
                    label=_series_label(crit, path, multiple))
            if band:
                se = [float(r["stderr"]) for r in group]
                lo = [a - b for a, b in zip(y, se)]
                hi = [a + b for a, b in zip(y, se)]
                ax.fill_between(x, lo, hi, color=color, alpha=0.2, linewidth=0)
    ax.set_xlabel("communication power [dB]")


def _plot_beta(ax, spec):
    multiple = len(spec.inputs) > 1
    for path in spec.inputs:
        rows = read_table(path)
        _check_columns(rows, spec.kind, path)
        data = [r for r in rows if r["row"] == "data" and r["valid"] == "1"]
        marks = [r for r in rows if r["row"] == "argmax" and r["valid"] == "1"]
        if not data:
            raise ValueError(f"{path}: no valid data rows")
        for crit, x, y, group in _criterion_series(data, "beta", "accuracy"):
            color = _CRITERION_COLORS.get(crit)
            ax.plot(x, y, marker="o", markersize=3.5, color=color,
                    label=_series_label(crit, path, multiple))
            se = [float(r["stderr"]) for r in group]
            ax.fill_between(x, [a - b for a, b in zip(y, se)],
                            [a + b for a, b in zip(y, se)],
                            color=color, alpha=0.2, linewidth=0)
        for crit, x, y, _ in _criterion_series(marks, "beta", "accuracy"):
            ax.plot(x, y, linestyle="none", marker="*", markersize=14,
                    markeredgecolor="black", markerfacecolor="none",
                    label=_series_label(f"{crit} argmax", path, multiple))
    ax.set_xlabel("communication fraction of the power budget")
    ax.set_ylabel("classification accuracy")


def _plot_closed_forms(fig, spec):
    groups: dict[str, list[dict[str, str]]] = {}
    for path in spec.inputs:
        rows = read_table(path)
        _check_columns(rows, spec.kind, path)
        for r in rows:
            if r["valid"] == "1":
                groups.setdefault(r["kind"], []).append(r)
    if not groups:
        raise ValueError("no valid rows in input")
    names = sorted(groups)
    axes = fig.subplots(1, len(names), squeeze=False)[0]
    for ax, name in zip(axes, names):
        rows = groups[name]
        x = [float(r["x"]) for r in rows]
        closed = [float(r["closed_form"]) for r in rows]
        mc = [float(r["monte_carlo"]) for r in rows]
        ax.plot(x, closed, color="#1f77b4", label="closed form")
        ax.plot(x, mc, linestyle="none", marker="x", markersize=7,
                color="#d62728", label="Monte Carlo")
        if max(x) / max(min(x), 1e-300) > 1e3:
            ax.set_xscale("log")
        ax.set_title(name)
        ax.grid(True, alpha=0.3)
        ax.legend(frameon=False, fontsize=8)
    axes[0].set_ylabel("value")


def render(spec: FigureSpec):
    """Build the figure for spec, save it to spec.output, return it.

    All inputs are parsed before anything is written: a bad CSV leaves no
    output file behind.
    """
    if spec.kind == "closed_form_validation":
        fig = plt.figure(figsize=(10.5, 3.6), dpi=150)
        _plot_closed_forms(fig, spec)
    else:
        fig = plt.figure(figsize=(7.0, 4.4), dpi=150)
        ax = fig.subplots()
        if spec.kind == "dg_vs_power":
            _plot_sweep(ax, spec, "total_dg_mean", band=False)
            ax.set_ylabel("total discriminant gain (mean over channel draws)")
        elif spec.kind == "accuracy_vs_power":
            _plot_sweep(ax, spec, "accuracy", band=True)
            ax.set_ylabel("classification accuracy")
        else:
            _plot_beta(ax, spec)
        ax.grid(True, alpha=0.3)
        ax.legend(frameon=False)
    fig.suptitle(spec.kind.replace("_", " "), fontsize=11)
    fig.tight_layout()
    fig.savefig(spec.output)
    return fig


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description="render senselink experiment CSVs to figures")
    parser.add_argument("--input", action="append", required=True,
                        help="input CSV; repeat to overlay files")
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--output", required=True, help="image path (png/pdf/svg)")
    args = parser.parse_args(argv)
    spec = FigureSpec(inputs=tuple(args.input), kind=args.kind, output=args.output)
    try:
        fig = render(spec)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    plt.close(fig)
    print(f"wrote {args.output}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
