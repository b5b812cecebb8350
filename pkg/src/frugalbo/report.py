"""Figure rendering for study output directories.

Reads the trace and summary CSVs a study run wrote and renders overview
figures next to them: regret vs. iteration, regret vs. cumulative cost,
cumulative cost vs. iteration, and reuse-class counts per condition. Purely a
presentation layer; every number comes from the CSVs.
"""

from __future__ import annotations

import re
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .studies import read_summary, read_trace

METHOD_COLORS = {"baseline": "#6a51a3", "cost_aware": "#2f9e44"}
CLASS_COLORS = {"tweak": "#2f9e44", "swap": "#e8860c", "create": "#d7263d"}

_TRACE_RE = re.compile(r"trace_(?P<study>\d+)_(?P<cond>.+)_(?P<method>baseline|cost_aware)_(?P<trial>\d+)\.csv$")


def _load_traces(in_dir: Path):
    runs = defaultdict(list)  # (study, condition, method) -> list of row-lists
    for path in sorted(in_dir.glob("trace_*.csv")):
        m = _TRACE_RE.match(path.name)
        if not m:
            continue
        rows = read_trace(path)
        if rows:
            runs[(m["study"], m["cond"], m["method"])].append(rows)
    return runs


def _regret_series(rows):
    optimum = float(rows[0].get("optimum") or 0.0)
    true_vals = np.array([float(r["true_value"]) for r in rows if r["true_value"] != ""])
    costs = np.array([float(r["cumulative_true_cost"]) for r in rows])
    return np.minimum.accumulate(true_vals) - optimum, costs


def _mean_over_trials(series_list):
    n = max(len(s) for s in series_list)
    stacked = np.full((len(series_list), n), np.nan)
    for i, s in enumerate(series_list):
        stacked[i, : len(s)] = s
        stacked[i, len(s):] = s[-1]  # carry forward after early termination
    return stacked.mean(axis=0)


def render_study_figures(in_dir, out_dir) -> list[Path]:
    in_dir, out_dir = Path(in_dir), Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    runs = _load_traces(in_dir)

    by_study = defaultdict(lambda: defaultdict(dict))
    for (study, cond, method), traces in runs.items():
        by_study[study][cond][method] = traces

    for study, conds in sorted(by_study.items()):
        fig, axes = plt.subplots(1, 3, figsize=(13, 3.6))
        for cond, methods in sorted(conds.items()):
            for method, traces in sorted(methods.items()):
                color = METHOD_COLORS.get(method)
                label = f"{method} [{cond}]" if len(conds) > 1 else method
                regrets, costs = [], []
                for rows in traces:
                    r, c = _regret_series(rows)
                    regrets.append(r)
                    costs.append(c)
                mean_r = _mean_over_trials(regrets)
                mean_c = _mean_over_trials(costs)
                iters = np.arange(1, len(mean_r) + 1)
                style = "-" if method == "cost_aware" else "--"
                axes[0].plot(iters, mean_r, style, color=color, label=label, alpha=0.85)
                axes[1].plot(mean_c, mean_r, style, color=color, label=label, alpha=0.85)
                axes[2].plot(iters, mean_c, style, color=color, label=label, alpha=0.85)
        axes[0].set_xlabel("iteration")
        axes[0].set_ylabel("mean regret")
        axes[0].set_yscale("log")
        axes[1].set_xlabel("mean cumulative cost")
        axes[1].set_ylabel("mean regret")
        axes[1].set_yscale("log")
        axes[2].set_xlabel("iteration")
        axes[2].set_ylabel("mean cumulative cost")
        if len(conds) <= 4:
            axes[0].legend(fontsize=7)
        fig.suptitle(f"study {study}")
        fig.tight_layout()
        path = out_dir / f"study{study}_curves.png"
        fig.savefig(path, dpi=130)
        plt.close(fig)
        written.append(path)

    for summary_path in sorted(in_dir.glob("summary_*.csv")):
        rows = read_summary(summary_path)
        if not rows:
            continue
        study = rows[0]["study"]
        cells = defaultdict(lambda: np.zeros(3))
        trials = defaultdict(int)
        for r in rows:
            key = (r["condition"], r["method"])
            trials[key] += 1
            for i, cls in enumerate(("tweak", "swap", "create")):
                for kind in ("hardware", "software", "other"):
                    cells[key][i] += float(r.get(f"count_{kind}_{cls}") or 0)
        keys = sorted(cells)
        fig, ax = plt.subplots(figsize=(max(6, 0.9 * len(keys)), 3.8))
        x = np.arange(len(keys))
        bottom = np.zeros(len(keys))
        for i, cls in enumerate(("tweak", "swap", "create")):
            vals = np.array([cells[k][i] / trials[k] for k in keys])
            ax.bar(x, vals, bottom=bottom, color=CLASS_COLORS[cls], label=cls, width=0.7)
            bottom += vals
        ax.set_xticks(x)
        ax.set_xticklabels([f"{c}\n{m}" for c, m in keys], fontsize=7)
        ax.set_ylabel("mean class count per trial")
        ax.legend(fontsize=8)
        ax.set_title(f"study {study}: reuse classes")
        fig.tight_layout()
        path = out_dir / f"study{study}_classes.png"
        fig.savefig(path, dpi=130)
        plt.close(fig)
        written.append(path)
    return written
