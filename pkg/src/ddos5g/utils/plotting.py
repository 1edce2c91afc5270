"""
Charts for run results and dataset summaries.

Every chart is written as SVG with a fixed hash salt and no date metadata,
so identical inputs produce identical bytes. matplotlib is optional
(``pip install ddos5g[plotting]``).
"""

from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple, Union

import numpy as np
import pandas as pd

try:
    import matplotlib
    from matplotlib.figure import Figure

    MATPLOTLIB_AVAILABLE = True
except ImportError:
    MATPLOTLIB_AVAILABLE = False

    # Create a dummy Figure class for type hints when matplotlib is not available
    class Figure:  # type: ignore[no-redef]
        pass


SVG_HASHSALT = "ddos5g"
METRIC_COLORS = {
    "accuracy": "#4C72B0",
    "precision_macro": "#DD8452",
    "recall_macro": "#55A868",
    "f1_macro": "#C44E52",
}
TASK_TITLES = {
    "ddos": "DDoS attack classifier comparison",
    "latency": "5G latency-quality classifier comparison",
}


def check_matplotlib() -> None:
    """Check if matplotlib is available and raise error if not."""
    if not MATPLOTLIB_AVAILABLE:
        raise ImportError(
            "matplotlib is required for plotting. "
            "Install with: pip install ddos5g[plotting]"
        )


def _rc() -> Dict[str, Any]:
    return {"svg.hashsalt": SVG_HASHSALT, "svg.fonttype": "path"}


def save_svg(fig: Figure, path: Union[str, Path]) -> Path:
    """Write ``fig`` as deterministic SVG."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with matplotlib.rc_context(_rc()):
        fig.savefig(path, format="svg", metadata={"Date": None}, bbox_inches="tight")
    return path


def plot_model_comparison(
    plot_data: pd.DataFrame,
    task: str,
    figsize: Tuple[int, int] = (12, 6),
    save_path: Optional[Union[str, Path]] = None,
) -> Figure:
    """
    Grouped bars of every metric for every model on one task.

    Args:
        plot_data: Rows of ``model, task, metric, value``
        task: Task to draw
        figsize: Figure size (width, height)
        save_path: Path to save the chart as SVG (optional)

    Returns:
        matplotlib Figure object
    """
    check_matplotlib()

    rows = plot_data[plot_data["task"] == task]
    if rows.empty:
        raise ValueError(f"No plot data for task {task!r}")
    models = list(dict.fromkeys(rows["model"]))
    metrics = list(dict.fromkeys(rows["metric"]))
    width = 0.8 / len(metrics)
    x = np.arange(len(models))

    with matplotlib.rc_context(_rc()):
        fig = Figure(figsize=figsize)
        ax = fig.add_subplot(1, 1, 1)
        for i, metric in enumerate(metrics):
            values = [
                float(rows[(rows["model"] == m) & (rows["metric"] == metric)]["value"].iloc[0])
                for m in models
            ]
            ax.bar(
                x + (i - (len(metrics) - 1) / 2) * width,
                values,
                width,
                label=metric,
                color=METRIC_COLORS.get(metric),
            )
        ax.set_xticks(x)
        ax.set_xticklabels(models, rotation=30, ha="right")
        ax.set_ylim(0.0, 1.05)
        ax.set_ylabel("Score", fontsize=12)
        ax.set_title(TASK_TITLES.get(task, task), fontsize=14, fontweight="bold")
        ax.legend(loc="lower right")
        ax.grid(True, axis="y", alpha=0.3)
        fig.tight_layout()

    if save_path:
        save_svg(fig, save_path)
    return fig


def plot_class_distribution(
    before: Mapping[str, int],
    after: Optional[Mapping[str, int]] = None,
    figsize: Tuple[int, int] = (12, 6),
    save_path: Optional[Union[str, Path]] = None,
) -> Figure:
    """
    Rows per class, optionally side by side with the counts after oversampling.

    Args:
        before: Label to row count
        after: Label to row count after SMOTE (optional)
        figsize: Figure size (width, height)
        save_path: Path to save the chart as SVG (optional)

    Returns:
        matplotlib Figure object
    """
    check_matplotlib()

    if not before:
        raise ValueError("No class counts to plot")
    labels = sorted(before)
    x = np.arange(len(labels))
    width = 0.4 if after else 0.8

    with matplotlib.rc_context(_rc()):
        fig = Figure(figsize=figsize)
        ax = fig.add_subplot(1, 1, 1)
        offset = -width / 2 if after else 0.0
        ax.bar(x + offset, [before[l] for l in labels], width, label="original", color="#4C72B0")
        if after:
            ax.bar(
                x + width / 2,
                [after.get(l, 0) for l in labels],
                width,
                label="after SMOTE",
                color="#55A868",
            )
        ax.set_xticks(x)
        ax.set_xticklabels(labels, rotation=45, ha="right")
        ax.set_ylabel("Rows", fontsize=12)
        ax.set_title("Class distribution", fontsize=14, fontweight="bold")
        ax.legend()
        ax.grid(True, axis="y", alpha=0.3)
        fig.tight_layout()

    if save_path:
        save_svg(fig, save_path)
    return fig


def plot_latency_counts(
    counts: Mapping[str, int],
    figsize: Tuple[int, int] = (6, 5),
    save_path: Optional[Union[str, Path]] = None,
) -> Figure:
    """
    Bar chart of good/bad latency-label counts.

    Args:
        counts: ``{"bad": n, "good": n}``
        figsize: Figure size (width, height)
        save_path: Path to save the chart as SVG (optional)

    Returns:
        matplotlib Figure object
    """
    check_matplotlib()

    labels = sorted(counts)
    with matplotlib.rc_context(_rc()):
        fig = Figure(figsize=figsize)
        ax = fig.add_subplot(1, 1, 1)
        colors = ["lightcoral" if l == "bad" else "lightgreen" for l in labels]
        ax.bar(labels, [counts[l] for l in labels], color=colors, edgecolor="black")
        ax.set_ylabel("Rows", fontsize=12)
        ax.set_title("5G latency label", fontsize=14, fontweight="bold")
        ax.grid(True, axis="y", alpha=0.3)
        fig.tight_layout()

    if save_path:
        save_svg(fig, save_path)
    return fig
