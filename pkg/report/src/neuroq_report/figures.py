"""Figure rendering; every figure also writes its numbers as CSV."""
from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .analysis import convergence_curve, return_curves  # noqa: E402
from .runset import RunSet  # noqa: E402

ALGO_COLORS = {"neuroq": "tab:blue", "approxq": "tab:orange"}


def plot_returns(runset: RunSet, out_dir) -> Path:
    """Per-batch mean return with an across-seed std band per algorithm."""
    curves = return_curves(runset)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    fig, ax = plt.subplots(figsize=(7, 4.5))
    for algorithm, (mean, std) in sorted(curves.items()):
        batches = range(1, len(mean) + 1)
        color = ALGO_COLORS.get(algorithm)
        ax.plot(batches, mean, label=algorithm, color=color)
        if std is not None:
            ax.fill_between(batches, mean - std, mean + std, alpha=0.25, color=color)
    ax.set_xlabel("batch")
    ax.set_ylabel("mean discounted return")
    ax.legend()
    fig.tight_layout()
    path = out_dir / "returns.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)

    with open(out_dir / "returns_data.csv", "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["algorithm", "batch", "mean_return", "std_return"])
        for algorithm, (mean, std) in sorted(curves.items()):
            for b, m in enumerate(mean, start=1):
                writer.writerow([
                    algorithm, b, repr(float(m)),
                    "" if std is None else repr(float(std[b - 1])),
                ])
    return path


def plot_convergence(runset: RunSet, out_dir) -> Path:
    """Across-seed Hamming distance per batch, truncated once it stays zero."""
    mean, std, cutoff = convergence_curve(runset)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    fig, ax = plt.subplots(figsize=(7, 4.5))
    batches = range(1, len(mean) + 1)
    ax.plot(batches, mean, color="tab:green")
    if std is not None:
        ax.fill_between(batches, mean - std, mean + std, alpha=0.25,
                        color="tab:green")
    ax.set_xlabel("batch")
    ax.set_ylabel("normalized Hamming distance to final rules")
    ax.set_ylim(bottom=0)
    fig.tight_layout()
    path = out_dir / "convergence.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)

    with open(out_dir / "convergence_data.csv", "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["batch", "mean_hamming", "std_hamming"])
        for b, m in enumerate(mean, start=1):
            writer.writerow([
                b, repr(float(m)),
                "" if std is None else repr(float(std[b - 1])),
            ])
    return path
