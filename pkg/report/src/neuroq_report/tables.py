"""Timing table: per-seed totals and per-batch means, plus averages."""
from __future__ import annotations

import csv
from pathlib import Path

from .analysis import timing_summary
from .runset import RunSet


def timing_table(runset: RunSet, out_dir) -> Path:
    """Write timing.csv and an aligned timing.txt; returns the CSV path."""
    summary = timing_summary(runset)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    algorithms = sorted(summary)
    seeds = sorted(k for k in summary[algorithms[0]] if k != "average")

    csv_path = out_dir / "timing.csv"
    with open(csv_path, "w", newline="") as f:
        writer = csv.writer(f)
        header = ["seed"]
        for algorithm in algorithms:
            header += [f"{algorithm}_total_s", f"{algorithm}_per_batch_s",
                       f"{algorithm}_per_batch_std"]
        writer.writerow(header)
        for seed in seeds:
            row = [seed]
            for algorithm in algorithms:
                total, mean, std = summary[algorithm][seed]
                row += [f"{total:.2f}", f"{mean:.2f}", f"{std:.2f}"]
            writer.writerow(row)
        avg_row = ["average"]
        for algorithm in algorithms:
            avg_total, _, avg_batch, pooled_std = summary[algorithm]["average"]
            avg_row += [f"{avg_total:.2f}", f"{avg_batch:.2f}", f"{pooled_std:.2f}"]
        writer.writerow(avg_row)

    lines = []
    header = f"{'Seed':<8}"
    for algorithm in algorithms:
        header += f"{algorithm + ' total':>16}{algorithm + ' per batch':>22}"
    lines.append(header)
    for seed in seeds:
        line = f"{seed:<8}"
        for algorithm in algorithms:
            total, mean, std = summary[algorithm][seed]
            line += f"{total:>16.2f}{f'{mean:.2f} (±{std:.2f})':>22}"
        lines.append(line)
    line = f"{'Average':<8}"
    for algorithm in algorithms:
        avg_total, total_std, avg_batch, pooled_std = summary[algorithm]["average"]
        line += (f"{f'{avg_total:.2f} (±{total_std:.2f})':>16}"
                 f"{f'{avg_batch:.2f} (±{pooled_std:.2f})':>22}")
    lines.append(line)
    (out_dir / "timing.txt").write_text("\n".join(lines) + "\n")
    return csv_path
