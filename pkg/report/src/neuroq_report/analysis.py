"""Pure numeric reductions over a RunSet; the figures and tables render
exactly these numbers, so tests pin them here."""
from __future__ import annotations

import numpy as np

from .runset import Run, RunSet, RunSetError


def batch_returns(run: Run) -> list:
    """Per-batch mean return recomputed from episodes.csv."""
    size = run.batch_size
    episodes = run.episodes()
    returns = [r for _, r, _, _ in episodes]
    n_batches = len(returns) // size
    return [
        float(np.mean(returns[b * size:(b + 1) * size])) for b in range(n_batches)
    ]


def aggregate_series(series) -> tuple:
    """Across-seed (mean, std) per index; std is None for a single seed."""
    arr = np.array(series, dtype=float)
    if arr.ndim != 2:
        raise RunSetError("seeds produced differing batch counts")
    mean = arr.mean(axis=0)
    std = arr.std(axis=0, ddof=1) if arr.shape[0] > 1 else None
    return mean, std


def return_curves(runset: RunSet) -> dict:
    """algorithm -> (mean per batch, std per batch or None)."""
    out = {}
    for algorithm in runset.algorithms():
        series = [
            batch_returns(runset.run(algorithm, seed))
            for seed in runset.seeds(algorithm)
        ]
        out[algorithm] = aggregate_series(series)
    return out


def hamming_series(runset: RunSet) -> dict:
    """algorithm -> per-seed hamming lists, only where hypotheses exist."""
    out = {}
    for algorithm in runset.algorithms():
        per_seed = []
        for seed in runset.seeds(algorithm):
            values = [b["hamming"] for b in runset.run(algorithm, seed).batches()]
            if any(v is not None for v in values):
                per_seed.append([float(v) for v in values])
        if per_seed:
            out[algorithm] = per_seed
    return out


def convergence_curve(runset: RunSet) -> tuple:
    """(mean, std, cutoff): across-seed Hamming distance per batch, with the
    curve truncated after the first batch from which the mean stays zero."""
    series = hamming_series(runset)
    if not series:
        raise RunSetError(
            "not applicable: no run in this set learns hypotheses")
    if len(series) > 1:
        raise RunSetError(
            f"ambiguous: multiple algorithms with hypotheses: {sorted(series)}")
    per_seed = next(iter(series.values()))
    mean, std = aggregate_series(per_seed)
    cutoff = len(mean)
    for b in range(len(mean)):
        if all(m == 0.0 for m in mean[b:]):
            cutoff = b + 1  # keep the batch that reaches zero
            break
    return mean[:cutoff], None if std is None else std[:cutoff], cutoff


def timing_summary(runset: RunSet) -> dict:
    """algorithm -> {seed: (total, per-batch mean, per-batch std),
    'average': (mean total, std total, mean per-batch, pooled std)}."""
    out = {}
    for algorithm in runset.algorithms():
        per_seed = {}
        totals, batch_means, pooled = [], [], []
        for seed in runset.seeds(algorithm):
            times = [b["total_s"] for b in runset.run(algorithm, seed).batches()]
            if not times:
                raise RunSetError(f"{algorithm}/seed{seed}: no batch records")
            total = float(np.sum(times))
            per_seed[seed] = (
                total,
                float(np.mean(times)),
                float(np.std(times, ddof=1)) if len(times) > 1 else 0.0,
            )
            totals.append(total)
            batch_means.append(float(np.mean(times)))
            pooled.extend(times)
        per_seed["average"] = (
            float(np.mean(totals)),
            float(np.std(totals, ddof=1)) if len(totals) > 1 else 0.0,
            float(np.mean(batch_means)),
            float(np.std(pooled, ddof=1)) if len(pooled) > 1 else 0.0,
        )
        out[algorithm] = per_seed
    return out
