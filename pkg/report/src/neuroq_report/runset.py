"""Loading and validating a directory of per-seed training logs.

The expected layout is the trainer's output contract:

    <root>/<algorithm>/seed<k>/episodes.csv
    <root>/<algorithm>/seed<k>/batches.csv
    <root>/<algorithm>/seed<k>/manifest.json
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

EPISODE_COLUMNS = ("seed", "episode", "return", "length", "outcome")
BATCH_COLUMNS = ("seed", "batch", "mean_return", "total_s", "learner_s",
                 "reasoner_s", "rho", "hamming")


class RunSetError(ValueError):
    """Missing, malformed, or mutually inconsistent log files."""


@dataclass
class Run:
    algorithm: str
    seed: int
    directory: Path
    config: dict

    def _read(self, name, required):
        path = self.directory / name
        if not path.is_file():
            raise RunSetError(f"{path} is missing")
        with open(path) as f:
            reader = csv.DictReader(f)
            missing = set(required) - set(reader.fieldnames or ())
            if missing:
                raise RunSetError(f"{path} lacks columns: {sorted(missing)}")
            rows = []
            for i, row in enumerate(reader, start=2):
                if any(row[c] is None for c in required):
                    raise RunSetError(f"{path} row {i} is malformed")
                rows.append(row)
        return rows

    def episodes(self):
        rows = self._read("episodes.csv", EPISODE_COLUMNS)
        try:
            return [
                (int(r["episode"]), float(r["return"]), int(r["length"]), r["outcome"])
                for r in rows
            ]
        except ValueError as exc:
            raise RunSetError(f"{self.directory}/episodes.csv: {exc}") from None

    def batches(self):
        rows = self._read("batches.csv", BATCH_COLUMNS)
        out = []
        for i, r in enumerate(rows, start=2):
            try:
                out.append({
                    "batch": int(r["batch"]),
                    "mean_return": float(r["mean_return"]),
                    "total_s": float(r["total_s"]),
                    "learner_s": float(r["learner_s"]),
                    "reasoner_s": float(r["reasoner_s"]),
                    "rho": float(r["rho"]) if r["rho"] else None,
                    "hamming": float(r["hamming"]) if r["hamming"] else None,
                })
            except ValueError as exc:
                raise RunSetError(
                    f"{self.directory}/batches.csv row {i}: {exc}"
                ) from None
        return out

    @property
    def batch_size(self) -> int:
        return int(self.config["batch_size"])


@dataclass
class RunSet:
    root: Path
    runs: dict  # algorithm -> {seed: Run}

    def algorithms(self):
        return sorted(self.runs)

    def seeds(self, algorithm):
        return sorted(self.runs[algorithm])

    def run(self, algorithm, seed) -> Run:
        return self.runs[algorithm][seed]


def load_runset(root) -> RunSet:
    root = Path(root)
    runs = {}
    for manifest_path in sorted(root.glob("*/seed*/manifest.json")):
        directory = manifest_path.parent
        algorithm = directory.parent.name
        config = json.loads(manifest_path.read_text())["config"]
        seed = int(config["seed"])
        runs.setdefault(algorithm, {})[seed] = Run(algorithm, seed, directory, config)
    if not runs:
        raise RunSetError(f"no runs found under {root}")
    for algorithm, by_seed in runs.items():
        configs = []
        for seed, run in sorted(by_seed.items()):
            cfg = dict(run.config)
            cfg.pop("seed", None)
            configs.append(cfg)
        if any(c != configs[0] for c in configs[1:]):
            raise RunSetError(
                f"{algorithm}: seeds were trained with differing configurations"
            )
    return RunSet(root, runs)
