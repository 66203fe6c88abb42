import json
from pathlib import Path

EPISODE_HEADER = "seed,episode,return,length,outcome"
BATCH_HEADER = "seed,batch,mean_return,total_s,learner_s,reasoner_s,rho,hamming"

BASE_CONFIG = {
    "algorithm": "neuroq",
    "map_path": "small.lay",
    "map_text": "%%%\n%P.%\n%%%",
    "episodes": 6,
    "batch_size": 2,
    "sigma": 2,
    "alpha": 0.2,
    "gamma": 0.8,
    "epsilon": 0.05,
    "seed": 0,
}


def write_run(root, algorithm, seed, episode_returns, batch_rows,
              batch_size=2, config_extra=None):
    """Materialize one synthetic per-seed run directory.

    batch_rows: list of (mean_return, total_s, learner_s, reasoner_s,
    rho or "", hamming or "").
    """
    run_dir = Path(root) / algorithm / f"seed{seed}"
    run_dir.mkdir(parents=True, exist_ok=True)
    config = dict(BASE_CONFIG)
    config.update({"algorithm": algorithm, "seed": seed,
                   "batch_size": batch_size,
                   "episodes": len(episode_returns)})
    config.update(config_extra or {})
    (run_dir / "manifest.json").write_text(
        json.dumps({"version": "0.1.0", "config": config, "map_sha256": "x"})
    )
    ep_lines = [EPISODE_HEADER]
    for i, r in enumerate(episode_returns, start=1):
        ep_lines.append(f"{seed},{i},{r!r},{10},{'lost'}")
    (run_dir / "episodes.csv").write_text("\n".join(ep_lines) + "\n")
    b_lines = [BATCH_HEADER]
    for i, (mean, total, learner, reasoner, rho, hamming) in enumerate(
            batch_rows, start=1):
        b_lines.append(
            f"{seed},{i},{mean!r},{total:.6f},{learner:.6f},{reasoner:.6f},"
            f"{rho},{hamming}"
        )
    (run_dir / "batches.csv").write_text("\n".join(b_lines) + "\n")
    return run_dir
