"""Command-line entry point: train, replay, dump-ilp, validate-map."""
from __future__ import annotations

import argparse
import json
import shutil
import sys
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from .gridworld import LayoutError, load_layout, render
from .trainer import (
    TrainConfig,
    config_from_manifest,
    read_map,
    run_training,
    write_outputs,
)

USAGE_ERROR, RUNTIME_ERROR = 2, 1


def _parse_seeds(text: str):
    try:
        return [int(s) for s in text.split(",") if s != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad seed list {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="neuroq",
        description="Train a Pac-Man Q-learner, optionally guided by learned rules.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="run training for one or more seeds")
    train.add_argument("--algo", choices=("approxq", "neuroq"), default="neuroq")
    train.add_argument("--map", dest="map_path", help="layout file or bundled name")
    train.add_argument("--episodes", type=int, default=20000)
    train.add_argument("--batch-size", type=int, default=100)
    train.add_argument("--sigma", type=int, default=5)
    train.add_argument("--alpha", type=float, default=0.2)
    train.add_argument("--gamma", type=float, default=0.8)
    train.add_argument("--epsilon", type=float, default=0.05)
    train.add_argument("--rho-min", type=float, default=0.1)
    train.add_argument("--rho-max", type=float, default=0.95)
    train.add_argument("--max-rules", type=int, default=4)
    train.add_argument("--node-budget", type=int, default=200_000)
    train.add_argument("--max-body", type=int, default=2)
    train.add_argument("--scared-ticks", type=int, default=40)
    train.add_argument("--chase-radius", type=int, default=5)
    train.add_argument("--p-g", type=float, default=0.8)
    train.add_argument("--max-steps", type=int, default=1000)
    train.add_argument("--seeds", type=_parse_seeds, default=[0])
    train.add_argument("--jobs", type=int, default=None,
                       help="worker processes (default: one per seed)")
    train.add_argument("--no-ilp-dumps", action="store_true")
    train.add_argument("--from-manifest", help="rerun a logged manifest.json")
    train.add_argument("--out", required=True)
    train.add_argument("--quiet", action="store_true")
    train.set_defaults(func=cmd_train)

    replay = sub.add_parser("replay", help="re-simulate one episode as ASCII frames")
    replay.add_argument("--manifest", required=True)
    replay.add_argument("--episode", type=int, required=True)
    replay.add_argument("--out", help="write frames to a file instead of stdout")
    replay.set_defaults(func=cmd_replay)

    dump = sub.add_parser("dump-ilp", help="extract the ILP task of a logged batch")
    dump.add_argument("--run", required=True, help="a per-seed run directory")
    dump.add_argument("--batch", type=int, required=True)
    dump.add_argument("--out", help="destination file (default: stdout)")
    dump.set_defaults(func=cmd_dump_ilp)

    validate = sub.add_parser("validate-map", help="parse and validate a layout file")
    validate.add_argument("map_path")
    validate.set_defaults(func=cmd_validate_map)
    return parser


def _seed_dir(out: Path, algo: str, seed: int) -> Path:
    return out / algo / f"seed{seed}"


def _run_one(cfg: TrainConfig, run_dir: str):
    log = run_training(cfg)
    write_outputs(log, run_dir)
    won = sum(1 for e in log.episodes if e.outcome == "won")
    return cfg.seed, won, len(log.episodes)


def cmd_train(args) -> int:
    if args.from_manifest:
        manifest = json.loads(Path(args.from_manifest).read_text())
        base = config_from_manifest(manifest)
        seeds = [base.seed]
    else:
        if not args.map_path:
            print("train: --map is required (or --from-manifest)", file=sys.stderr)
            return USAGE_ERROR
        try:
            map_text = read_map(args.map_path)
        except FileNotFoundError as exc:
            print(f"train: {exc}", file=sys.stderr)
            return USAGE_ERROR
        base = TrainConfig(
            algorithm=args.algo,
            map_path=args.map_path,
            map_text=map_text,
            episodes=args.episodes,
            batch_size=args.batch_size,
            sigma=args.sigma,
            alpha=args.alpha,
            gamma=args.gamma,
            epsilon=args.epsilon,
            rho_min=args.rho_min,
            rho_max=args.rho_max,
            max_rules=args.max_rules,
            node_budget=args.node_budget,
            max_body=args.max_body,
            scared_ticks=args.scared_ticks,
            chase_radius=args.chase_radius,
            p_g=args.p_g,
            max_steps=args.max_steps,
            dump_ilp_tasks=not args.no_ilp_dumps,
        )
        seeds = args.seeds
    try:
        base.validate()
        load_layout(base.map_text if base.map_text is not None else read_map(base.map_path))
    except (ValueError, FileNotFoundError) as exc:
        print(f"train: {exc}", file=sys.stderr)
        return USAGE_ERROR

    out = Path(args.out)
    runs = [
        (replace(base, seed=seed), str(_seed_dir(out, base.algorithm, seed)))
        for seed in seeds
    ]
    jobs = args.jobs if args.jobs else len(runs)
    t0 = time.perf_counter()
    try:
        if jobs > 1 and len(runs) > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(_run_one, *zip(*runs)))
        else:
            results = [_run_one(cfg, run_dir) for cfg, run_dir in runs]
    except Exception as exc:  # runtime failure inside a worker
        print(f"train: {exc}", file=sys.stderr)
        return RUNTIME_ERROR
    if not args.quiet:
        for seed, won, total in results:
            print(f"seed {seed}: {total} episodes, {won} won")
        print(f"done in {time.perf_counter() - t0:.1f}s -> {out}")
    return 0


def cmd_replay(args) -> int:
    try:
        manifest = json.loads(Path(args.manifest).read_text())
    except OSError as exc:
        print(f"replay: {exc}", file=sys.stderr)
        return RUNTIME_ERROR
    cfg = config_from_manifest(manifest)
    if not 1 <= args.episode <= cfg.episodes:
        print(f"replay: episode must be in 1..{cfg.episodes}", file=sys.stderr)
        return USAGE_ERROR
    frames = []

    def on_step(episode, state):
        if episode == args.episode:
            frames.append(render(state))

    with warnings.catch_warnings():
        # replay truncates the run at the requested episode on purpose
        warnings.simplefilter("ignore", UserWarning)
        run_training(replace(cfg, episodes=args.episode, dump_ilp_tasks=False),
                     on_step=on_step)
    text = ("\n" + "-" * 20 + "\n").join(frames) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_dump_ilp(args) -> int:
    src = Path(args.run) / f"ilp_task_{args.batch}.txt"
    if not src.is_file():
        print(f"dump-ilp: no ILP task logged for batch {args.batch} in {args.run}",
              file=sys.stderr)
        return RUNTIME_ERROR
    if args.out:
        shutil.copyfile(src, args.out)
    else:
        sys.stdout.write(src.read_text())
    return 0


def cmd_validate_map(args) -> int:
    try:
        layout = load_layout(read_map(args.map_path))
    except FileNotFoundError as exc:
        print(f"validate-map: {exc}", file=sys.stderr)
        return RUNTIME_ERROR
    except LayoutError as exc:
        print(f"validate-map: invalid: {exc}", file=sys.stderr)
        return RUNTIME_ERROR
    print(
        f"{args.map_path}: {layout.width}x{layout.height}, "
        f"{len(layout.food)} food, {len(layout.capsules)} capsules, "
        f"{len(layout.ghost_starts)} ghosts"
    )
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
