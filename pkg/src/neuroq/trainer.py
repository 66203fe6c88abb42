"""Training loop: batched Q-learning with optional rule-guided exploration.

Two algorithms share one loop. `approxq` is plain epsilon-greedy linear
Q-learning and never touches the symbolic modules. `neuroq` additionally
keeps the best episodes seen so far, relearns a rule hypothesis from them
after the first episode and after every full batch, and softly biases the
exploration draw toward rule-suggested actions.
"""
from __future__ import annotations

import hashlib
import json
import random
import time
import warnings
from collections import Counter
from dataclasses import asdict, dataclass, field

from . import __version__
from .gridworld import (
    GridConfig,
    RUNNING,
    GameState,
    initial_state,
    legal_actions,
    load_layout,
    step,
)
from .grounding import ground_features, inverse_action
from .ilp import BiasConfig, build_wcdpis, generate_search_space, learn, write_ilp_task
from .qlearner import QLearner
from .symbolic import Hypothesis, canonicalize, derive_distance_atoms, evaluate

ALGORITHMS = ("approxq", "neuroq")


@dataclass(frozen=True)
class TrainConfig:
    algorithm: str = "neuroq"
    map_path: str = "small.lay"
    map_text: str | None = None
    episodes: int = 20000
    batch_size: int = 100
    sigma: int = 5
    alpha: float = 0.2
    gamma: float = 0.8
    epsilon: float = 0.05
    rho_min: float = 0.1
    rho_max: float = 0.95
    max_rules: int = 4
    node_budget: int = 200_000
    max_body: int = 2
    scared_ticks: int = 40
    chase_radius: int = 5
    p_g: float = 0.8
    max_steps: int = 1000
    seed: int = 0
    dump_ilp_tasks: bool = True

    def validate(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.episodes < 1 or self.batch_size < 1:
            raise ValueError("episodes and batch_size must be positive")
        if self.sigma < 1:
            raise ValueError("sigma must be at least 1")
        for name in ("epsilon", "rho_min", "rho_max", "p_g", "alpha", "gamma"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.rho_min > self.rho_max:
            raise ValueError("rho_min must not exceed rho_max")
        if self.episodes % self.batch_size:
            warnings.warn(
                f"episodes={self.episodes} is not a multiple of "
                f"batch_size={self.batch_size}; the trailing partial batch "
                "triggers no learning and no batch record",
                stacklevel=2,
            )

    def grid_config(self) -> GridConfig:
        return GridConfig(
            scared_ticks=self.scared_ticks,
            chase_radius=self.chase_radius,
            p_g=self.p_g,
            max_steps=self.max_steps,
        )


def discounted_return(rewards, gamma: float) -> float:
    if not 0.0 <= gamma <= 1.0:
        raise ValueError("gamma must lie in [0, 1]")
    acc = 0.0
    for r in reversed(list(rewards)):
        acc = r + gamma * acc
    return acc


class BestEpisodes:
    """Top-sigma episodes by discounted return, kept across batches.

    An incoming episode replaces the current minimum only when its return
    is strictly greater; ties keep the incumbent.
    """

    def __init__(self, cap: int):
        if cap < 1:
            raise ValueError("cap must be at least 1")
        self.cap = cap
        self.entries = []  # (return, episode_index, trace), sorted descending
        self._members = set()

    def offer(self, episode_index: int, trace, ep_return: float) -> None:
        if episode_index in self._members:
            return
        if len(self.entries) < self.cap:
            self.entries.append((ep_return, episode_index, trace))
            self._members.add(episode_index)
        elif ep_return > self.entries[-1][0]:
            _, evicted, _ = self.entries.pop()
            self._members.discard(evicted)
            self.entries.append((ep_return, episode_index, trace))
            self._members.add(episode_index)
        else:
            return
        self.entries.sort(key=lambda e: (-e[0], e[1]))

    def update(self, batch) -> None:
        for episode_index, trace, ep_return in batch:
            self.offer(episode_index, trace, ep_return)

    def __len__(self):
        return len(self.entries)

    def mean_return(self) -> float:
        return sum(e[0] for e in self.entries) / len(self.entries)

    def episodes(self):
        return [(trace, ret) for ret, _, trace in self.entries]


def compute_rho(best: BestEpisodes, running_mean_return: float,
                rho_min: float = 0.1, rho_max: float = 0.95) -> float:
    """Best-episode mean over the running training mean, clamped.

    A non-positive running mean leaves the ratio meaningless, so the bias
    defaults to its maximum there.
    """
    if not len(best):
        raise ValueError("best-episode buffer is empty")
    if running_mean_return <= 0:
        return rho_max
    return min(rho_max, max(rho_min, best.mean_return() / running_mean_return))


def suggested_actions(h: Hypothesis, s: GameState) -> tuple:
    """Legal actions whose move atoms hold in the hypothesis model."""
    if not h.rules:
        return ()
    ctx = ground_features(s)
    model = evaluate(h, derive_distance_atoms(ctx.atoms))
    moves = {inverse_action(m) for m in model}
    return tuple(a for a in legal_actions(s) if a in moves)


def select_action(q: QLearner, s: GameState, h: Hypothesis, epsilon: float,
                  rho: float, rng: random.Random):
    """Greedy with probability 1 - epsilon; otherwise explore, preferring
    rule-suggested actions with probability rho. When the rules suggest
    nothing (or everything legal) the exploration draw is uniform."""
    if rng.random() >= epsilon:
        return q.greedy_action(s)
    legal = legal_actions(s)
    a_h = suggested_actions(h, s)
    if not a_h or len(a_h) == len(legal):
        return rng.choice(legal)
    if rng.random() < rho:
        return rng.choice(a_h)
    return rng.choice([a for a in legal if a not in a_h])


def epsilon_greedy(q: QLearner, s: GameState, epsilon: float, rng: random.Random):
    if rng.random() >= epsilon:
        return q.greedy_action(s)
    return rng.choice(legal_actions(s))


@dataclass
class EpisodeRecord:
    episode: int
    ep_return: float
    length: int
    outcome: str


@dataclass
class BatchRecord:
    batch: int
    mean_return: float
    total_s: float
    learner_s: float
    reasoner_s: float
    rho: float | None
    hamming: float | None


@dataclass
class TrainLog:
    config: TrainConfig
    episodes: list = field(default_factory=list)
    batches: list = field(default_factory=list)
    hypotheses: list = field(default_factory=list)  # (batch_index, Hypothesis)
    weight_snapshots: list = field(default_factory=list)  # (batch_index, text)
    ilp_tasks: list = field(default_factory=list)  # (batch_index, task text)
    learner_calls: int = 0
    wcdpi_counts: list = field(default_factory=list)

    @property
    def final_hypothesis(self) -> Hypothesis:
        return self.hypotheses[-1][1] if self.hypotheses else Hypothesis(())


def hamming_convergence(h_t: Hypothesis, h_final: Hypothesis) -> float:
    """Symmetric difference of (head, body literal) pair multisets,
    normalized by the final hypothesis's body-literal count."""

    def pairs(h):
        out = Counter()
        for rule in h.rules:
            rule = canonicalize(rule)
            for lit in rule.body:
                out[(rule.head.render(), lit.render())] += 1
        return out

    if not h_final.rules:
        return float(h_t.literal_count)
    p_t, p_f = pairs(h_t), pairs(h_final)
    sym = sum((p_t - p_f).values()) + sum((p_f - p_t).values())
    return sym / sum(p_f.values())


def run_training(cfg: TrainConfig, on_step=None) -> TrainLog:
    """Run the full episode/batch loop and return the in-memory log.

    `on_step(episode, state)` is invoked on the initial state and after
    every transition when given; the replay tool hooks in there.
    """
    cfg.validate()
    map_text = cfg.map_text if cfg.map_text is not None else read_map(cfg.map_path)
    layout = load_layout(map_text)
    grid = cfg.grid_config()
    rng = random.Random(cfg.seed)
    q = QLearner(cfg.alpha, cfg.gamma)
    neuro = cfg.algorithm == "neuroq"
    log = TrainLog(config=cfg)

    space = generate_search_space(BiasConfig(max_body=cfg.max_body)) if neuro else None
    best = BestEpisodes(cfg.sigma) if neuro else None
    hypothesis = Hypothesis(())
    running_sum = 0.0
    batch = []  # (episode_index, trace, return)
    batch_index = 0
    learner_s = reasoner_s = 0.0
    batch_t0 = time.perf_counter()

    def relearn(snapshot_index: int):
        nonlocal hypothesis, learner_s
        t0 = time.perf_counter()
        best.update(batch)
        examples = build_wcdpis(best.episodes())
        hypothesis = learn(
            space, examples, max_rules=cfg.max_rules, node_budget=cfg.node_budget
        )
        learner_s += time.perf_counter() - t0
        log.learner_calls += 1
        log.wcdpi_counts.append(len(examples))
        log.hypotheses.append((snapshot_index, hypothesis))
        if cfg.dump_ilp_tasks:
            log.ilp_tasks.append((snapshot_index, write_ilp_task(space.rules, examples)))

    for episode in range(1, cfg.episodes + 1):
        s = initial_state(layout)
        if on_step is not None:
            on_step(episode, s)
        rewards = []
        trace = [] if neuro else None
        done = False
        while not done:
            if neuro:
                if rng.random() >= cfg.epsilon:
                    a = q.greedy_action(s)
                else:
                    t0 = time.perf_counter()
                    a_h = suggested_actions(hypothesis, s)
                    reasoner_s += time.perf_counter() - t0
                    legal = legal_actions(s)
                    if not a_h or len(a_h) == len(legal):
                        a = rng.choice(legal)
                    else:
                        rho = compute_rho(
                            best,
                            running_sum / (episode - 1) if episode > 1 else 0.0,
                            cfg.rho_min,
                            cfg.rho_max,
                        ) if len(best) else cfg.rho_max
                        if rng.random() < rho:
                            a = rng.choice(a_h)
                        else:
                            a = rng.choice([x for x in legal if x not in a_h])
                trace.append((s, a))
            else:
                a = epsilon_greedy(q, s, cfg.epsilon, rng)
            s_next, r, done = step(s, a, rng, grid)
            q.update(s, a, r, s_next, terminal=s_next.terminal != RUNNING)
            rewards.append(r)
            s = s_next
            if on_step is not None:
                on_step(episode, s)

        ep_return = discounted_return(rewards, cfg.gamma)
        outcome = s.terminal if s.terminal != RUNNING else "truncated"
        log.episodes.append(EpisodeRecord(episode, ep_return, len(rewards), outcome))
        running_sum += ep_return
        batch.append((episode, trace, ep_return))

        if neuro and episode == 1:
            relearn(0)
        if len(batch) == cfg.batch_size:
            batch_index += 1
            if neuro:
                relearn(batch_index)
                rho = compute_rho(
                    best, running_sum / episode, cfg.rho_min, cfg.rho_max
                )
            else:
                rho = None
            total_s = time.perf_counter() - batch_t0
            mean_return = sum(e[2] for e in batch) / len(batch)
            log.batches.append(
                BatchRecord(batch_index, mean_return, total_s, learner_s,
                            reasoner_s, rho, None)
            )
            log.weight_snapshots.append((batch_index, q.snapshot()))
            batch = []
            learner_s = reasoner_s = 0.0
            batch_t0 = time.perf_counter()

    final = log.final_hypothesis
    snapshots = dict(log.hypotheses)
    if neuro:
        for record in log.batches:
            record.hamming = hamming_convergence(snapshots[record.batch], final)
    return log


# --- output files -----------------------------------------------------------

EPISODE_FIELDS = ("seed", "episode", "return", "length", "outcome")
BATCH_FIELDS = ("seed", "batch", "mean_return", "total_s", "learner_s",
                "reasoner_s", "rho", "hamming")


def read_map(map_path: str) -> str:
    """Read a layout file; bare names fall back to the bundled layouts."""
    import importlib.resources as resources
    from pathlib import Path

    p = Path(map_path)
    if p.exists():
        return p.read_text()
    name = map_path if map_path.endswith(".lay") else f"{map_path}.lay"
    bundled = resources.files("neuroq") / "layouts" / name
    if bundled.is_file():
        return bundled.read_text()
    raise FileNotFoundError(f"map not found: {map_path}")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_outputs(log: TrainLog, out_dir) -> None:
    """Write the per-run file contract: manifest first, then CSVs and
    hypothesis/weight/task files."""
    from pathlib import Path

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_manifest(log.config, out)

    cfg = log.config
    with open(out / "episodes.csv", "w") as f:
        f.write(",".join(EPISODE_FIELDS) + "\n")
        for rec in log.episodes:
            f.write(
                f"{cfg.seed},{rec.episode},{_fmt(rec.ep_return)},"
                f"{rec.length},{rec.outcome}\n"
            )
    with open(out / "batches.csv", "w") as f:
        f.write(",".join(BATCH_FIELDS) + "\n")
        for rec in log.batches:
            f.write(
                f"{cfg.seed},{rec.batch},{_fmt(rec.mean_return)},"
                f"{rec.total_s:.6f},{rec.learner_s:.6f},{rec.reasoner_s:.6f},"
                f"{_fmt(rec.rho)},{_fmt(rec.hamming)}\n"
            )
    for batch_idx, hyp in log.hypotheses:
        (out / f"hypothesis_{batch_idx}.lp").write_text(
            hyp.render() + ("\n" if hyp.rules else "")
        )
    for batch_idx, snapshot in log.weight_snapshots:
        (out / f"weights_{batch_idx}.txt").write_text(snapshot + "\n")
    for batch_idx, task in log.ilp_tasks:
        (out / f"ilp_task_{batch_idx}.txt").write_text(task)


def manifest_dict(cfg: TrainConfig) -> dict:
    map_text = cfg.map_text if cfg.map_text is not None else read_map(cfg.map_path)
    return {
        "version": __version__,
        "config": {**asdict(cfg), "map_text": map_text},
        "map_sha256": hashlib.sha256(map_text.encode()).hexdigest(),
    }


def write_manifest(cfg: TrainConfig, out_dir) -> None:
    from pathlib import Path

    path = Path(out_dir) / "manifest.json"
    path.write_text(json.dumps(manifest_dict(cfg), indent=2, sort_keys=True) + "\n")


def config_from_manifest(manifest: dict) -> TrainConfig:
    return TrainConfig(**manifest["config"])
