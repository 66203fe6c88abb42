"""Linear approximate Q-learning over a pluggable state-action feature map."""
from __future__ import annotations

import math

from .gridworld import ACTIONS, DELTAS, STOP, GameState, legal_actions, manhattan, maze_distance

PACMAN_FEATURE_NAMES = ("bias", "ghosts-one-step", "eats-food", "nearest-food-dist")


def pacman_features(s: GameState, a: str) -> tuple:
    """Default features, all in [0, 1] and computed on the successor cell:
    bias, fraction of non-scared ghosts within one step, an eats-food flag,
    and maze distance to the nearest pellet normalized by the board area.
    """
    x, y = s.agent
    if a != STOP:
        dx, dy = DELTAS[a]
        x, y = x + dx, y + dy
    succ = (x, y)
    if s.ghosts:
        close = sum(
            1 for g in s.ghosts
            if g.scared_remaining == 0 and manhattan(g.pos, succ) <= 1
        )
        ghost_frac = close / len(s.ghosts)
    else:
        ghost_frac = 0.0
    eats = 1.0 if succ in s.food else 0.0
    dist = maze_distance(s.layout, succ, s.food)
    area = s.layout.width * s.layout.height
    food_frac = dist / area if dist >= 0 else 0.0
    return (1.0, ghost_frac, eats, food_frac)


class QLearner:
    """Weight vector plus the update rule; one instance per training loop."""

    def __init__(self, alpha: float, gamma: float,
                 feature_fn=pacman_features,
                 feature_names=PACMAN_FEATURE_NAMES,
                 legal_fn=legal_actions):
        if not 0.0 <= alpha <= 1.0 or not 0.0 <= gamma <= 1.0:
            raise ValueError("alpha and gamma must lie in [0, 1]")
        self.alpha = alpha
        self.gamma = gamma
        self.feature_fn = feature_fn
        self.feature_names = tuple(feature_names)
        self.legal_fn = legal_fn
        self.weights = [0.0] * len(self.feature_names)
        self._memo_state = None
        self._memo = {}

    def features(self, s, a) -> tuple:
        # States are immutable step products, so identity-keyed memoization
        # of the most recent state is safe and covers the hot loop.
        if s is not self._memo_state:
            self._memo_state = s
            self._memo = {}
        cached = self._memo.get(a)
        if cached is None:
            cached = self._memo[a] = self.feature_fn(s, a)
        return cached

    def value(self, s, a) -> float:
        feats = self.features(s, a)
        return sum(w * f for w, f in zip(self.weights, feats))

    def max_value(self, s) -> float:
        return max(self.value(s, a) for a in self.legal_fn(s))

    def update(self, s, a, reward, s_next, terminal: bool) -> float:
        """Apply one temporal-difference step; returns the TD error."""
        future = 0.0 if terminal else self.gamma * self.max_value(s_next)
        delta = reward + future - self.value(s, a)
        if not math.isfinite(delta):
            raise RuntimeError(
                f"non-finite TD error {delta!r} at {s!r} action {a!r}; "
                f"weights={self.weights!r}"
            )
        feats = self.features(s, a)
        self.weights = [w + self.alpha * delta * f for w, f in zip(self.weights, feats)]
        return delta

    def greedy_action(self, s):
        """Argmax over legal actions; ties keep the earliest in action order."""
        best_a, best_v = None, -math.inf
        for a in self.legal_fn(s):
            v = self.value(s, a)
            if v > best_v:
                best_a, best_v = a, v
        return best_a

    def snapshot(self) -> str:
        """feature-name value lines, for the per-batch weights file."""
        return "\n".join(
            f"{name} {w!r}" for name, w in zip(self.feature_names, self.weights)
        )


# Canonical action order used for greedy tie-breaking, re-exported for tests.
ACTION_ORDER = ACTIONS
