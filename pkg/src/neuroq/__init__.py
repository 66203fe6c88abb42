"""Pac-Man Q-learning with online rule induction guiding exploration."""

__version__ = "0.1.0"

from .gridworld import (  # noqa: F401
    ACTIONS,
    DIRECTIONS,
    GameState,
    GhostState,
    GridConfig,
    Layout,
    LayoutError,
    ghost_policy,
    initial_state,
    legal_actions,
    load_layout,
    render,
    step,
)
from .grounding import GroundContext, ground_action, ground_features, inverse_action  # noqa: F401
from .ilp import (  # noqa: F401
    WCDPI,
    BiasConfig,
    SearchSpace,
    accepted,
    build_wcdpis,
    generate_search_space,
    learn,
    score,
)
from .qlearner import QLearner, pacman_features  # noqa: F401
from .symbolic import (  # noqa: F401
    Atom,
    Hypothesis,
    Literal,
    Rule,
    RuleError,
    atom,
    canonicalize,
    derive_distance_atoms,
    evaluate,
    parse_rule,
)
from .trainer import (  # noqa: F401
    BestEpisodes,
    TrainConfig,
    TrainLog,
    compute_rho,
    discounted_return,
    hamming_convergence,
    run_training,
    select_action,
)
