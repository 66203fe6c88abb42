import textwrap
from dataclasses import replace

import pytest

from neuroq.gridworld import DELTAS, initial_state, legal_actions, load_layout
from neuroq.trainer import discounted_return, read_map


def make_layout(text: str):
    return load_layout(textwrap.dedent(text).strip("\n"))


@pytest.fixture(scope="session")
def small_layout():
    return load_layout(read_map("small.lay"))


@pytest.fixture(scope="session")
def large_layout():
    return load_layout(read_map("large.lay"))


# Ghost-free snake corridor: from the start every state has exactly one
# adjacent pellet, so a greedy-food walk yields noise-free examples.
SNAKE_MAP = """
%%%%%%%%%
%P......%
%%%%%%%.%
%.......%
%.%%%%%%%
%.......%
%%%%%%%%%
"""


@pytest.fixture(scope="session")
def snake_layout():
    return make_layout(SNAKE_MAP)


def greedy_food_episode(layout, gamma=0.8, max_len=None):
    """Synthetic ghost-free walk that always steps onto an adjacent pellet
    (first legal direction when several qualify), built by direct state
    construction rather than the environment step."""
    s = replace(initial_state(layout), ghosts=())
    trace, rewards = [], []
    while max_len is None or len(trace) < max_len:
        x, y = s.agent
        options = [
            a for a in legal_actions(s)
            if a != "stop" and (x + DELTAS[a][0], y + DELTAS[a][1]) in s.food
        ]
        if not options:
            break
        a = options[0]
        trace.append((s, a))
        nxt = (x + DELTAS[a][0], y + DELTAS[a][1])
        rewards.append(9.0)
        s = replace(s, agent=nxt, food=s.food - {nxt}, tick=s.tick + 1)
    return trace, discounted_return(rewards, gamma)
