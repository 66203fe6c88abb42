"""Pac-Man gridworld: ASCII layouts, game state, rewards, and ghost movement.

Coordinates are (x, y) with y increasing northward, so text row 0 of a
layout file is the top of the map. The agent moves first each step, then
every ghost in index order; collisions are checked after each move.
"""
from __future__ import annotations

import random
import weakref
from dataclasses import dataclass

NORTH, SOUTH, EAST, WEST, STOP = "north", "south", "east", "west", "stop"
ACTIONS = (NORTH, SOUTH, EAST, WEST, STOP)
DIRECTIONS = (NORTH, SOUTH, EAST, WEST)
DELTAS = {NORTH: (0, 1), SOUTH: (0, -1), EAST: (1, 0), WEST: (-1, 0)}

RUNNING, WON, LOST = "running", "won", "lost"

FOOD_REWARD = 10.0
CAPSULE_REWARD = 0.0
GHOST_REWARD = 200.0
WIN_REWARD = 500.0
LOSE_PENALTY = -500.0
STEP_PENALTY = -1.0

GLYPHS = {"%": "wall", ".": "food", "o": "capsule", "G": "ghost", "P": "agent", " ": "empty"}


class LayoutError(ValueError):
    """Raised for malformed or invalid layout text."""


@dataclass(frozen=True)
class GridConfig:
    """Environment parameters not fixed by the game rules themselves."""

    scared_ticks: int = 40
    chase_radius: int = 5
    p_g: float = 0.8
    max_steps: int = 1000


DEFAULT_GRID_CONFIG = GridConfig()


@dataclass(frozen=True)
class Layout:
    width: int
    height: int
    walls: frozenset
    food: frozenset
    capsules: frozenset
    ghost_starts: tuple
    agent_start: tuple

    def is_wall(self, x: int, y: int) -> bool:
        # Off-grid cells count as walls.
        if x < 0 or y < 0 or x >= self.width or y >= self.height:
            return True
        return (x, y) in self.walls

    def validate(self) -> None:
        cells = [("agent start", self.agent_start)]
        cells += [("ghost start", p) for p in self.ghost_starts]
        cells += [("food", p) for p in self.food]
        cells += [("capsule", p) for p in self.capsules]
        for label, (x, y) in cells:
            if not (0 <= x < self.width and 0 <= y < self.height):
                raise LayoutError(f"{label} at {(x, y)} is out of bounds")
            if (x, y) in self.walls:
                raise LayoutError(f"{label} at {(x, y)} sits on a wall")
        starts = [self.agent_start, *self.ghost_starts]
        if len(set(starts)) != len(starts):
            raise LayoutError("agent and ghost starts must be distinct cells")
        if not self.food:
            raise LayoutError("no food: a level without pellets is won at t=0")
        reachable = self._reachable_from(self.agent_start)
        open_cells = {
            (x, y)
            for x in range(self.width)
            for y in range(self.height)
            if (x, y) not in self.walls
        }
        unreachable = open_cells - reachable
        if unreachable:
            cell = min(unreachable)
            raise LayoutError(f"unreachable open cell at {cell}: map must be connected")

    def _reachable_from(self, start: tuple) -> set:
        seen = {start}
        frontier = [start]
        while frontier:
            x, y = frontier.pop()
            for dx, dy in DELTAS.values():
                nxt = (x + dx, y + dy)
                if nxt not in seen and not self.is_wall(*nxt):
                    seen.add(nxt)
                    frontier.append(nxt)
        return seen


@dataclass(frozen=True)
class GhostState:
    pos: tuple
    scared_remaining: int = 0


@dataclass(frozen=True)
class GameState:
    layout: Layout
    agent: tuple
    ghosts: tuple
    food: frozenset
    capsules: frozenset
    tick: int = 0
    terminal: str = RUNNING


def load_layout(text: str) -> Layout:
    """Parse ASCII layout text (one glyph per cell, one row per line)."""
    rows = text.split("\n")
    while rows and rows[-1] == "":
        rows.pop()
    if not rows:
        raise LayoutError("empty layout text")
    width = len(rows[0])
    height = len(rows)
    walls, food, capsules, ghost_starts, agents = set(), set(), set(), [], []
    for r, row in enumerate(rows):
        if len(row) != width:
            raise LayoutError(f"line {r + 1}: row width {len(row)} != {width}")
        for c, glyph in enumerate(row):
            if glyph not in GLYPHS:
                raise LayoutError(f"line {r + 1}, column {c + 1}: unknown glyph {glyph!r}")
            pos = (c, height - 1 - r)
            if glyph == "%":
                walls.add(pos)
            elif glyph == ".":
                food.add(pos)
            elif glyph == "o":
                capsules.add(pos)
            elif glyph == "G":
                ghost_starts.append(pos)
            elif glyph == "P":
                agents.append(pos)
    if len(agents) != 1:
        raise LayoutError(f"expected exactly one agent start 'P', found {len(agents)}")
    layout = Layout(
        width=width,
        height=height,
        walls=frozenset(walls),
        food=frozenset(food),
        capsules=frozenset(capsules),
        ghost_starts=tuple(ghost_starts),
        agent_start=agents[0],
    )
    layout.validate()
    return layout


_NEIGHBOR_CACHE = weakref.WeakKeyDictionary()


def open_neighbors(layout: Layout) -> dict:
    """Cell -> tuple of adjacent open cells, cached per layout."""
    cached = _NEIGHBOR_CACHE.get(layout)
    if cached is None:
        cached = {}
        for x in range(layout.width):
            for y in range(layout.height):
                if (x, y) in layout.walls:
                    continue
                cached[(x, y)] = tuple(
                    (x + dx, y + dy)
                    for dx, dy in DELTAS.values()
                    if not layout.is_wall(x + dx, y + dy)
                )
        _NEIGHBOR_CACHE[layout] = cached
    return cached


def initial_state(layout: Layout) -> GameState:
    return GameState(
        layout=layout,
        agent=layout.agent_start,
        ghosts=tuple(GhostState(pos) for pos in layout.ghost_starts),
        food=layout.food,
        capsules=layout.capsules,
    )


def legal_actions(s: GameState) -> tuple:
    """Legal agent actions in canonical order; `stop` is always legal."""
    x, y = s.agent
    moves = tuple(
        d for d in DIRECTIONS
        if not s.layout.is_wall(x + DELTAS[d][0], y + DELTAS[d][1])
    )
    return moves + (STOP,)


def manhattan(a: tuple, b: tuple) -> int:
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


def _ghost_legal_moves(layout: Layout, pos: tuple) -> list:
    x, y = pos
    return [d for d in DIRECTIONS if not layout.is_wall(x + DELTAS[d][0], y + DELTAS[d][1])]


def _ghost_move(layout, pos, scared, agent, p_g, chase_radius, rng) -> str:
    moves = _ghost_legal_moves(layout, pos)
    if not moves:
        return STOP
    if manhattan(pos, agent) <= chase_radius and rng.random() < p_g:
        # Chase (flee while scared): deterministic tie-break by direction order.
        def dist_after(d):
            return manhattan((pos[0] + DELTAS[d][0], pos[1] + DELTAS[d][1]), agent)

        if scared > 0:
            return max(moves, key=dist_after)
        return min(moves, key=dist_after)
    return rng.choice(moves)


def ghost_policy(
    s: GameState,
    ghost_index: int,
    p_g: float,
    rng: random.Random,
    chase_radius: int = DEFAULT_GRID_CONFIG.chase_radius,
) -> str:
    """Pick a move for one ghost: chase/flee when close and the p_g draw succeeds."""
    g = s.ghosts[ghost_index]
    return _ghost_move(s.layout, g.pos, g.scared_remaining, s.agent, p_g, chase_radius, rng)


@dataclass(frozen=True)
class StepEvents:
    """Observable reward events of a single step, for replay bookkeeping."""

    food_eaten: int = 0
    capsules_eaten: int = 0
    ghosts_caught: int = 0
    won: bool = False
    lost: bool = False


def step_events(s, a, rng, cfg: GridConfig = DEFAULT_GRID_CONFIG):
    """Like step() but also returns the StepEvents that produced the reward."""
    if s.terminal != RUNNING:
        raise ValueError(f"cannot step a terminal state ({s.terminal})")
    if a not in legal_actions(s):
        raise ValueError(f"illegal action {a!r} at {s.agent}")

    reward = STEP_PENALTY
    food_eaten = capsules_eaten = ghosts_caught = 0
    terminal = RUNNING

    x, y = s.agent
    if a != STOP:
        dx, dy = DELTAS[a]
        x, y = x + dx, y + dy
    agent = (x, y)

    food = s.food
    if agent in food:
        food = food - {agent}
        reward += FOOD_REWARD
        food_eaten = 1
    capsules = s.capsules
    ghosts = [[g.pos, g.scared_remaining] for g in s.ghosts]
    if agent in capsules:
        capsules = capsules - {agent}
        reward += CAPSULE_REWARD
        capsules_eaten = 1
        for g in ghosts:
            g[1] = cfg.scared_ticks

    respawned = [False] * len(ghosts)

    def collide(i):
        nonlocal reward, terminal, ghosts_caught
        if ghosts[i][1] > 0:
            reward += GHOST_REWARD
            ghosts_caught += 1
            ghosts[i][0] = s.layout.ghost_starts[i]
            ghosts[i][1] = 0
            respawned[i] = True
        else:
            reward += LOSE_PENALTY
            terminal = LOST

    for i, g in enumerate(ghosts):
        if g[0] == agent:
            collide(i)
            if terminal == LOST:
                break

    if terminal == RUNNING and not food:
        reward += WIN_REWARD
        terminal = WON

    if terminal == RUNNING:
        for i, g in enumerate(ghosts):
            if respawned[i]:
                continue
            move = _ghost_move(s.layout, g[0], g[1], agent, cfg.p_g, cfg.chase_radius, rng)
            if move != STOP:
                dx, dy = DELTAS[move]
                g[0] = (g[0][0] + dx, g[0][1] + dy)
            if g[0] == agent:
                collide(i)
                if terminal == LOST:
                    break

    for g in ghosts:
        if g[1] > 0:
            g[1] -= 1

    tick = s.tick + 1
    nxt = GameState(
        layout=s.layout,
        agent=agent,
        ghosts=tuple(GhostState(pos, scared) for pos, scared in ghosts),
        food=food,
        capsules=capsules,
        tick=tick,
        terminal=terminal,
    )
    done = terminal != RUNNING or tick >= cfg.max_steps
    events = StepEvents(
        food_eaten=food_eaten,
        capsules_eaten=capsules_eaten,
        ghosts_caught=ghosts_caught,
        won=terminal == WON,
        lost=terminal == LOST,
    )
    return nxt, reward, done, events


def step(s: GameState, a: str, rng: random.Random, cfg: GridConfig = DEFAULT_GRID_CONFIG):
    """Advance one tick: agent move, reward events, then ghost moves.

    Returns (next_state, reward, done). `done` is set on win/loss and when
    the step horizon is reached (truncation carries no terminal bonus).
    """
    nxt, reward, done, _ = step_events(s, a, rng, cfg)
    return nxt, reward, done


def render(s: GameState) -> str:
    """ASCII dump of a state, for replay and debugging."""
    rows = []
    ghost_cells = {}
    for g in s.ghosts:
        ghost_cells[g.pos] = "g" if g.scared_remaining > 0 else "G"
    for r in range(s.layout.height):
        y = s.layout.height - 1 - r
        row = []
        for x in range(s.layout.width):
            pos = (x, y)
            if pos == s.agent:
                row.append("P")
            elif pos in ghost_cells:
                row.append(ghost_cells[pos])
            elif pos in s.layout.walls:
                row.append("%")
            elif pos in s.food:
                row.append(".")
            elif pos in s.capsules:
                row.append("o")
            else:
                row.append(" ")
        rows.append("".join(row))
    return "\n".join(rows)


def maze_distance(layout: Layout, start: tuple, goals) -> int:
    """BFS distance from start to the nearest goal cell; -1 if unreachable."""
    if not goals:
        return -1
    if start in goals:
        return 0
    neighbors = open_neighbors(layout)
    seen = {start}
    frontier = [start]
    dist = 0
    while frontier:
        dist += 1
        nxt_frontier = []
        for cell in frontier:
            for nxt in neighbors[cell]:
                if nxt in seen:
                    continue
                if nxt in goals:
                    return dist
                seen.add(nxt)
                nxt_frontier.append(nxt)
        frontier = nxt_frontier
    return -1
