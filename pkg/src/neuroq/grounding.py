"""Maps between game states/actions and ground feature/action atoms."""
from __future__ import annotations

from dataclasses import dataclass

from .gridworld import DELTAS, DIRECTIONS, STOP, GameState, Layout
from .symbolic import Atom, atom

MAX_DIST = 10

_MOVE_TO_ACTION = {atom("move", d): d for d in DIRECTIONS}


@dataclass(frozen=True)
class GroundContext:
    """Base feature atoms of one state: walls plus nearest-object distances."""

    atoms: frozenset

    def __post_init__(self):
        seen = set()
        for a in self.atoms:
            if a.pred == "wall":
                continue
            if len(a.args) != 2:
                raise ValueError(f"unexpected context atom {a.render()}")
            direction, dist = a.args
            if not 0 <= dist <= MAX_DIST:
                raise ValueError(f"distance out of range in {a.render()}")
            key = (a.pred, direction)
            if key in seen:
                raise ValueError(f"more than one {a.pred} atom for direction {direction}")
            seen.add(key)

    def render(self) -> str:
        return "\n".join(a.render() for a in sorted(self.atoms, key=lambda a: a.render()))


def context_from_text(text: str) -> GroundContext:
    from .symbolic import _Parser  # atom grammar shared with the rule parser

    atoms = set()
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        atoms.add(_Parser(line).parse_atom())
    return GroundContext(frozenset(atoms))


def _directions_of(dx: int, dy: int):
    if dx > 0:
        yield "east"
    if dx < 0:
        yield "west"
    if dy > 0:
        yield "north"
    if dy < 0:
        yield "south"


def ground_features(s: GameState, layout: Layout | None = None) -> GroundContext:
    """Feature atoms of a state: adjacent walls and per-direction distances.

    An object at offset (dx, dy) is assigned to every direction of positive
    displacement (up to two); each direction reports the minimum Manhattan
    distance among its objects, saturated at MAX_DIST. Scared ghosts are
    prey rather than threats and emit no ghost atoms.
    """
    layout = layout or s.layout
    ax, ay = s.agent
    atoms = set()
    for d in DIRECTIONS:
        dx, dy = DELTAS[d]
        if layout.is_wall(ax + dx, ay + dy):
            atoms.add(atom("wall", d))
    ghost_cells = [g.pos for g in s.ghosts if g.scared_remaining == 0]
    for pred, objects in (("food", s.food), ("ghost", ghost_cells), ("capsule", s.capsules)):
        nearest = {}
        for ox, oy in objects:
            dx, dy = ox - ax, oy - ay
            dist = abs(dx) + abs(dy)
            if dist == 0:
                continue
            for d in _directions_of(dx, dy):
                if d not in nearest or dist < nearest[d]:
                    nearest[d] = dist
        for d, dist in nearest.items():
            atoms.add(atom(pred, d, min(dist, MAX_DIST)))
    return GroundContext(frozenset(atoms))


def ground_action(a: str) -> Atom:
    if a == STOP:
        raise ValueError("stop has no action atom")
    if a not in DIRECTIONS:
        raise ValueError(f"unknown action {a!r}")
    return atom("move", a)


def inverse_action(move_atom: Atom) -> str:
    try:
        return _MOVE_TO_ACTION[move_atom]
    except KeyError:
        raise ValueError(f"not a ground move atom: {move_atom.render()}") from None
