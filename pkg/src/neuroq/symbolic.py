"""Ground atoms, normal rules with negation-as-failure, and their evaluation.

The fragment is deliberately small: rule heads are always `move(Dir)`,
bodies are feature atoms, and nothing is recursive, so every program has a
unique stable model that a single evaluation pass computes exactly.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

ARITIES = {
    "wall": 1,
    "food": 2,
    "ghost": 2,
    "capsule": 2,
    "move": 1,
    "d_const": 1,
    "food_dist_geq": 3,
    "food_dist_leq": 3,
    "ghost_dist_geq": 3,
    "ghost_dist_leq": 3,
    "caps_dist_geq": 3,
    "caps_dist_leq": 3,
}

BASE_PREDICATES = ("wall", "food", "ghost", "capsule")
# Derived-atom prefix per base predicate; `capsule` shortens to `caps`.
DIST_PREFIX = {"food": "food", "ghost": "ghost", "capsule": "caps"}
D_VALUES = tuple(range(5))

_CANON_VAR_NAMES = ("Dir", "Dist", "Dist2", "Dist3", "Dist4", "Dist5")


class RuleError(ValueError):
    """Syntax, arity, or safety problem in rule text."""

    def __init__(self, message: str, pos: int | None = None):
        if pos is not None:
            message = f"{message} (at column {pos + 1})"
        super().__init__(message)
        self.pos = pos


@dataclass(frozen=True, order=True)
class Var:
    name: str


def _render_term(t) -> str:
    return t.name if isinstance(t, Var) else str(t)


@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple

    def render(self) -> str:
        return f"{self.pred}({','.join(_render_term(t) for t in self.args)})"

    def is_ground(self) -> bool:
        return not any(isinstance(t, Var) for t in self.args)

    def variables(self) -> set:
        return {t for t in self.args if isinstance(t, Var)}


def atom(pred: str, *args) -> Atom:
    return Atom(pred, tuple(args))


@dataclass(frozen=True)
class Literal:
    atom: Atom
    negated: bool = False

    def render(self) -> str:
        text = self.atom.render()
        return f"not {text}" if self.negated else text


@dataclass(frozen=True)
class Rule:
    head: Atom
    body: tuple

    def __post_init__(self):
        if self.head.pred != "move":
            raise RuleError(f"rule heads must be move/1, got {self.head.pred}")
        if len(self.head.args) != ARITIES["move"]:
            raise RuleError("head move/1 takes exactly one term")
        if not self.body:
            raise RuleError("rule body must contain at least one literal")
        positive_vars = set()
        for lit in self.body:
            if lit.atom.pred == "move":
                raise RuleError("move may not appear in rule bodies")
            if not lit.negated:
                positive_vars |= lit.atom.variables()
        unsafe = self.head.variables() - positive_vars
        for lit in self.body:
            if lit.negated:
                unsafe |= lit.atom.variables() - positive_vars
        if unsafe:
            name = sorted(v.name for v in unsafe)[0]
            raise RuleError(f"unsafe variable {name}: no positive body occurrence")

    @property
    def literal_count(self) -> int:
        return 1 + len(self.body)

    def render(self) -> str:
        body = ", ".join(lit.render() for lit in self.body)
        return f"{self.head.render()} :- {body}."


@dataclass(frozen=True)
class Hypothesis:
    rules: tuple = ()

    def __post_init__(self):
        if len(set(self.rules)) != len(self.rules):
            raise ValueError("duplicate rules in hypothesis")

    @property
    def literal_count(self) -> int:
        return sum(r.literal_count for r in self.rules)

    def render(self) -> str:
        return "\n".join(r.render() for r in self.rules)


EMPTY_HYPOTHESIS = Hypothesis()


def _literal_sort_key(lit: Literal):
    pattern = tuple(
        (1, "") if isinstance(t, Var) else (0, f"{t!r}") for t in lit.atom.args
    )
    return (lit.atom.pred, lit.negated, pattern)


def canonicalize(rule: Rule) -> Rule:
    """Sort body literals and rename variables in first-occurrence order."""
    body = sorted(rule.body, key=_literal_sort_key)
    mapping = {}

    def rename(term):
        if not isinstance(term, Var):
            return term
        if term not in mapping:
            if len(mapping) >= len(_CANON_VAR_NAMES):
                mapping[term] = Var(f"V{len(mapping)}")
            else:
                mapping[term] = Var(_CANON_VAR_NAMES[len(mapping)])
        return mapping[term]

    head = Atom(rule.head.pred, tuple(rename(t) for t in rule.head.args))
    new_body = tuple(
        Literal(Atom(l.atom.pred, tuple(rename(t) for t in l.atom.args)), l.negated)
        for l in body
    )
    return Rule(head, new_body)


_TOKEN_RE = re.compile(r"\s*(:-|[(),.]|not\b|[A-Za-z_][A-Za-z0-9_]*|\d+)")


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or not m.group(1):
            if text[pos:].strip():
                raise RuleError(f"unexpected character {text[pos]!r}", pos)
            break
        tokens.append((m.group(1), m.start(1)))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, len(self.text))

    def take(self, expected=None):
        tok, pos = self.peek()
        if tok is None:
            raise RuleError(f"unexpected end of rule, expected {expected}", pos)
        if expected is not None and tok != expected:
            raise RuleError(f"expected {expected!r}, got {tok!r}", pos)
        self.i += 1
        return tok, pos

    def parse_atom(self) -> Atom:
        name, pos = self.take()
        if not re.fullmatch(r"[a-z][A-Za-z0-9_]*", name or ""):
            raise RuleError(f"expected predicate name, got {name!r}", pos)
        if name not in ARITIES:
            raise RuleError(f"unknown predicate {name!r}", pos)
        self.take("(")
        args = [self.parse_term()]
        while self.peek()[0] == ",":
            self.take(",")
            args.append(self.parse_term())
        self.take(")")
        if len(args) != ARITIES[name]:
            raise RuleError(
                f"{name}/{ARITIES[name]} takes {ARITIES[name]} terms, got {len(args)}", pos
            )
        return Atom(name, tuple(args))

    def parse_term(self):
        tok, pos = self.take()
        if tok.isdigit():
            return int(tok)
        if re.fullmatch(r"[A-Z][A-Za-z0-9_]*", tok):
            return Var(tok)
        if re.fullmatch(r"[a-z][A-Za-z0-9_]*", tok):
            return tok
        raise RuleError(f"expected term, got {tok!r}", pos)

    def parse_rule(self) -> Rule:
        head = self.parse_atom()
        self.take(":-")
        body = [self.parse_literal()]
        while self.peek()[0] == ",":
            self.take(",")
            body.append(self.parse_literal())
        self.take(".")
        tok, pos = self.peek()
        if tok is not None:
            raise RuleError(f"trailing input {tok!r}", pos)
        return Rule(head, tuple(body))

    def parse_literal(self) -> Literal:
        negated = False
        if self.peek()[0] == "not":
            self.take("not")
            negated = True
        return Literal(self.parse_atom(), negated)


def parse_rule(text: str) -> Rule:
    """Parse `move(V) :- lit {, lit}*.` into a canonical Rule."""
    return canonicalize(_Parser(text).parse_rule())


def derive_distance_atoms(ctx) -> frozenset:
    """Close a base-atom context under the distance-bound derivation rules.

    Every `X(Dir, Dist)` base atom licenses `X_dist_geq(Dir, Dist, D)` for
    each D <= Dist and `X_dist_leq(Dir, Dist, D)` for each D >= Dist, with
    D drawn from the fixed constant pool 0..4.
    """
    out = set(ctx)
    for a in ctx:
        prefix = DIST_PREFIX.get(a.pred)
        if prefix is None:
            continue
        direction, dist = a.args
        for d in D_VALUES:
            if dist >= d:
                out.add(Atom(f"{prefix}_dist_geq", (direction, dist, d)))
            if dist <= d:
                out.add(Atom(f"{prefix}_dist_leq", (direction, dist, d)))
    return frozenset(out)


def _match(atom_schema: Atom, ground: Atom, subst: dict):
    """Extend subst so atom_schema matches ground, or return None."""
    if atom_schema.pred != ground.pred or len(atom_schema.args) != len(ground.args):
        return None
    out = subst
    for t, g in zip(atom_schema.args, ground.args):
        if isinstance(t, Var):
            bound = out.get(t)
            if bound is None:
                if out is subst:
                    out = dict(subst)
                out[t] = g
            elif bound != g:
                return None
        elif t != g:
            return None
    return out


def _substitute(a: Atom, subst: dict) -> Atom:
    return Atom(a.pred, tuple(subst.get(t, t) if isinstance(t, Var) else t for t in a.args))


def evaluate(h: Hypothesis, ctx) -> set:
    """Move atoms of the unique stable model of h over a derived context.

    A ground `move(d)` holds iff some rule instantiation has all positive
    body atoms in ctx and no negated body atom in ctx.
    """
    ctx_set = ctx if isinstance(ctx, (set, frozenset)) else set(ctx)
    by_pred = {}
    for a in ctx_set:
        by_pred.setdefault(a.pred, []).append(a)

    out = set()
    for rule in h.rules:
        positives = [l.atom for l in rule.body if not l.negated]
        negatives = [l.atom for l in rule.body if l.negated]

        def search(i, subst):
            if i == len(positives):
                for neg in negatives:
                    if _substitute(neg, subst) in ctx_set:
                        return
                out.add(_substitute(rule.head, subst))
                return
            schema = positives[i]
            for ground in by_pred.get(schema.pred, ()):
                extended = _match(schema, ground, subst)
                if extended is not None:
                    search(i + 1, extended)

        search(0, {})
    return out
