"""Rule learning from weighted examples harvested from episodes.

Examples are WCDPIs (weighted context-dependent partial interpretations):
an id, a penalty, the move atom that was taken, the move atoms that were
not, and the ground feature context of the step. A hypothesis is scored by
its literal count plus the penalties of every example it fails to accept,
and the learner searches the enumerated rule space for the exact minimum
under a rule-cardinality bound, falling back to greedy local search only
when the node budget runs out.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .gridworld import DIRECTIONS
from .grounding import GroundContext, context_from_text, ground_action, ground_features
from .symbolic import (
    ARITIES,
    Atom,
    Hypothesis,
    Literal,
    Rule,
    Var,
    atom,
    canonicalize,
    derive_distance_atoms,
    evaluate,
    parse_rule,
)

ALL_MOVE_ATOMS = frozenset(atom("move", d) for d in DIRECTIONS)

_CLASS_OF_PRED = {
    "food": "food", "ghost": "ghost", "capsule": "capsule",
    "food_dist_leq": "food", "food_dist_geq": "food",
    "ghost_dist_leq": "ghost", "ghost_dist_geq": "ghost",
    "caps_dist_leq": "capsule", "caps_dist_geq": "capsule",
}
_CLASS_INDEX = {"food": 0, "ghost": 1, "capsule": 2}
_NO_OBJECT = 99


@dataclass(frozen=True)
class BiasConfig:
    """Shape of the enumerated rule space."""

    max_body: int = 2
    d_values: tuple = (0, 1, 2, 3, 4)
    predicates: tuple = (
        "wall",
        "food_dist_leq", "food_dist_geq",
        "ghost_dist_leq", "ghost_dist_geq",
        "caps_dist_leq", "caps_dist_geq",
    )
    negated_predicates: tuple = ("wall",)


DEFAULT_BIAS = BiasConfig()


@dataclass(frozen=True)
class SearchSpace:
    rules: tuple

    def __len__(self):
        return len(self.rules)

    def __contains__(self, rule: Rule) -> bool:
        return canonicalize(rule) in set(self.rules)

    def index_of(self, rule: Rule) -> int:
        return self.rules.index(canonicalize(rule))


def generate_search_space(bias: BiasConfig = DEFAULT_BIAS) -> SearchSpace:
    """Enumerate every admissible rule, deduplicated, in canonical order.

    Bodies mix at most `max_body` literals over the bias predicates, with
    negation allowed only where the bias says so. Conjunctions repeating
    one distance predicate are dropped (they collapse to a single bound),
    as is the contradictory wall/not-wall pair.
    """
    if not bias.predicates:
        raise ValueError("bias predicate list is empty")
    if bias.max_body < 1:
        raise ValueError("max_body must be at least 1")
    dir_var = Var("Dir")

    templates = []  # (family key, negated, builder)
    for pred in bias.predicates:
        if pred not in ARITIES or pred in ("move", "d_const"):
            raise ValueError(f"predicate {pred!r} not usable in rule bodies")
        negations = [False]
        if pred in bias.negated_predicates:
            negations.append(True)
        for negated in negations:
            if ARITIES[pred] == 1:
                templates.append((pred, negated, lambda i, p=pred, n=negated: Literal(Atom(p, (dir_var,)), n)))
            elif ARITIES[pred] == 2:
                templates.append(
                    (pred, negated, lambda i, p=pred, n=negated: Literal(Atom(p, (dir_var, Var(f"D{i}"))), n))
                )
            else:
                for d in bias.d_values:
                    templates.append(
                        (pred, negated,
                         lambda i, p=pred, n=negated, d=d: Literal(Atom(p, (dir_var, Var(f"D{i}"), d)), n))
                    )

    rules = []
    seen = set()
    for size in range(1, bias.max_body + 1):
        for combo in itertools.combinations(range(len(templates)), size):
            picked = [templates[i] for i in combo]
            if all(neg for _, neg, _ in picked):
                continue  # unsafe: head variable needs a positive occurrence
            preds = [p for p, _, _ in picked]
            if len(set(preds)) != len(preds) and any(ARITIES[p] != 1 for p in preds):
                continue  # repeated distance predicate: redundant conjunction
            if sum(1 for p in preds if ARITIES[p] == 1) > 1:
                continue  # wall together with not wall
            body = tuple(make(i) for i, (_, _, make) in enumerate(picked))
            rule = canonicalize(Rule(Atom("move", (dir_var,)), body))
            if rule not in seen:
                seen.add(rule)
                rules.append(rule)
    rules.sort(key=lambda r: (r.literal_count, r.render()))
    return SearchSpace(tuple(rules))


@dataclass(frozen=True)
class WCDPI:
    """One weighted example: the move taken, the moves not taken, a context."""

    id: str
    penalty: int
    inc: frozenset
    exc: frozenset
    context: GroundContext

    def __post_init__(self):
        if self.penalty < 0:
            raise ValueError("penalty must be non-negative")
        if len(self.inc) != 1:
            raise ValueError("exactly one included move atom expected")
        if self.inc & self.exc:
            raise ValueError("inc and exc overlap")
        if self.inc | self.exc != ALL_MOVE_ATOMS:
            raise ValueError("inc and exc must partition the four move atoms")


def make_wcdpi(example_id: str, penalty: int, action: str, context: GroundContext) -> WCDPI:
    inc = frozenset({ground_action(action)})
    return WCDPI(example_id, penalty, inc, ALL_MOVE_ATOMS - inc, context)


def build_wcdpis(episodes) -> list:
    """One example per non-stop step; the whole episode's clipped return
    (rounded to an integer, floored at zero) is every step's penalty."""
    out = []
    for ep_index, (trace, ep_return) in enumerate(episodes):
        penalty = max(0, round(ep_return))
        for t, (state, action) in enumerate(trace):
            if action == "stop":
                continue
            out.append(
                make_wcdpi(f"e{ep_index}_s{t}", penalty, action, ground_features(state))
            )
    return out


def accepted(h: Hypothesis, e: WCDPI) -> bool:
    """Whether the model over the example's derived context extends it."""
    model = evaluate(h, derive_distance_atoms(e.context.atoms))
    return e.inc <= model and not (e.exc & model)


def score(h: Hypothesis, examples) -> float:
    return h.literal_count + sum(e.penalty for e in examples if not accepted(h, e))


@dataclass
class CoverageMatrix:
    """Per-(rule, example) firing bits used by the hypothesis search."""

    fires_inc: np.ndarray  # bool, shape (n_rules, n_examples)
    fires_exc: np.ndarray  # bool, shape (n_rules, n_examples)


def _compile_rule(rule: Rule):
    """Translate a rule into per-direction numeric checks, or None.

    Valid only when every literal constrains the head direction variable
    and any distance variable is private to its literal, which holds for
    the whole generated space. Everything else takes the generic path.
    """
    if len(rule.head.args) != 1 or not isinstance(rule.head.args[0], Var):
        return None
    dir_var = rule.head.args[0]
    counts = {}
    for lit in rule.body:
        for t in lit.atom.args:
            if isinstance(t, Var):
                counts[t] = counts.get(t, 0) + 1
    checks = []
    for lit in rule.body:
        a = lit.atom
        cls = _CLASS_OF_PRED.get(a.pred)
        if a.pred == "wall":
            if a.args != (dir_var,):
                return None
            checks.append(("wall", not lit.negated))
        elif cls is not None and len(a.args) == 3:
            direction, dist, bound = a.args
            if lit.negated or direction != dir_var or not isinstance(dist, Var):
                return None
            if dist == dir_var or counts[dist] != 1 or not isinstance(bound, int):
                return None
            kind = "leq" if a.pred.endswith("leq") else "geq"
            checks.append((kind, _CLASS_INDEX[cls], bound))
        elif cls is not None and len(a.args) == 2:
            direction, dist = a.args
            if lit.negated or direction != dir_var:
                return None
            if isinstance(dist, Var):
                if dist == dir_var or counts[dist] != 1:
                    return None
                checks.append(("exists", _CLASS_INDEX[cls]))
            elif isinstance(dist, int):
                checks.append(("dist_eq", _CLASS_INDEX[cls], dist))
            else:
                return None
        else:
            return None
    return checks


def _context_profiles(contexts):
    """Numeric per-direction summary of each context: walls and distances."""
    n = len(contexts)
    wall = np.zeros((n, 4), dtype=bool)
    dist = np.full((n, 4, 3), _NO_OBJECT, dtype=np.int16)
    dir_index = {d: i for i, d in enumerate(DIRECTIONS)}
    for row, ctx in enumerate(contexts):
        for a in ctx.atoms:
            if a.pred == "wall":
                wall[row, dir_index[a.args[0]]] = True
            else:
                d, k = a.args
                dist[row, dir_index[d], _CLASS_INDEX[_CLASS_OF_PRED[a.pred]]] = k
    return wall, dist


def _fired_matrix(rules, contexts):
    """fired[r, c, d]: rule r fires move(d) on context c (derived closure)."""
    wall, dist = _context_profiles(contexts)
    n_ctx = len(contexts)
    fired = np.ones((len(rules), n_ctx, 4), dtype=bool)
    derived_cache = {}
    dir_index = {d: i for i, d in enumerate(DIRECTIONS)}
    for r, rule in enumerate(rules):
        checks = _compile_rule(rule)
        if checks is None:
            for c, ctx in enumerate(contexts):
                if c not in derived_cache:
                    derived_cache[c] = derive_distance_atoms(ctx.atoms)
                model = evaluate(Hypothesis((rule,)), derived_cache[c])
                row = np.zeros(4, dtype=bool)
                for m in model:
                    row[dir_index[m.args[0]]] = True
                fired[r, c] = row
            continue
        for check in checks:
            if check[0] == "wall":
                fired[r] &= wall if check[1] else ~wall
            elif check[0] == "leq":
                fired[r] &= dist[:, :, check[1]] <= check[2]
            elif check[0] == "geq":
                sel = dist[:, :, check[1]]
                fired[r] &= (sel >= check[2]) & (sel != _NO_OBJECT)
            elif check[0] == "exists":
                fired[r] &= dist[:, :, check[1]] != _NO_OBJECT
            else:
                fired[r] &= dist[:, :, check[1]] == check[2]
    return fired


def build_coverage(rules, examples) -> CoverageMatrix:
    contexts = []
    ctx_row = {}
    rows = []
    for e in examples:
        key = e.context
        if key not in ctx_row:
            ctx_row[key] = len(contexts)
            contexts.append(key)
        rows.append(ctx_row[key])
    fired = _fired_matrix(tuple(rules), contexts)

    dir_index = {d: i for i, d in enumerate(DIRECTIONS)}
    inc_dir = np.array(
        [dir_index[next(iter(e.inc)).args[0]] for e in examples], dtype=np.intp
    )
    exc_mask = np.zeros((len(examples), 4), dtype=bool)
    for i, e in enumerate(examples):
        for m in e.exc:
            exc_mask[i, dir_index[m.args[0]]] = True

    per_example = fired[:, rows, :]  # (n_rules, n_examples, 4)
    fires_inc = np.take_along_axis(
        per_example, inc_dir[None, :, None], axis=2
    )[:, :, 0]
    fires_exc = (per_example & exc_mask[None, :, :]).any(axis=2)
    return CoverageMatrix(fires_inc=fires_inc, fires_exc=fires_exc)


class _BudgetExceeded(Exception):
    pass


def _merge_duplicates(examples):
    """Identical (inc, exc, context) examples merge with summed penalties."""
    merged = {}
    order = []
    for e in examples:
        key = (e.inc, e.exc, e.context)
        if key in merged:
            merged[key] += e.penalty
        else:
            merged[key] = e.penalty
            order.append((key, e.id))
    return [
        WCDPI(eid, merged[key], key[0], key[1], key[2]) for key, eid in order
    ]


def learn(space: SearchSpace, examples, *, max_rules: int = 4,
          node_budget: int = 200_000) -> Hypothesis:
    """Score-minimizing hypothesis over the space, deterministically.

    Exact bounded search: dominated rules are pruned (identical firing
    bits keep the shortest), subsets of up to `max_rules` rules are
    explored with branch-and-bound, and ties break toward fewer literals
    then canonical rule order. Past the node budget a greedy add/remove
    local search takes over.
    """
    if max_rules < 1:
        raise ValueError("max_rules must be at least 1")
    if node_budget < 1:
        raise ValueError("node_budget must be positive")
    if not len(space):
        raise ValueError("empty search space")
    examples = _merge_duplicates(examples)
    if not examples:
        return Hypothesis(())

    cov = build_coverage(space.rules, examples)
    pen_full = np.array([e.penalty for e in examples], dtype=np.float64)

    # Dominance pruning: identical behavior keeps the canonically first
    # rule, which is also the shortest because the space is sorted.
    groups = {}
    for idx in range(len(space.rules)):
        key = (cov.fires_inc[idx].tobytes(), cov.fires_exc[idx].tobytes())
        groups.setdefault(key, idx)
    kept = sorted(groups.values())

    positive = pen_full > 0
    candidates = [
        i for i in kept
        if (cov.fires_inc[i] & ~cov.fires_exc[i] & positive).any()
    ]
    all_lits = [r.literal_count for r in space.rules]

    # Examples indistinguishable by every candidate rule merge into one
    # weighted column; scores over the merged instance are identical.
    if candidates:
        sub_inc = cov.fires_inc[candidates]
        sub_exc = cov.fires_exc[candidates]
        columns = {}
        for j in range(len(examples)):
            key = (sub_inc[:, j].tobytes(), sub_exc[:, j].tobytes())
            columns.setdefault(key, []).append(j)
        picks = [cols[0] for cols in columns.values()]
        inc_m = np.ascontiguousarray(sub_inc[:, picks])
        exc_m = np.ascontiguousarray(sub_exc[:, picks])
        pen = np.array(
            [pen_full[cols].sum() for cols in columns.values()], dtype=np.float64
        )
    else:
        inc_m = np.zeros((0, 0), dtype=bool)
        exc_m = np.zeros((0, 0), dtype=bool)
        pen = np.zeros(0, dtype=np.float64)
    total_pen = float(pen_full.sum())

    def pen_of(mask):
        return float(pen[mask].sum())

    # A rule whose best-case recoverable penalty cannot repay its literal
    # cost is never part of an optimum.
    helped = [inc_m[r] & ~exc_m[r] & (pen > 0) for r in range(len(candidates))]
    rows = [
        r for r in range(len(candidates))
        if pen_of(helped[r]) > all_lits[candidates[r]]
    ]
    lits = [all_lits[candidates[r]] for r in rows]
    gain = [pen_of(helped[r]) for r in rows]

    # Re-index to the filtered candidate list, ordered by recoverable
    # penalty (ties by canonical rule index).
    order = sorted(range(len(rows)), key=lambda k: (-gain[k], candidates[rows[k]]))
    cand_idx = [candidates[rows[k]] for k in order]  # space indices
    n = len(cand_idx)
    inc_s = inc_m[[rows[k] for k in order]] if n else np.zeros((0, len(pen)), bool)
    exc_s = exc_m[[rows[k] for k in order]] if n else np.zeros((0, len(pen)), bool)
    lits_s = np.array([all_lits[i] for i in cand_idx], dtype=np.float64)
    helped_f = (inc_s & ~exc_s & (pen > 0)).astype(np.float64)

    best = {"score": total_pen, "lits": 0, "chosen": ()}

    def consider(chosen_js, value, lit_sum):
        if (value, lit_sum) > (best["score"], best["lits"]):
            return
        chosen = tuple(sorted(cand_idx[j] for j in chosen_js))
        key = (value, lit_sum, chosen)
        if key < (best["score"], best["lits"], best["chosen"]):
            best["score"], best["lits"], best["chosen"] = key

    def hyp_score_js(chosen_js):
        if not chosen_js:
            return total_pen
        sel = list(chosen_js)
        inc = np.logical_or.reduce(inc_s[sel])
        exc = np.logical_or.reduce(exc_s[sel])
        return float(lits_s[sel].sum()) + total_pen - pen_of(inc & ~exc)

    def greedy_pass():
        chosen = []
        current = total_pen
        while len(chosen) < max_rules:
            best_add, best_val = None, current
            for j in range(n):
                if j in chosen:
                    continue
                val = hyp_score_js(chosen + [j])
                if val < best_val:
                    best_add, best_val = j, val
            if best_add is None:
                break
            chosen.append(best_add)
            current = best_val
        improved = True
        while improved:
            improved = False
            for j in list(chosen):
                reduced = [x for x in chosen if x != j]
                value = hyp_score_js(reduced)
                if value <= current:
                    chosen, current = reduced, value
                    improved = True
        consider(tuple(chosen), current, int(lits_s[chosen].sum()) if chosen else 0)

    greedy_pass()  # warm start: a tight upper bound for the exact search

    nodes = 0

    def dfs(avail, chosen_js, inc, exc, lit_sum, score_now):
        # Bound: adding rule j can improve the score by at most its
        # still-free recoverable penalty minus its own literals, so the
        # best extension gains at most the top-k such margins.
        nonlocal nodes
        slots = max_rules - len(chosen_js)
        if slots == 0 or not len(avail):
            return
        free = (~inc & ~exc).astype(np.float64) * pen
        marg = helped_f[avail] @ free
        net = marg - lits_s[avail]
        viable = net > 0
        if not viable.any():
            return
        net = net[viable]
        sub = avail[viable]
        top = np.sort(net)[-slots:]
        if score_now - float(top.sum()) >= best["score"]:
            return
        local = sorted(range(len(sub)), key=lambda i: (-net[i], cand_idx[sub[i]]))
        for pos, i in enumerate(local):
            nodes += 1
            if nodes > node_budget:
                raise _BudgetExceeded
            j = int(sub[i])
            n_inc = inc | inc_s[j]
            n_exc = exc | exc_s[j]
            n_lits = lit_sum + int(lits_s[j])
            n_score = n_lits + total_pen - pen_of(n_inc & ~n_exc)
            n_chosen = chosen_js + (j,)
            consider(n_chosen, n_score, n_lits)
            rest = sub[[local[q] for q in range(pos + 1, len(local))]]
            dfs(rest, n_chosen, n_inc, n_exc, n_lits, n_score)

    try:
        dfs(np.arange(n, dtype=np.intp), (), np.zeros(len(pen), dtype=bool),
            np.zeros(len(pen), dtype=bool), 0, total_pen)
    except _BudgetExceeded:
        pass  # the greedy warm start above is the fallback answer

    return Hypothesis(tuple(space.rules[i] for i in best["chosen"]))


def write_ilp_task(rules, examples) -> str:
    """Plain-text task dump: background line, #rule lines, #example lines."""
    lines = ["#background d_const(0..4)."]
    for r in rules:
        lines.append(f"#rule {r.render()}")
    for e in examples:
        inc = ",".join(sorted(a.render() for a in e.inc))
        exc = ",".join(sorted(a.render() for a in e.exc))
        ctx = " ".join(sorted(a.render() for a in e.context.atoms))
        lines.append(f"#example {e.id} {e.penalty} | inc: {inc} | exc: {exc} | ctx: {ctx}")
    return "\n".join(lines) + "\n"


def parse_ilp_task(text: str):
    """Inverse of write_ilp_task: returns (rules, examples)."""
    rules, examples = [], []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#background"):
            continue
        if line.startswith("#rule "):
            rules.append(parse_rule(line[len("#rule "):]))
        elif line.startswith("#example "):
            head, inc_part, exc_part, ctx_part = line[len("#example "):].split(" | ")
            eid, pen = head.split()
            inc = frozenset(
                _parse_atom(t) for t in inc_part[len("inc: "):].split(",") if t
            )
            exc = frozenset(
                _parse_atom(t) for t in exc_part[len("exc: "):].split(",") if t
            )
            ctx_text = ctx_part[len("ctx: "):].strip()
            ctx = context_from_text("\n".join(ctx_text.split())) if ctx_text else GroundContext(frozenset())
            examples.append(WCDPI(eid, int(pen), inc, exc, ctx))
        else:
            raise ValueError(f"unrecognized task line: {line!r}")
    return rules, examples


def _parse_atom(text: str) -> Atom:
    from .symbolic import _Parser

    return _Parser(text.strip()).parse_atom()
