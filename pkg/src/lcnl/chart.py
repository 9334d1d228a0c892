"""Weighted chart parsing over compiled productions.

Parsing runs in two phases.  Phase 1 builds a context-free approximation:
a bottom-up chart of passive items (nonterminal, component, i, j) that
ignores consistency between components of one constituent.  Phase 2
extracts k-best derivations demand-driven from the phase-1 chart, where a
node asks for one constituent realizing a whole SET of component spans
jointly, so discontinuous constituents (a record whose fields surface in
different places) are resolved exactly.

Out-of-vocabulary tokens are covered by instantiating String-argument
templates per token: proper-name and suffix guesses for unseen words,
digit pass-through for numeral-like functions, and an unknown-chunk
hypothesis for every token so that parsing is total when the chunk layer
is active.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .core import TypedTree, Tree, check_tree, serialize_tree, tree_cost
from .dsl import RecordType, StrType
from .pmcfg import ArgRef, Lit, ParsingGrammar, PNonterminal, PProduction

# Re-exported here because parsing and surface segmentation belong together
# from the caller's point of view.
from .linearize import tokenize  # noqa: F401


class ChartError(Exception):
    pass


@dataclass(frozen=True)
class GuessPolicy:
    """Which template functions to instantiate for which unseen tokens.

    unknown_fun applies to every token; the others only to tokens outside
    the grammar's literal vocabulary.  suffix_table rows are (suffix,
    function names); digit_funs fire on all-digit tokens.
    """

    unknown_fun: Optional[str] = None
    proper_name_fun: Optional[str] = None
    suffix_table: tuple[tuple[str, tuple[str, ...]], ...] = ()
    digit_funs: tuple[str, ...] = ()


def default_policy(pg: ParsingGrammar) -> GuessPolicy:
    """Digit pass-through only: templates whose strcase keys are all digits."""
    digit_funs = tuple(
        sorted(
            fun
            for fun, t in pg.templates.items()
            if t.excluded_keys and all(k.isascii() and k.isdigit() for k in t.excluded_keys)
        )
    )
    return GuessPolicy(digit_funs=digit_funs)


def oov_hypotheses(
    pg: ParsingGrammar,
    token: str,
    sentence_initial: bool,
    policy: Optional[GuessPolicy] = None,
) -> list[PProduction]:
    """Lexical hypotheses for one token.

    The unknown-chunk hypothesis (when the policy provides one) is offered
    for every token, vocabulary or not; guessing heuristics only apply to
    tokens no literal production covers.
    """
    if policy is None:
        policy = default_policy(pg)
    out: list[PProduction] = []
    if policy.unknown_fun:
        out.extend(pg.instantiate(policy.unknown_fun, token))
    if token in pg.vocabulary:
        return out
    if policy.proper_name_fun and not sentence_initial and token[:1].isupper():
        out.extend(pg.instantiate(policy.proper_name_fun, token))
    for suffix, funs in policy.suffix_table:
        if token.endswith(suffix) and len(token) > len(suffix):
            for fun in funs:
                out.extend(pg.instantiate(fun, token))
    if token.isascii() and token.isdigit():
        for fun in policy.digit_funs:
            out.extend(pg.instantiate(fun, token))
    return out


@dataclass
class ParseResult:
    """Cost-ascending analyses plus chart size statistics."""

    trees: list[tuple[TypedTree, float]]
    items: int = 0
    spans: int = 0
    # Same derivations as plain trees, for direct linearization.
    raw: list[Tree] = field(default_factory=list)

    @property
    def empty(self) -> bool:
        return not self.trees


def start_component(pg: ParsingGrammar, cat: str) -> int:
    """Component index of the starting field `s` (or a bare Str lincat)."""
    lt = pg.conc.lincats[cat]
    shape = pg.shapes[cat]
    if isinstance(lt, StrType):
        return shape.comp_index(())
    if isinstance(lt, RecordType):
        for name, ft in lt.fields:
            if name == "s" and isinstance(ft, StrType):
                return shape.comp_index((("f", "s"),))
    raise ChartError(f"category {cat} has no starting Str field `s`")


# Constraint: component `comp` of a constituent must span tokens [i, j).
Constraint = tuple[int, int, int]
# Node: one constituent jointly realizing all constraints; barred lists
# unary functions already applied at these exact spans (cycle guard).
Node = tuple[PNonterminal, frozenset, frozenset]

# How far past k the per-node lists extend to keep exact ties available.
_TIE_SLACK = 64


def parse(
    pg: ParsingGrammar,
    tokens: list[str],
    start_category: str,
    k: int = 1,
    policy: Optional[GuessPolicy] = None,
) -> ParseResult:
    """Up to k cheapest full analyses of the token sequence.

    Ordered by (cost, serialized tree); every tree re-linearizes to the
    input and its reported cost equals tree_cost.
    """
    if k < 1:
        raise ChartError("k must be positive")
    if not tokens:
        return ParseResult([])
    chart = _Chart(pg, tokens, k, policy)
    return chart.run(start_category)


class _Chart:
    def __init__(self, pg: ParsingGrammar, tokens: list[str], k: int, policy: Optional[GuessPolicy]):
        self.pg = pg
        self.tokens = tokens
        self.n = len(tokens)
        self.k = k
        self.policy = policy if policy is not None else default_policy(pg)
        self.extra = self._oov_productions()
        self.extra_by_lhs: dict[PNonterminal, list[PProduction]] = {}
        for p in self.extra:
            self.extra_by_lhs.setdefault(p.lhs, []).append(p)
        # passive items: ends[(nt, comp, i)] = set of j with item (nt,comp,i,j)
        self.ends: dict[tuple[PNonterminal, int, int], set[int]] = {}
        self.passives: set[tuple[PNonterminal, int, int, int]] = set()
        self._memo: dict[Node, list[tuple[float, Tree]]] = {}
        self._stack: set[Node] = set()
        self._cuts = 0

    def _oov_productions(self) -> list[PProduction]:
        occurrences: dict[str, set[bool]] = {}
        for i, w in enumerate(self.tokens):
            occurrences.setdefault(w, set()).add(i == 0)
        seen: set[PProduction] = set()
        out: list[PProduction] = []
        for w in sorted(occurrences):
            for initial in sorted(occurrences[w]):
                for p in oov_hypotheses(self.pg, w, initial, self.policy):
                    if p not in seen:
                        seen.add(p)
                        out.append(p)
        return out

    # === Phase 1: context-free approximation ===

    def _phase1(self) -> None:
        tokset = set(self.tokens)
        # Pairs whose component starts with a literal are indexed by it so a
        # span only tries them when its first token matches.
        anchored: dict[str, list[tuple[PProduction, int, int]]] = {}
        floating: list[tuple[PProduction, int, int]] = []
        for p in itertools.chain(self.pg.productions, self.extra):
            for ci, comp in enumerate(p.components):
                needed = {it.token for it in comp if isinstance(it, Lit)}
                if not needed <= tokset:
                    continue
                n_lits = sum(1 for it in comp if isinstance(it, Lit))
                entry = (p, ci, n_lits)
                if comp and isinstance(comp[0], Lit):
                    anchored.setdefault(comp[0].token, []).append(entry)
                else:
                    floating.append(entry)
        for nt, ci in self.pg.may_empty:
            for i in range(self.n + 1):
                self._add(nt, ci, i, i)
        for length in range(1, self.n + 1):
            for i in range(self.n - length + 1):
                j = i + length
                candidates = floating + anchored.get(self.tokens[i], [])
                changed = True
                while changed:
                    changed = False
                    for p, ci, n_lits in candidates:
                        if n_lits > length or (p.lhs, ci, i, j) in self.passives:
                            continue
                        if self._can_align(p, p.components[ci], i, j):
                            self._add(p.lhs, ci, i, j)
                            changed = True

    def _add(self, nt: PNonterminal, comp: int, i: int, j: int) -> None:
        self.passives.add((nt, comp, i, j))
        self.ends.setdefault((nt, comp, i), set()).add(j)

    def _can_align(self, p: PProduction, items: tuple, i: int, j: int) -> bool:
        positions = {i}
        for it in items:
            nxt: set[int] = set()
            for pos in positions:
                if isinstance(it, Lit):
                    if pos < j and self.tokens[pos] == it.token:
                        nxt.add(pos + 1)
                else:
                    for end in self.ends.get((p.rhs[it.arg], it.comp, pos), ()):
                        if end <= j:
                            nxt.add(end)
            if not nxt:
                return False
            positions = nxt
        return j in positions


    # === Phase 2: joint k-best extraction ===

    def _alignments(self, p: PProduction, items: tuple, i: int, j: int) -> list[tuple[tuple[int, int, int, int], ...]]:
        """All ways items can cover [i,j); each way lists per ArgRef
        occurrence the tuple (arg index, component, start, end)."""
        results: list[tuple[tuple[int, int, int, int], ...]] = []

        def go(idx: int, pos: int, acc: list[tuple[int, int, int, int]]) -> None:
            if idx == len(items):
                if pos == j:
                    results.append(tuple(acc))
                return
            it = items[idx]
            if isinstance(it, Lit):
                if pos < j and self.tokens[pos] == it.token:
                    go(idx + 1, pos + 1, acc)
            else:
                for end in sorted(self.ends.get((p.rhs[it.arg], it.comp, pos), ())):
                    if end <= j:
                        acc.append((it.arg, it.comp, pos, end))
                        go(idx + 1, end, acc)
                        acc.pop()

        go(0, i, [])
        return results

    def _candidates(self, nt: PNonterminal) -> Iterable[PProduction]:
        yield from self.pg.by_lhs.get(nt, ())
        yield from self.extra_by_lhs.get(nt, ())

    def _derive(self, node: Node) -> list[tuple[float, Tree]]:
        if node in self._memo:
            return self._memo[node]
        if node in self._stack:
            self._cuts += 1
            return []
        self._stack.add(node)
        before = self._cuts
        result = self._compute(node)
        self._stack.discard(node)
        if self._cuts == before:
            self._memo[node] = result
        return result

    def _compute(self, node: Node) -> list[tuple[float, Tree]]:
        nt, cset, barred = node
        constraints = sorted(cset)
        found: list[tuple[float, Tree]] = []
        for p in self._candidates(nt):
            per_constraint = []
            ok = True
            for (c, i, j) in constraints:
                al = self._alignments(p, p.components[c], i, j)
                if not al:
                    ok = False
                    break
                per_constraint.append(al)
            if not ok:
                continue
            for choice in itertools.product(*per_constraint):
                refs = [r for group in choice for r in group]
                parent_spans = sorted((i, j) for (_, i, j) in constraints)
                child_spans = sorted((s, e) for (_, _, s, e) in refs)
                unary_same_span = bool(constraints) and len(p.rhs) == 1 and child_spans == parent_spans
                if unary_same_span and p.fun in barred:
                    continue
                child_barred = barred | {p.fun} if unary_same_span else frozenset()
                arg_csets: list[set[Constraint]] = [set() for _ in p.rhs]
                for (a, c, s, e) in refs:
                    arg_csets[a].add((c, s, e))
                child_lists = []
                dead = False
                for a in range(len(p.rhs)):
                    sub = self._derive((p.rhs[a], frozenset(arg_csets[a]), child_barred))
                    if not sub:
                        dead = True
                        break
                    child_lists.append(sub)
                if dead:
                    continue
                for combo in itertools.product(*child_lists):
                    cost = p.cost + sum(c for c, _ in combo)
                    children: list = []
                    for kind, payload in p.args_template:
                        if kind == "str":
                            children.append(payload)
                        else:
                            children.append(combo[payload][1])
                    found.append((cost, Tree(p.fun, tuple(children))))
        found.sort(key=lambda ct: (ct[0], serialize_tree(ct[1])))
        pruned: list[tuple[float, Tree]] = []
        seen: set[str] = set()
        for cost, tree in found:
            key = serialize_tree(tree)
            if key in seen:
                continue
            seen.add(key)
            if len(pruned) >= self.k + _TIE_SLACK:
                break
            pruned.append((cost, tree))
        return pruned

    def run(self, start_category: str) -> ParseResult:
        if start_category not in self.pg.shapes:
            raise ChartError(f"unknown start category {start_category}")
        comp = start_component(self.pg, start_category)
        self._phase1()
        ranked: list[tuple[float, str, Tree]] = []
        seen: set[str] = set()
        for nt in self.pg.nonterminals(start_category):
            if (nt, comp, 0, self.n) not in self.passives:
                continue
            for cost, tree in self._derive((nt, frozenset({(comp, 0, self.n)}), frozenset())):
                key = serialize_tree(tree)
                if key not in seen:
                    seen.add(key)
                    ranked.append((cost, key, tree))
        ranked.sort(key=lambda x: (x[0], x[1]))
        trees: list[tuple[TypedTree, float]] = []
        raw: list[Tree] = []
        for _, _, tree in ranked[: self.k]:
            typed = check_tree(tree, self.pg.sig, expected=start_category)
            trees.append((typed, tree_cost(tree, self.pg.sig)))
            raw.append(tree)
        spans = len({(i, j) for (_, _, i, j) in self.passives})
        return ParseResult(trees, items=len(self.passives), spans=spans, raw=raw)
