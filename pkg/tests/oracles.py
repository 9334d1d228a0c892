"""Independent reference implementations the tests compare against.

Everything here recomputes expected values by a different route than the
package code takes: a substitution-based linearizer over plain dicts, a
depth-bounded brute-force derivation enumerator, a three-color cycle
finder, and random generators for trees, token soups, and toy grammars.
None of these import the modules they are used to check beyond shared
data type definitions.
"""

from __future__ import annotations

import random
from collections import defaultdict
from itertools import product

from lcnl.core import AbstractSignature, Tree, serialize_tree
from lcnl.dsl import (
    Arg,
    Concat,
    ConcreteGrammar,
    ParamLit,
    Project,
    RecordLit,
    Select,
    StrCase,
    StrLit,
    TableLit,
)
from lcnl.pmcfg import ArgRef, Lit, ParsingGrammar


# === Tree cost ===

def ref_cost(tree, sig: AbstractSignature) -> float:
    """Flatten the tree to a function list, then sum declared costs."""
    funs: list[str] = []
    stack = [tree]
    while stack:
        node = stack.pop()
        if isinstance(node, str):
            continue
        funs.append(node.fun)
        stack.extend(node.children)
    return sum(sig.functions[f].cost for f in funs)


# === Linearization ===

def _ref_eval(expr, env):
    """Evaluate a lin expression to tuples/dicts/strings.

    Str -> tuple of tokens; param value -> its name; record and table ->
    plain dicts.  No provenance: this oracle checks surface tokens only.
    """
    if isinstance(expr, StrLit):
        return tuple(expr.tokens)
    if isinstance(expr, Arg):
        return env[expr.index]
    if isinstance(expr, Concat):
        return _ref_eval(expr.left, env) + _ref_eval(expr.right, env)
    if isinstance(expr, Project):
        return _ref_eval(expr.expr, env)[expr.field]
    if isinstance(expr, Select):
        return _ref_eval(expr.expr, env)[_ref_eval(expr.key, env)]
    if isinstance(expr, ParamLit):
        return expr.value
    if isinstance(expr, TableLit):
        return {key: _ref_eval(val, env) for key, val in expr.branches}
    if isinstance(expr, RecordLit):
        return {key: _ref_eval(val, env) for key, val in expr.fields}
    if isinstance(expr, StrCase):
        scrutinee = _ref_eval(expr.scrutinee, env)
        if len(scrutinee) == 1:
            for key, branch in expr.branches:
                if key == scrutinee[0]:
                    return _ref_eval(branch, env)
        return _ref_eval(expr.default, env)
    raise AssertionError(f"oracle cannot evaluate {expr!r}")


def ref_linearize(tree, sig: AbstractSignature, conc: ConcreteGrammar, start_field: str = "s") -> list[str]:
    def go(node):
        env = []
        for child in node.children:
            if isinstance(child, str):
                env.append(tuple(child.split()))
            else:
                env.append(go(child))
        return _ref_eval(conc.linrules[node.fun].expr, env)

    value = go(tree)
    if isinstance(value, dict):
        value = value[start_field]
    return list(value)


# === Brute-force parsing ===

def _start_component(pg: ParsingGrammar, cat: str) -> int:
    shape = pg.shapes[cat]
    for idx, path in enumerate(shape.str_paths):
        if path == () or path == (("f", "s"),):
            return idx
    raise AssertionError(f"category {cat} has no start component")


def enumerate_parses(
    pg: ParsingGrammar,
    tokens: list[str],
    start_category: str,
    extra_productions=(),
):
    """Every complete derivation over the tokens, by span-driven search.

    Returns [(serialization, cost)] sorted by (cost, serialization), the
    same key the parser contract specifies.  A constituent is derived
    against the exact spans its parent pins its components to, so the
    search is polynomial in the input length.  Valid as an oracle on
    grammars without unary cycles and where no rule mentions the same
    argument component twice.
    """
    prods = list(pg.productions) + list(extra_productions)
    for tok in dict.fromkeys(tokens):
        for fun in pg.templates:
            prods.extend(pg.instantiate(fun, tok))
    by_lhs = defaultdict(list)
    for p in prods:
        by_lhs[p.lhs].append(p)
    n = len(tokens)

    def tilings(seq, i, j):
        """Ways to lay out one component sequence over tokens[i:j).

        Yields lists of (arg, comp, (a, b)) giving the span each argument
        reference receives; literal items must match tokens exactly.
        """
        if not seq:
            if i == j:
                yield []
            return
        head, rest = seq[0], seq[1:]
        if isinstance(head, Lit):
            if i < j and tokens[i] == head.token:
                yield from tilings(rest, i + 1, j)
        else:
            for mid in range(i, j + 1):
                for tail in tilings(rest, mid, j):
                    yield [(head.arg, head.comp, (i, mid))] + tail

    memo: dict[tuple, dict] = {}
    in_progress: set = set()

    def derive(nt, assignment):
        """All (tree, cost) whose pinned components match their spans.

        assignment is a sorted tuple of (comp, i, j).  Re-entering the same
        node means a derivation would have to contain itself, which no
        finite tree does, so the in-progress hit contributes nothing.
        """
        key = (nt, assignment)
        if key in memo:
            return memo[key]
        if key in in_progress:
            return {}
        in_progress.add(key)
        found: dict[str, tuple] = {}
        for p in by_lhs[nt]:
            options = [list(tilings(p.components[comp], i, j)) for comp, i, j in assignment]
            if not all(options):
                continue
            for combo in product(*options):
                child_assign = defaultdict(set)
                conflict = False
                for row in combo:
                    for arg, comp, span in row:
                        prior = {s for c, s in child_assign[arg] if c == comp}
                        if prior and span not in prior:
                            conflict = True
                        child_assign[arg].add((comp, span))
                if conflict:
                    continue
                child_sets = []
                for idx in range(len(p.rhs)):
                    pinned = tuple(sorted((c, a, b) for c, (a, b) in child_assign.get(idx, ())))
                    child_sets.append(derive(p.rhs[idx], pinned))
                for picks in product(*[list(cs.values()) for cs in child_sets]):
                    children = []
                    for kind, payload in p.args_template:
                        if kind == "str":
                            children.append(payload)
                        else:
                            children.append(picks[payload][0])
                    tree = Tree(p.fun, tuple(children))
                    cost = p.cost + sum(pk[1] for pk in picks)
                    found[serialize_tree(tree)] = (tree, cost)
        in_progress.discard(key)
        memo[key] = found
        return found

    comp_idx = _start_component(pg, start_category)
    results = []
    seen = set()
    for nt in pg.nonterminals(start_category):
        for ser, (tree, cost) in derive(nt, ((comp_idx, 0, n),)).items():
            if ser not in seen:
                seen.add(ser)
                results.append((ser, cost))
    results.sort(key=lambda item: (item[1], item[0]))
    return results


# === Cycle detection ===

def ref_find_cycle(edges: list[tuple[str, str]]):
    """Three-color DFS; returns one cycle as a node path, or None."""
    adjacency = defaultdict(list)
    for a, b in edges:
        adjacency[a].append(b)
    WHITE, GRAY, BLACK = 0, 1, 2
    color = defaultdict(int)
    trail: list[str] = []

    def visit(node):
        color[node] = GRAY
        trail.append(node)
        for nxt in adjacency[node]:
            if color[nxt] == GRAY:
                return trail[trail.index(nxt):] + [nxt]
            if color[nxt] == WHITE:
                cycle = visit(nxt)
                if cycle:
                    return cycle
        trail.pop()
        color[node] = BLACK
        return None

    for start in sorted(adjacency):
        if color[start] == WHITE:
            cycle = visit(start)
            if cycle:
                return cycle
    return None


# === Random demo trees ===

_DIGIT_POOL = [str(n) for n in range(1, 70)] + ["947", "100", "3001"]
_UNKNOWN_POOL = ["blorks", "zzz", "@@@", "the", "John", "hello"]

_SKIP_KINDS = {"guess_proper", "guess_suffix"}


def random_layered_tree(lg, rng: random.Random, max_depth: int = 5) -> Tree:
    """A random well-typed tree over the layered start category.

    Parse-time guess functions are excluded: their hypotheses depend on
    token shape and position, so they are not part of the grammar's
    reversible core.  Chunk lists are kept short to bound ambiguity.
    """
    sig = lg.sig
    by_cat = defaultdict(list)
    for decl in sig.functions.values():
        if lg.provenance.get(decl.name) in _SKIP_KINDS:
            continue
        by_cat[decl.result_type].append(decl)

    def build(cat: str, depth: int) -> Tree:
        candidates = by_cat[cat]
        if depth <= 0:
            floor = min(len(d.arg_types) for d in candidates)
            candidates = [d for d in candidates if len(d.arg_types) == floor]
        decl = rng.choice(candidates)
        children = []
        for arg in decl.arg_types:
            if arg == "String":
                if decl.name == "mkNumeral":
                    children.append(rng.choice(_DIGIT_POOL))
                else:
                    children.append(rng.choice(_UNKNOWN_POOL))
            elif arg == "ListChunk":
                children.append(build(arg, min(depth - 1, 2)))
            else:
                children.append(build(arg, depth - 1))
        return Tree(decl.name, tuple(children))

    return build(sig.start_category, max_depth)


# === Random toy grammars ===

_WORDS = ["foo", "bar", "baz", "qux", "zip", "zap", "mok", "run"]


def random_toy_grammar(rng: random.Random):
    """Source text for a small random grammar plus its start category.

    Shapes covered: plain {s:Str} cats, an occasional two-field record
    (discontinuous constituents), an occasional parameter field.  The
    grammars are linear and non-erasing: every rule mentions each string
    component of each argument exactly once, every lexical component holds
    at least one token, and there are no unary rules.  That keeps the
    parse set of any input finite and within enumerate_parses's contract.
    All costs are multiples of 0.25 so cost sums are exact binary floats.
    """
    n_cats = rng.randint(2, 3)
    cats = [f"C{i}" for i in range(n_cats)]
    pair_cat = cats[-1] if rng.random() < 0.35 else None
    param_cat = cats[0] if rng.random() < 0.35 else None

    def cost():
        return rng.choice(["0.25", "0.5", "0.75", "1.0", "1.5", "2.0"])

    def str_fields(cat: str) -> list[str]:
        return ["s", "t"] if cat == pair_cat else ["s"]

    def mk_record(cat: str, by_field: dict) -> str:
        fields = [f"{f} = {expr}" for f, expr in by_field.items()]
        if cat == param_cat:
            fields.append(f"p = {rng.choice(['V1', 'V2'])}")
        return "{" + " ; ".join(fields) + "}"

    lines_abs = [f"abstract toy {{ flags startcat = {cats[0]} ;"]
    for c in cats:
        lines_abs.append(f"  cat {c} ;")
    lines_conc = ["concrete toy_x of toy {"]
    if param_cat:
        lines_conc.append("  param P = V1 | V2 ;")
    for c in cats:
        fields = " ; ".join(f"{f} : Str" for f in str_fields(c))
        if c == param_cat:
            fields += " ; p : P"
        lines_conc.append(f"  lincat {c} = {{{fields}}} ;")

    words = iter(rng.sample(_WORDS, len(_WORDS)) * 3)
    n_binary = rng.randint(1, 3)
    fun_no = 0
    # One lexical entry per category first, so derivations exist.
    for c in cats + [rng.choice(cats) for _ in range(rng.randint(0, 2))]:
        name = f"f{fun_no}"
        fun_no += 1
        lines_abs.append(f"  fun {name} : {c} [cost={cost()}] ;")
        body = mk_record(c, {f: f'"{next(words)}"' for f in str_fields(c)})
        lines_conc.append(f"  lin {name} = {body} ;")
    for _ in range(n_binary):
        name = f"f{fun_no}"
        fun_no += 1
        a, b, res = rng.choice(cats), rng.choice(cats), rng.choice(cats)
        lines_abs.append(f"  fun {name} : {a} -> {b} -> {res} [cost={cost()}] ;")
        pieces = [f"x.{f}" for f in str_fields(a)] + [f"y.{f}" for f in str_fields(b)]
        rng.shuffle(pieces)
        for _ in range(rng.randint(0, 1)):
            pieces.insert(rng.randint(0, len(pieces)), f'"{next(words)}"')
        out = str_fields(res)
        if len(out) == 2:
            cut = rng.randint(1, len(pieces) - 1)
            halves = [pieces[:cut], pieces[cut:]]
        else:
            halves = [pieces]
        body = mk_record(res, {f: " ++ ".join(half) for f, half in zip(out, halves)})
        lines_conc.append(f"  lin {name} x y = {body} ;")
    lines_abs.append("}")
    lines_conc.append("}")
    return "\n".join(lines_abs), "\n".join(lines_conc), cats[0]


def random_toy_tree(sig: AbstractSignature, rng: random.Random, category: str, budget: int = 4):
    """A random well-typed tree of the category, at most budget leaves.

    Returns None when the category has no lexical entry to bottom out on.
    """
    lexical = [f for f in sig.functions_by_result(category) if f.arity == 0]
    combining = [f for f in sig.functions_by_result(category) if f.arity > 0]
    if budget > 1 and combining and rng.random() < 0.6:
        decl = rng.choice(combining)
        split = budget - 1
        children = []
        for arg in decl.arg_types:
            sub = random_toy_tree(sig, rng, arg, max(1, split // decl.arity))
            if sub is None:
                children = None
                break
            children.append(sub)
        if children is not None:
            return Tree(decl.name, tuple(children))
    if not lexical:
        return None
    return Tree(rng.choice(lexical).name)
