"""Compilation of concrete grammars into parsing productions.

Parameters are eliminated by exhaustive instantiation: every category is
specialized into nonterminals carrying a total assignment of its inherent
parameter fields, and every rule becomes one production per assignment of
its arguments' parameters.  Table fields expand into separate string
components, so a production maps argument components and literal tokens
onto each component of its result.

Functions over the built-in String type compile by enumerating their
`strcase` keys; the default branch and pure pass-through functions become
templates that the parser instantiates per input token.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Union

from .core import AbstractSignature, FunDecl, STRING_TYPE
from .dsl import (
    Arg,
    Concat,
    ConcreteGrammar,
    LinExpr,
    LinType,
    ParamLit,
    ParamType,
    Project,
    RecordLit,
    RecordType,
    Select,
    StrCase,
    StrLit,
    StrType,
    TableLit,
    TableType,
)

# A component path: ("f", fieldname) and ("k", paramvalue) steps.
CompPath = tuple[tuple[str, str], ...]


class CompileError(Exception):
    """Raised when a validated grammar cannot be compiled."""


class ParamExplosionError(CompileError):
    """Raised when instantiation would exceed the production cap."""

    def __init__(self, limit: int):
        self.limit = limit
        super().__init__(f"parameter instantiation exceeds {limit} productions")


@dataclass(frozen=True)
class Lit:
    token: str


@dataclass(frozen=True)
class ArgRef:
    arg: int  # index into production rhs
    comp: int  # string component of that argument


Item = Union[Lit, ArgRef]


@dataclass(frozen=True)
class PNonterminal:
    """A category specialized with one value per inherent parameter field."""

    cat: str
    params: tuple[str, ...] = ()

    def __str__(self) -> str:
        if not self.params:
            return self.cat
        return self.cat + "[" + ",".join(self.params) + "]"


@dataclass(frozen=True)
class PProduction:
    """One specialized rewrite: lhs components over rhs components and tokens.

    args_template reconstructs tree children: ("nt", rhs_index) entries pull
    subderivations, ("str", literal) entries are bound String leaves.
    """

    fun: str
    lhs: PNonterminal
    rhs: tuple[PNonterminal, ...]
    components: tuple[tuple[Item, ...], ...]
    cost: float
    args_template: tuple[tuple[str, object], ...]

    def consumes_tokens(self) -> bool:
        return any(isinstance(item, Lit) for comp in self.components for item in comp)


@dataclass
class CategoryShape:
    """Flattened view of a lincat: string components and parameter fields."""

    cat: str
    str_paths: list[CompPath]
    param_paths: list[tuple[CompPath, str]]  # (path, param type name)

    @property
    def n_components(self) -> int:
        return len(self.str_paths)

    def comp_index(self, path: CompPath) -> int:
        return self.str_paths.index(path)


def flatten_lincat(lt: LinType, params: dict[str, tuple[str, ...]], path: CompPath = ()) -> tuple[list[CompPath], list[tuple[CompPath, str]]]:
    """List the Str leaf paths and parameter leaf paths of a lincat."""
    if isinstance(lt, StrType):
        return [path], []
    if isinstance(lt, ParamType):
        return [], [(path, lt.name)]
    if isinstance(lt, RecordType):
        strs: list[CompPath] = []
        pars: list[tuple[CompPath, str]] = []
        for name, ft in lt.fields:
            s, p = flatten_lincat(ft, params, path + (("f", name),))
            strs.extend(s)
            pars.extend(p)
        return strs, pars
    if isinstance(lt, TableType):
        strs = []
        pars = []
        for v in params[lt.param]:
            s, p = flatten_lincat(lt.value, params, path + (("k", v),))
            strs.extend(s)
            pars.extend(p)
        return strs, pars
    raise CompileError(f"cannot flatten lincat {lt!r}")


# === Symbolic values used during rule instantiation ===

@dataclass(frozen=True)
class SymStr:
    items: tuple[Item, ...]


@dataclass(frozen=True)
class SymParam:
    value: str


@dataclass(frozen=True)
class SymRecord:
    fields: dict[str, "SymValue"]


@dataclass(frozen=True)
class SymTable:
    branches: dict[str, "SymValue"]


SymValue = Union[SymStr, SymParam, SymRecord, SymTable]


def _build_arg_value(
    lt: LinType,
    rhs_index: int,
    shape: CategoryShape,
    assignment: dict[CompPath, str],
    params: dict[str, tuple[str, ...]],
    path: CompPath = (),
) -> SymValue:
    if isinstance(lt, StrType):
        return SymStr((ArgRef(rhs_index, shape.comp_index(path)),))
    if isinstance(lt, ParamType):
        return SymParam(assignment[path])
    if isinstance(lt, RecordType):
        return SymRecord({n: _build_arg_value(ft, rhs_index, shape, assignment, params, path + (("f", n),)) for n, ft in lt.fields})
    if isinstance(lt, TableType):
        return SymTable({v: _build_arg_value(lt.value, rhs_index, shape, assignment, params, path + (("k", v),)) for v in params[lt.param]})
    raise CompileError(f"cannot build symbolic value for {lt!r}")


def _sym_eval(expr: LinExpr, args: list[SymValue]) -> SymValue:
    if isinstance(expr, StrLit):
        return SymStr(tuple(Lit(t) for t in expr.tokens))
    if isinstance(expr, Arg):
        return args[expr.index]
    if isinstance(expr, Concat):
        left = _sym_eval(expr.left, args)
        right = _sym_eval(expr.right, args)
        assert isinstance(left, SymStr) and isinstance(right, SymStr)
        return SymStr(left.items + right.items)
    if isinstance(expr, Project):
        rec = _sym_eval(expr.expr, args)
        assert isinstance(rec, SymRecord)
        return rec.fields[expr.field]
    if isinstance(expr, Select):
        table = _sym_eval(expr.expr, args)
        key = _sym_eval(expr.key, args)
        assert isinstance(table, SymTable) and isinstance(key, SymParam)
        return table.branches[key.value]
    if isinstance(expr, ParamLit):
        return SymParam(expr.value)
    if isinstance(expr, TableLit):
        return SymTable({k: _sym_eval(v, args) for k, v in expr.branches})
    if isinstance(expr, RecordLit):
        return SymRecord({k: _sym_eval(v, args) for k, v in expr.fields})
    if isinstance(expr, StrCase):
        assert isinstance(expr.scrutinee, Arg)
        scrutinee = args[expr.scrutinee.index]
        assert isinstance(scrutinee, SymStr), "String arguments are bound before instantiation"
        if len(scrutinee.items) == 1 and isinstance(scrutinee.items[0], Lit):
            token = scrutinee.items[0].token
            for key, branch in expr.branches:
                if key == token:
                    return _sym_eval(branch, args)
        return _sym_eval(expr.default, args)
    raise CompileError(f"cannot instantiate {expr!r}")


def _extract_result(
    value: SymValue,
    lt: LinType,
    params: dict[str, tuple[str, ...]],
    path: CompPath = (),
) -> tuple[dict[CompPath, tuple[Item, ...]], dict[CompPath, str]]:
    """Split an instantiated result into component item lists and parameters."""
    if isinstance(lt, StrType):
        assert isinstance(value, SymStr)
        return {path: value.items}, {}
    if isinstance(lt, ParamType):
        assert isinstance(value, SymParam)
        return {}, {path: value.value}
    if isinstance(lt, RecordType):
        comps: dict[CompPath, tuple[Item, ...]] = {}
        pars: dict[CompPath, str] = {}
        assert isinstance(value, SymRecord)
        for n, ft in lt.fields:
            c, p = _extract_result(value.fields[n], ft, params, path + (("f", n),))
            comps.update(c)
            pars.update(p)
        return comps, pars
    if isinstance(lt, TableType):
        comps = {}
        pars = {}
        assert isinstance(value, SymTable)
        for v in params[lt.param]:
            c, p = _extract_result(value.branches[v], lt.value, params, path + (("k", v),))
            comps.update(c)
            pars.update(p)
        return comps, pars
    raise CompileError(f"cannot extract result for {lt!r}")


def _strcase_keys(expr: LinExpr, arg_index: int) -> set[str]:
    """Collect strcase keys applied to the given argument anywhere in a rule."""
    keys: set[str] = set()

    def go(e: LinExpr) -> None:
        if isinstance(e, StrCase):
            if isinstance(e.scrutinee, Arg) and e.scrutinee.index == arg_index:
                keys.update(k for k, _ in e.branches)
            go(e.default)
            for _, b in e.branches:
                go(b)
        elif isinstance(e, Concat):
            go(e.left)
            go(e.right)
        elif isinstance(e, (Project,)):
            go(e.expr)
        elif isinstance(e, Select):
            go(e.expr)
            go(e.key)
        elif isinstance(e, TableLit):
            for _, b in e.branches:
                go(b)
        elif isinstance(e, RecordLit):
            for _, b in e.fields:
                go(b)

    go(expr)
    return keys


@dataclass
class Template:
    """A String-argument function instantiable per input token.

    excluded_keys lists tokens already covered by enumerated productions
    (strcase keys); instantiating those would break re-linearization.
    """

    fun: str
    excluded_keys: frozenset[str]


@dataclass
class ParsingGrammar:
    """The compiled, parameter-free form of one language's grammar."""

    sig: AbstractSignature
    conc: ConcreteGrammar
    shapes: dict[str, CategoryShape]
    productions: list[PProduction]
    templates: dict[str, Template]
    vocabulary: frozenset[str]
    by_lhs: dict[PNonterminal, list[PProduction]] = field(default_factory=dict)
    may_empty: frozenset[tuple[PNonterminal, int]] = frozenset()

    def nonterminals(self, cat: str) -> list[PNonterminal]:
        shape = self.shapes[cat]
        domains = [self.conc.params[p].values for _, p in shape.param_paths]
        return [PNonterminal(cat, combo) for combo in itertools.product(*domains)]

    def instantiate(self, fun: str, token: str) -> list[PProduction]:
        """Build productions binding a template's String argument to a token."""
        template = self.templates.get(fun)
        if template is None or token in template.excluded_keys:
            return []
        decl = self.sig.functions[fun]
        return _make_productions(self, decl, {i: token for i, t in enumerate(decl.arg_types) if t == STRING_TYPE})


def compile_grammar(sig: AbstractSignature, conc: ConcreteGrammar, max_productions: int = 100000) -> ParsingGrammar:
    """Instantiate every rule over every parameter assignment.

    Raises ParamExplosionError when the count would exceed max_productions.
    """
    params = {name: decl.values for name, decl in conc.params.items()}
    shapes: dict[str, CategoryShape] = {}
    for cat in sorted(sig.categories):
        strs, pars = flatten_lincat(conc.lincats[cat], params)
        shapes[cat] = CategoryShape(cat, strs, pars)
    shapes[STRING_TYPE] = CategoryShape(STRING_TYPE, [()], [])

    pg = ParsingGrammar(sig, conc, shapes, [], {}, frozenset())
    productions: list[PProduction] = []
    templates: dict[str, Template] = {}
    for fname in sorted(sig.functions):
        decl = sig.functions[fname]
        rule = conc.linrules[fname]
        string_args = [i for i, t in enumerate(decl.arg_types) if t == STRING_TYPE]
        if not string_args:
            made = _make_productions(pg, decl, {})
            productions.extend(made)
        else:
            key_sets = {i: sorted(_strcase_keys(rule.expr, i)) for i in string_args}
            if all(key_sets[i] for i in string_args):
                for combo in itertools.product(*(key_sets[i] for i in string_args)):
                    bindings = dict(zip(string_args, combo))
                    productions.extend(_make_productions(pg, decl, bindings))
            # Tokens outside the enumerated keys go through a template.
            excluded = frozenset(k for i in string_args for k in key_sets[i])
            templates[fname] = Template(fname, excluded)
        if len(productions) > max_productions:
            raise ParamExplosionError(max_productions)

    by_lhs: dict[PNonterminal, list[PProduction]] = {}
    for p in productions:
        by_lhs.setdefault(p.lhs, []).append(p)
    vocabulary = frozenset(item.token for p in productions for comp in p.components for item in comp if isinstance(item, Lit))

    pg.productions = productions
    pg.templates = templates
    pg.vocabulary = vocabulary
    pg.by_lhs = by_lhs
    pg.may_empty = _compute_may_empty(productions)
    return pg


def _make_productions(pg: ParsingGrammar, decl: FunDecl, str_bindings: dict[int, str]) -> list[PProduction]:
    """All productions of one function under one String-argument binding."""
    conc = pg.conc
    params = {name: d.values for name, d in conc.params.items()}
    result_shape = pg.shapes[decl.result_type]
    nt_args = [(i, t) for i, t in enumerate(decl.arg_types) if t != STRING_TYPE]
    rule = conc.linrules[decl.name]

    domains = []
    for _, cat in nt_args:
        shape = pg.shapes[cat]
        domains.append(list(itertools.product(*[params[p] for _, p in shape.param_paths])))

    out: list[PProduction] = []
    for combo in itertools.product(*domains):
        args: list[Optional[SymValue]] = [None] * decl.arity
        rhs: list[PNonterminal] = []
        args_template: list[tuple[str, object]] = []
        for tree_index in range(decl.arity):
            if tree_index in str_bindings:
                token = str_bindings[tree_index]
                args[tree_index] = SymStr((Lit(token),) if token else ())
                args_template.append(("str", token))
        for (tree_index, cat), assigned in zip(nt_args, combo):
            shape = pg.shapes[cat]
            assignment = {path: value for (path, _), value in zip(shape.param_paths, assigned)}
            rhs_index = len(rhs)
            args[tree_index] = _build_arg_value(conc.lincats[cat], rhs_index, shape, assignment, params)
            rhs.append(PNonterminal(cat, tuple(assigned)))
        # Rebuild args_template in tree order.
        args_template = []
        rhs_counter = 0
        for tree_index, t in enumerate(decl.arg_types):
            if t == STRING_TYPE:
                args_template.append(("str", str_bindings[tree_index]))
            else:
                args_template.append(("nt", rhs_counter))
                rhs_counter += 1

        value = _sym_eval(rule.expr, [a for a in args])  # type: ignore[arg-type]
        comps, respars = _extract_result(value, conc.lincats[decl.result_type], params)
        lhs = PNonterminal(decl.result_type, tuple(respars[path] for path, _ in result_shape.param_paths))
        components = tuple(comps[path] for path in result_shape.str_paths)
        out.append(PProduction(decl.name, lhs, tuple(rhs), components, decl.cost, tuple(args_template)))
    return out


def _compute_may_empty(productions: list[PProduction]) -> frozenset[tuple[PNonterminal, int]]:
    """Fixpoint of components that can derive the empty token sequence."""
    empty: set[tuple[PNonterminal, int]] = set()
    changed = True
    while changed:
        changed = False
        for p in productions:
            for ci, comp in enumerate(p.components):
                key = (p.lhs, ci)
                if key in empty:
                    continue
                if all(isinstance(it, ArgRef) and (p.rhs[it.arg], it.comp) in empty for it in comp):
                    empty.add(key)
                    changed = True
    return frozenset(empty)
