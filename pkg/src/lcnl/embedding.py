"""Composition of a controlled language and a host language grammar.

The merged grammar gets a fresh start category S with two entry points:
UseCNL (preferred, low cost) and UseHost.  Below both sits a chunk layer:
any configured host category, a whole CNL sentence, or a single unknown
token can become a Chunk, and a nonempty chunk list is a last-resort
analysis of S.  Per-chunk penalties make fewer, larger chunks win, and the
marker costs make CNL analyses rank first whenever one exists.

Coercion functions (np2person, fact2cl) splice host material into CNL
trees and vice versa.  The coercion graph must stay acyclic.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

from .core import AbstractSignature, FunDecl, Layer, STRING_TYPE
from .dsl import (
    Arg,
    Concat,
    ConcreteGrammar,
    LinExpr,
    LinRule,
    LinType,
    ParamLit,
    ParamType,
    ParamTypeDecl,
    Project,
    RecordLit,
    RecordType,
    Select,
    StrType,
    STR,
    TableLit,
    TableType,
    validate_concrete,
    GrammarValidationError,
)


class EmbedError(Exception):
    pass


class NameClash(EmbedError):
    def __init__(self, name: str, detail: str = ""):
        self.name = name
        super().__init__(f"name clash on {name!r}" + (f": {detail}" if detail else ""))


class LincatClash(EmbedError):
    def __init__(self, category: str, language: str):
        self.category = category
        self.language = language
        super().__init__(f"category {category!r} has conflicting lincats in {language!r}")


class InvalidCostPolicy(EmbedError):
    pass


class CoercionCycle(EmbedError):
    def __init__(self, path: list[str]):
        self.path = path
        super().__init__("coercion cycle [" + " -> ".join(path) + "]")


class LincatIncompatible(EmbedError):
    def __init__(self, pair: tuple[str, str], language: str):
        self.pair = pair
        self.language = language
        super().__init__(
            f"no identity coercion from {pair[0]!r} to {pair[1]!r} in {language!r} and no adapter rule given"
        )


START = "S"
CHUNK = "Chunk"
LIST_CHUNK = "ListChunk"
UNKNOWN_CHUNK = "UnknownChunk"


@dataclass(frozen=True)
class EmbeddingConfig:
    """What to embed and at what cost.

    chunk_categories are host categories usable as chunks; suffix_guessers
    rows are (language, suffix, category) and the corresponding guess
    functions exist in every language (the table only controls when a
    parse proposes them).
    """

    cnl_start: str
    host_start: str
    chunk_categories: tuple[str, ...] = ()
    coercions: tuple[tuple[str, str], ...] = ()
    use_cnl: float = 0.1
    use_host: float = 1.0
    per_chunk: float = 10.0
    coercion: float = 0.5
    proper_name_category: Optional[str] = None
    suffix_guessers: tuple[tuple[str, str, str], ...] = ()
    unknown_cost: float = 6.0
    proper_name_cost: float = 3.0
    suffix_cost: float = 4.0


def validate_cost_policy(cfg: EmbeddingConfig) -> None:
    costs = {
        "useCnl": cfg.use_cnl,
        "useHost": cfg.use_host,
        "perChunk": cfg.per_chunk,
        "coercion": cfg.coercion,
    }
    for name, value in costs.items():
        if value < 0:
            raise InvalidCostPolicy(f"{name} >= 0 violated ({value})")
    if not cfg.use_cnl < cfg.use_host:
        raise InvalidCostPolicy(f"useCnl < useHost violated ({cfg.use_cnl} vs {cfg.use_host})")
    if not cfg.per_chunk > cfg.use_host:
        raise InvalidCostPolicy(f"perChunk > useHost violated ({cfg.per_chunk} vs {cfg.use_host})")


@dataclass
class LayeredGrammar:
    """A merged grammar plus bookkeeping about what was generated.

    provenance maps each generated function to its generator kind; original
    functions are absent.  cnl_categories remembers which side a category
    came from, which decides the layer of coercions out of it.
    """

    sig: AbstractSignature
    concretes: dict[str, ConcreteGrammar]
    provenance: dict[str, str]
    config: EmbeddingConfig
    cnl_categories: frozenset[str]
    suffix_funs: dict[str, list[tuple[str, str]]] = field(default_factory=dict)

    @property
    def start_category(self) -> str:
        return START

    @property
    def languages(self) -> list[str]:
        return sorted(self.concretes)

    def kind(self, fun: str) -> Optional[str]:
        return self.provenance.get(fun)

    def is_chunk_producer(self, fun: str) -> bool:
        return self.provenance.get(fun) in ("chunk_marker", "chunk_cnl", "unknown_chunk")

    def guess_policy(self, language: str):
        """Per-language OOV policy for the parser (digit funs added there)."""
        from .chart import GuessPolicy

        cfg = self.config
        suffix_rows = tuple(
            (suffix, (fun,)) for suffix, fun in self.suffix_funs.get(language, [])
        )
        return GuessPolicy(
            unknown_fun=UNKNOWN_CHUNK,
            proper_name_fun="Guess" + cfg.proper_name_category if cfg.proper_name_category else None,
            suffix_table=suffix_rows,
        )


def chunk_fun_name(category: str) -> str:
    base = category[: -len("_Host")] if category.endswith("_Host") else category
    return "Chunk" + base


def coercion_fun_name(from_cat: str, to_cat: str) -> str:
    return from_cat.lower() + "2" + to_cat.lower()


def _first_value(params: dict[str, ParamTypeDecl], name: str) -> str:
    return params[name].values[0]


def _select_to_str(expr: LinExpr, lt: LinType, params: dict[str, ParamTypeDecl]) -> LinExpr:
    """Drill through table layers with each parameter's first value."""
    while isinstance(lt, TableType):
        expr = Select(expr, ParamLit(_first_value(params, lt.param)))
        lt = lt.value
    if not isinstance(lt, StrType):
        raise EmbedError(f"cannot reduce lincat {lt} to a string")
    return expr


def _s_field_expr(arg: Arg, lt: LinType, params: dict[str, ParamTypeDecl]) -> LinExpr:
    """The `s` string of a constituent, for marker and chunk rules."""
    if isinstance(lt, StrType):
        return arg
    if isinstance(lt, TableType):
        return _select_to_str(arg, lt, params)
    if isinstance(lt, RecordType):
        ft = lt.field("s")
        if ft is not None:
            return _select_to_str(Project(arg, "s"), ft, params)
    raise EmbedError(f"lincat {lt} has no `s` string to pass through")


def _passthrough_expr(arg: Arg, lt: LinType, params: dict[str, ParamTypeDecl]) -> LinExpr:
    """Fill a lincat shape with one token: guessed lexical entries."""
    if isinstance(lt, StrType):
        return arg
    if isinstance(lt, ParamType):
        return ParamLit(_first_value(params, lt.name))
    if isinstance(lt, RecordType):
        return RecordLit(tuple((n, _passthrough_expr(arg, ft, params)) for n, ft in lt.fields))
    if isinstance(lt, TableType):
        return TableLit(
            tuple((v, _passthrough_expr(arg, lt.value, params)) for v in params[lt.param].values)
        )
    raise EmbedError(f"cannot build a guessed entry for lincat {lt}")


def embed(
    cnl: tuple[AbstractSignature, dict[str, ConcreteGrammar]],
    host: tuple[AbstractSignature, dict[str, ConcreteGrammar]],
    cfg: EmbeddingConfig,
    adapters: Optional[dict[str, ConcreteGrammar]] = None,
) -> LayeredGrammar:
    """Merge two grammars under a fresh start category with a chunk layer.

    adapters optionally supplies per-language linrules for coercions whose
    lincats differ between the two sides.
    """
    validate_cost_policy(cfg)
    cnl_sig, cnl_concs = cnl
    host_sig, host_concs = host
    if sorted(cnl_concs) != sorted(host_concs):
        raise EmbedError(
            f"language sets differ: {sorted(cnl_concs)} vs {sorted(host_concs)}"
        )
    if cfg.cnl_start not in cnl_sig.categories:
        raise EmbedError(f"cnl start category {cfg.cnl_start!r} not declared")
    if cfg.host_start not in host_sig.categories:
        raise EmbedError(f"host start category {cfg.host_start!r} not declared")
    for c in cfg.chunk_categories:
        if c not in host_sig.categories and c not in cnl_sig.categories:
            raise EmbedError(f"chunk category {c!r} not declared")

    functions: dict[str, FunDecl] = {}
    for f in itertools.chain(cnl_sig.functions.values(), host_sig.functions.values()):
        if f.name in functions:
            raise NameClash(f.name, "declared by both grammars")
        functions[f.name] = f

    categories = set(cnl_sig.categories) | set(host_sig.categories)
    for new_cat in (START, CHUNK, LIST_CHUNK):
        if new_cat in categories:
            raise NameClash(new_cat, "category name reserved for the embedding")
    categories |= {START, CHUNK, LIST_CHUNK}

    provenance: dict[str, str] = {}

    def add_fun(decl: FunDecl, kind: str) -> None:
        if decl.name in functions:
            raise NameClash(decl.name, "already declared")
        functions[decl.name] = decl
        provenance[decl.name] = kind

    add_fun(FunDecl("UseCNL", (cfg.cnl_start,), START, cfg.use_cnl, Layer.SEMANTIC), "use_cnl")
    add_fun(FunDecl("UseHost", (cfg.host_start,), START, cfg.use_host, Layer.SYNTACTIC), "use_host")
    for c in cfg.chunk_categories:
        add_fun(FunDecl(chunk_fun_name(c), (c,), CHUNK, cfg.per_chunk, Layer.WORD), "chunk_marker")
    add_fun(FunDecl("ChunkCNL", (cfg.cnl_start,), CHUNK, cfg.per_chunk, Layer.SEMANTIC), "chunk_cnl")
    add_fun(FunDecl("OneChunk", (CHUNK,), LIST_CHUNK, 0.0, Layer.NEUTRAL), "chunk_list")
    add_fun(FunDecl("ConsChunk", (CHUNK, LIST_CHUNK), LIST_CHUNK, 0.0, Layer.NEUTRAL), "chunk_list")
    add_fun(FunDecl("UseChunks", (LIST_CHUNK,), START, 0.0, Layer.WORD), "use_chunks")
    add_fun(
        FunDecl(UNKNOWN_CHUNK, (STRING_TYPE,), CHUNK, cfg.unknown_cost, Layer.WORD),
        "unknown_chunk",
    )
    if cfg.proper_name_category:
        if cfg.proper_name_category not in categories:
            raise EmbedError(f"proper name category {cfg.proper_name_category!r} not declared")
        add_fun(
            FunDecl(
                "Guess" + cfg.proper_name_category,
                (STRING_TYPE,),
                cfg.proper_name_category,
                cfg.proper_name_cost,
                Layer.NEUTRAL,
            ),
            "guess_proper",
        )
    suffix_funs: dict[str, list[tuple[str, str]]] = {}
    for language, suffix, cat in cfg.suffix_guessers:
        if language not in cnl_concs:
            raise EmbedError(f"suffix guesser names unknown language {language!r}")
        if cat not in categories:
            raise EmbedError(f"suffix guesser names unknown category {cat!r}")
        fun = f"Guess{cat}_{suffix}"
        if fun not in functions:
            add_fun(FunDecl(fun, (STRING_TYPE,), cat, cfg.suffix_cost, Layer.NEUTRAL), "guess_suffix")
        suffix_funs.setdefault(language, []).append((suffix, fun))

    sig = AbstractSignature(frozenset(categories), functions, START)

    concretes: dict[str, ConcreteGrammar] = {}
    for language in sorted(cnl_concs):
        concretes[language] = _merge_concrete(
            language, cnl_concs[language], host_concs[language], sig, cfg, provenance
        )

    lg = LayeredGrammar(
        sig=sig,
        concretes=concretes,
        provenance=provenance,
        config=cfg,
        cnl_categories=frozenset(cnl_sig.categories),
        suffix_funs=suffix_funs,
    )
    lg = add_coercions(lg, cfg.coercions, adapters=adapters)
    for language, conc in lg.concretes.items():
        findings = validate_concrete(conc, lg.sig)
        if findings:
            raise GrammarValidationError(findings)
    return lg


def _merge_concrete(
    language: str,
    cnl_conc: ConcreteGrammar,
    host_conc: ConcreteGrammar,
    sig: AbstractSignature,
    cfg: EmbeddingConfig,
    provenance: dict[str, str],
) -> ConcreteGrammar:
    params: dict[str, ParamTypeDecl] = dict(cnl_conc.params)
    for name, decl in host_conc.params.items():
        if name in params and params[name] != decl:
            raise LincatClash(name, language)
        params[name] = decl

    lincats: dict[str, LinType] = dict(cnl_conc.lincats)
    for cat, lt in host_conc.lincats.items():
        if cat in lincats and lincats[cat] != lt:
            raise LincatClash(cat, language)
        lincats[cat] = lt
    str_record = RecordType((("s", STR),))
    for new_cat in (START, CHUNK, LIST_CHUNK):
        lincats[new_cat] = str_record

    linrules: dict[str, LinRule] = dict(cnl_conc.linrules)
    for fun, rule in host_conc.linrules.items():
        if fun in linrules:
            raise NameClash(fun, f"lin rule in both grammars for {language!r}")
        linrules[fun] = rule

    def srec(expr: LinExpr) -> LinExpr:
        return RecordLit((("s", expr),))

    x = Arg(0, "x")
    xs = Arg(1, "xs")
    linrules["UseCNL"] = LinRule("UseCNL", ("x",), srec(_s_field_expr(x, lincats[cfg.cnl_start], params)))
    linrules["UseHost"] = LinRule("UseHost", ("x",), srec(_s_field_expr(x, lincats[cfg.host_start], params)))
    for c in cfg.chunk_categories:
        fun = chunk_fun_name(c)
        linrules[fun] = LinRule(fun, ("x",), srec(_s_field_expr(x, lincats[c], params)))
    linrules["ChunkCNL"] = LinRule("ChunkCNL", ("x",), srec(_s_field_expr(x, lincats[cfg.cnl_start], params)))
    linrules["OneChunk"] = LinRule("OneChunk", ("x",), srec(Project(x, "s")))
    linrules["ConsChunk"] = LinRule(
        "ConsChunk", ("x", "xs"), srec(Concat(Project(x, "s"), Project(xs, "s")))
    )
    linrules["UseChunks"] = LinRule("UseChunks", ("x",), srec(Project(x, "s")))
    linrules[UNKNOWN_CHUNK] = LinRule(UNKNOWN_CHUNK, ("w",), srec(Arg(0, "w")))
    w = Arg(0, "w")
    for fun, kind in provenance.items():
        if kind == "guess_proper":
            cat = sig.functions[fun].result_type
            linrules[fun] = LinRule(fun, ("w",), _passthrough_expr(w, lincats[cat], params))
        elif kind == "guess_suffix":
            cat = sig.functions[fun].result_type
            linrules[fun] = LinRule(fun, ("w",), _passthrough_expr(w, lincats[cat], params))

    return ConcreteGrammar(
        name=f"{cnl_conc.name}_{host_conc.name}_layered",
        abstract_name=f"{cnl_conc.abstract_name}_{host_conc.abstract_name}_layered",
        params=params,
        lincats=lincats,
        linrules=linrules,
    )


def find_coercion_cycle(edges: list[tuple[str, str]]) -> Optional[list[str]]:
    """First directed cycle among coercion edges, as a category path."""
    adjacency: dict[str, list[str]] = {}
    for a, b in edges:
        adjacency.setdefault(a, []).append(b)
    visiting: dict[str, int] = {}  # 0 = on stack, 1 = done
    path: list[str] = []

    def dfs(node: str) -> Optional[list[str]]:
        visiting[node] = 0
        path.append(node)
        for nxt in adjacency.get(node, ()):
            if nxt not in visiting:
                cycle = dfs(nxt)
                if cycle is not None:
                    return cycle
            elif visiting[nxt] == 0:
                return path[path.index(nxt):] + [nxt]
        path.pop()
        visiting[node] = 1
        return None

    for start in sorted(adjacency):
        if start not in visiting:
            cycle = dfs(start)
            if cycle is not None:
                return cycle
    return None


def add_coercions(
    lg: LayeredGrammar,
    pairs,
    adapters: Optional[dict[str, ConcreteGrammar]] = None,
) -> LayeredGrammar:
    """Add one unary bridging function per (from, to) category pair.

    The linrule per language comes from an adapter fragment when given,
    otherwise it is the identity (requiring equal lincats) or a record
    projection (every target field present in the source).  The layer is
    the side the source category came from: material pulled out of the
    host stays SYNTACTIC inside a CNL tree, and vice versa.
    """
    pairs = sorted(set(tuple(p) for p in pairs))
    existing = [
        (lg.sig.functions[f].arg_types[0], lg.sig.functions[f].result_type)
        for f, kind in lg.provenance.items()
        if kind == "coercion"
    ]
    cycle = find_coercion_cycle(existing + list(pairs))
    if cycle is not None:
        raise CoercionCycle(cycle)

    functions = dict(lg.sig.functions)
    provenance = dict(lg.provenance)
    concretes = {language: _copy_concrete(c) for language, c in lg.concretes.items()}
    for from_cat, to_cat in pairs:
        for cat in (from_cat, to_cat):
            if cat not in lg.sig.categories:
                raise EmbedError(f"coercion names unknown category {cat!r}")
        fun = coercion_fun_name(from_cat, to_cat)
        if fun in functions:
            raise NameClash(fun, "coercion name already declared")
        layer = Layer.SEMANTIC if from_cat in lg.cnl_categories else Layer.SYNTACTIC
        functions[fun] = FunDecl(fun, (from_cat,), to_cat, lg.config.coercion, layer)
        provenance[fun] = "coercion"
        for language, conc in concretes.items():
            adapter = (adapters or {}).get(language)
            if adapter is not None and fun in adapter.linrules:
                conc.linrules[fun] = adapter.linrules[fun]
                continue
            rule = _auto_coercion_rule(fun, conc.lincats[from_cat], conc.lincats[to_cat])
            if rule is None:
                raise LincatIncompatible((from_cat, to_cat), language)
            conc.linrules[fun] = rule

    sig = AbstractSignature(lg.sig.categories, functions, lg.sig.start_category)
    return LayeredGrammar(
        sig=sig,
        concretes=concretes,
        provenance=provenance,
        config=lg.config,
        cnl_categories=lg.cnl_categories,
        suffix_funs=lg.suffix_funs,
    )


def _copy_concrete(conc: ConcreteGrammar) -> ConcreteGrammar:
    return ConcreteGrammar(
        name=conc.name,
        abstract_name=conc.abstract_name,
        params=dict(conc.params),
        lincats=dict(conc.lincats),
        linrules=dict(conc.linrules),
    )


def _auto_coercion_rule(fun: str, from_lt: LinType, to_lt: LinType) -> Optional[LinRule]:
    x = Arg(0, "x")
    if from_lt == to_lt:
        return LinRule(fun, ("x",), x)
    if isinstance(from_lt, RecordType) and isinstance(to_lt, RecordType):
        fields = []
        for name, ft in to_lt.fields:
            if from_lt.field(name) != ft:
                return None
            fields.append((name, Project(x, name)))
        return LinRule(fun, ("x",), RecordLit(tuple(fields)))
    return None
