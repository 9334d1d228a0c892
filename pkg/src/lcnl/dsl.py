"""The grammar definition language: abstract and concrete sources.

Abstract files declare categories and typed functions with optional cost
and layer annotations.  Concrete files map each category to a linearization
type (strings, records, finite tables) and each function to a linearization
rule over its arguments.  The language is deliberately small: no variants,
no pattern matching over strings beyond `strcase` on raw String arguments,
no user-defined operations.

Syntax sketch::

    abstract Demo {
      flags startcat = S ;
      cat S ;
      fun aged : Person -> Numeral -> Fact [layer=cnl, cost=0.2] ;
    }

    concrete DemoEng of Demo {
      param Number = Sg | Pl ;
      lincat Numeral = { s : Str ; n : Number } ;
      lin mkNumeral d = strcase d { "1" => { s = "one" ; n = Sg } ; _ => { s = d ; n = Pl } } ;
    }

Comments run from `--` to end of line.  Every declaration ends with `;`.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .core import AbstractSignature, FunDecl, Layer, STRING_TYPE, SignatureError

LAYER_NAMES = {
    "semantic": Layer.SEMANTIC,
    "cnl": Layer.SEMANTIC,
    "syntactic": Layer.SYNTACTIC,
    "host": Layer.SYNTACTIC,
    "word": Layer.WORD,
    "chunk": Layer.WORD,
    "neutral": Layer.NEUTRAL,
}


class GrammarError(Exception):
    """Base class for grammar-source errors."""


class GrammarSyntaxError(GrammarError):
    """Malformed grammar text; carries 1-based line and column."""

    def __init__(self, message: str, line: int, col: int):
        self.line = line
        self.col = col
        super().__init__(f"{message} (line {line}, column {col})")


@dataclass(frozen=True)
class Finding:
    """One validation failure; validation always reports all of them."""

    kind: str
    subject: str
    detail: str
    path: tuple[str, ...] = ()

    def __str__(self) -> str:
        where = "." + ".".join(self.path) if self.path else ""
        return f"{self.kind}: {self.subject}{where}: {self.detail}"


class GrammarValidationError(GrammarError):
    """Raised when a grammar is syntactically fine but semantically broken."""

    def __init__(self, findings: list[Finding]):
        self.findings = findings
        super().__init__("; ".join(str(f) for f in findings))


# === Linearization types ===

@dataclass(frozen=True)
class StrType:
    def __str__(self) -> str:
        return "Str"


@dataclass(frozen=True)
class ParamType:
    """A leaf holding one value of the named parameter type."""

    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class RecordType:
    """Fields are stored sorted by name so equality is order-insensitive."""

    fields: tuple[tuple[str, "LinType"], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "fields", tuple(sorted(self.fields, key=lambda kv: kv[0])))

    def field(self, name: str) -> Optional["LinType"]:
        for fname, ftype in self.fields:
            if fname == name:
                return ftype
        return None

    def __str__(self) -> str:
        inner = " ; ".join(f"{n} : {t}" for n, t in self.fields)
        return "{ " + inner + " }"


@dataclass(frozen=True)
class TableType:
    """A finite function from the values of a parameter type."""

    param: str
    value: "LinType"

    def __str__(self) -> str:
        return f"{self.param} => {self.value}"


LinType = Union[StrType, ParamType, RecordType, TableType]

STR = StrType()


# === Linearization expressions ===

@dataclass(frozen=True)
class StrLit:
    tokens: tuple[str, ...]


@dataclass(frozen=True)
class Concat:
    left: "LinExpr"
    right: "LinExpr"


@dataclass(frozen=True)
class Arg:
    """Reference to the rule's n-th argument by position."""

    index: int
    name: str


@dataclass(frozen=True)
class Project:
    expr: "LinExpr"
    field: str


@dataclass(frozen=True)
class Select:
    expr: "LinExpr"
    key: "LinExpr"


@dataclass(frozen=True)
class TableLit:
    """Branches are stored in parameter declaration order after validation."""

    branches: tuple[tuple[str, "LinExpr"], ...]


@dataclass(frozen=True)
class ParamLit:
    value: str


@dataclass(frozen=True)
class RecordLit:
    fields: tuple[tuple[str, "LinExpr"], ...]


@dataclass(frozen=True)
class StrCase:
    """Case analysis on a raw String argument.

    Branch keys are literal token strings.  The mandatory default branch
    handles every other token; inside it the scrutinee evaluates to the raw
    token, marked as guessed material for confidence reporting.
    """

    scrutinee: "LinExpr"
    branches: tuple[tuple[str, "LinExpr"], ...]
    default: "LinExpr"


@dataclass(frozen=True)
class Name:
    """Unresolved identifier; replaced by Arg or ParamLit after parsing."""

    ident: str
    line: int
    col: int


LinExpr = Union[StrLit, Concat, Arg, Project, Select, TableLit, ParamLit, RecordLit, StrCase, Name]


@dataclass(frozen=True)
class ParamTypeDecl:
    name: str
    values: tuple[str, ...]


@dataclass(frozen=True)
class LinRule:
    fun: str
    arg_names: tuple[str, ...]
    expr: LinExpr


@dataclass
class ConcreteGrammar:
    """One language's rendering of an abstract signature."""

    name: str
    abstract_name: str
    params: dict[str, ParamTypeDecl]
    lincats: dict[str, LinType]
    linrules: dict[str, LinRule]

    def value_owner(self) -> dict[str, str]:
        """Map each parameter value to the parameter type declaring it."""
        owner: dict[str, str] = {}
        for decl in self.params.values():
            for v in decl.values:
                owner[v] = decl.name
        return owner


# === Lexer ===

_PUNCT2 = ("->", "=>", "++", "--")
_PUNCT1 = "{}();:=|.!,[]_"


@dataclass(frozen=True)
class _Tok:
    kind: str  # ident | str | num | punct | eof
    value: str
    line: int
    col: int


def _lex(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    i = 0
    line, col = 1, 1
    n = len(text)

    def advance(k: int) -> None:
        nonlocal i, line, col
        for _ in range(k):
            if text[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    while i < n:
        c = text[i]
        if c.isspace():
            advance(1)
        elif text.startswith("--", i):
            while i < n and text[i] != "\n":
                advance(1)
        elif c == '"':
            sline, scol = line, col
            advance(1)
            out = []
            while i < n and text[i] != '"':
                if text[i] == "\\":
                    if i + 1 >= n or text[i + 1] not in '"\\':
                        raise GrammarSyntaxError("bad escape in string literal", line, col)
                    out.append(text[i + 1])
                    advance(2)
                else:
                    out.append(text[i])
                    advance(1)
            if i >= n:
                raise GrammarSyntaxError("unterminated string literal", sline, scol)
            advance(1)
            toks.append(_Tok("str", "".join(out), sline, scol))
        elif c.isdigit() or (c == "-" and i + 1 < n and text[i + 1].isdigit()):
            sline, scol = line, col
            start = i
            advance(1)
            while i < n and (text[i].isdigit() or text[i] == "."):
                advance(1)
            toks.append(_Tok("num", text[start:i], sline, scol))
        elif c.isalpha() or c == "_":
            sline, scol = line, col
            start = i
            while i < n and (text[i].isalnum() or text[i] == "_"):
                advance(1)
            word = text[start:i]
            if word == "_":
                toks.append(_Tok("punct", "_", sline, scol))
            else:
                toks.append(_Tok("ident", word, sline, scol))
        else:
            for p in _PUNCT2:
                if text.startswith(p, i):
                    if p == "--":
                        break  # handled above; unreachable
                    toks.append(_Tok("punct", p, line, col))
                    advance(2)
                    break
            else:
                if c in _PUNCT1:
                    toks.append(_Tok("punct", c, line, col))
                    advance(1)
                else:
                    raise GrammarSyntaxError(f"unexpected character {c!r}", line, col)
    toks.append(_Tok("eof", "", line, col))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _lex(text)
        self.pos = 0

    @property
    def cur(self) -> _Tok:
        return self.toks[self.pos]

    def error(self, message: str) -> GrammarSyntaxError:
        return GrammarSyntaxError(message, self.cur.line, self.cur.col)

    def take(self, kind: str, value: Optional[str] = None) -> _Tok:
        tok = self.cur
        if tok.kind != kind or (value is not None and tok.value != value):
            want = value if value is not None else kind
            raise self.error(f"expected {want!r}, found {tok.value!r}")
        self.pos += 1
        return tok

    def take_keyword(self, word: str) -> None:
        tok = self.cur
        if tok.kind != "ident" or tok.value != word:
            raise self.error(f"expected keyword {word!r}, found {tok.value!r}")
        self.pos += 1

    def at(self, kind: str, value: Optional[str] = None) -> bool:
        tok = self.cur
        return tok.kind == kind and (value is None or tok.value == value)

    def at_keyword(self, word: str) -> bool:
        return self.at("ident", word)


# === Abstract grammar parsing ===

def parse_abstract(text: str) -> AbstractSignature:
    """Parse an abstract grammar source into a signature.

    Syntax problems raise GrammarSyntaxError with line and column; semantic
    problems (duplicate names, unknown categories, negative costs) are all
    collected into one GrammarValidationError.
    """
    p = _Parser(text)
    p.take_keyword("abstract")
    p.take("ident")
    p.take("punct", "{")
    p.take_keyword("flags")
    p.take_keyword("startcat")
    p.take("punct", "=")
    start = p.take("ident").value
    p.take("punct", ";")

    findings: list[Finding] = []
    categories: list[str] = []
    funs: list[FunDecl] = []
    while not p.at("punct", "}"):
        if p.at_keyword("cat"):
            p.take_keyword("cat")
            name = p.take("ident").value
            p.take("punct", ";")
            if name in categories:
                findings.append(Finding("DuplicateName", name, "category declared twice"))
            else:
                categories.append(name)
        elif p.at_keyword("fun"):
            p.take_keyword("fun")
            name = p.take("ident").value
            p.take("punct", ":")
            types = [p.take("ident").value]
            while p.at("punct", "->"):
                p.take("punct", "->")
                types.append(p.take("ident").value)
            cost = 1.0
            layer = Layer.NEUTRAL
            if p.at("punct", "["):
                cost, layer = _parse_annotations(p, name, findings)
            p.take("punct", ";")
            if any(f.name == name for f in funs):
                findings.append(Finding("DuplicateName", name, "function declared twice"))
                continue
            funs.append(FunDecl(name, tuple(types[:-1]), types[-1], max(cost, 0.0), layer))
            if cost < 0:
                findings.append(Finding("NegativeCost", name, f"cost {cost} is negative"))
        else:
            raise p.error(f"expected 'cat' or 'fun', found {p.cur.value!r}")
    p.take("punct", "}")
    p.take("eof")

    catset = set(categories)
    for f in funs:
        for t in f.arg_types:
            if t != STRING_TYPE and t not in catset:
                findings.append(Finding("UnknownCategory", f.name, f"argument type {t!r} is not declared"))
        if f.result_type not in catset:
            findings.append(Finding("UnknownCategory", f.name, f"result type {f.result_type!r} is not declared"))
    if start not in catset:
        findings.append(Finding("UnknownCategory", start, "start category is not declared"))
    if findings:
        raise GrammarValidationError(findings)
    try:
        return AbstractSignature(frozenset(categories), {f.name: f for f in funs}, start)
    except SignatureError as exc:  # pragma: no cover - guarded by findings above
        raise GrammarValidationError([Finding("InvalidSignature", "", str(exc))])


def _parse_annotations(p: _Parser, fun: str, findings: list[Finding]) -> tuple[float, Layer]:
    cost = 1.0
    layer = Layer.NEUTRAL
    p.take("punct", "[")
    while True:
        key = p.take("ident").value
        p.take("punct", "=")
        if key == "cost":
            cost = float(p.take("num").value)
        elif key == "layer":
            word = p.take("ident").value
            if word not in LAYER_NAMES:
                findings.append(Finding("UnknownLayer", fun, f"unknown layer {word!r}"))
            else:
                layer = LAYER_NAMES[word]
        else:
            findings.append(Finding("UnknownAnnotation", fun, f"unknown annotation {key!r}"))
        if p.at("punct", ","):
            p.take("punct", ",")
            continue
        break
    p.take("punct", "]")
    return cost, layer


# === Concrete grammar parsing ===

def parse_concrete_source(text: str, extra_params: Optional[dict[str, ParamTypeDecl]] = None) -> ConcreteGrammar:
    """Parse concrete syntax without validating against any signature.

    Used directly for partial sources (coercion adapter fragments); full
    concretes go through parse_concrete which also validates.  extra_params
    supplies parameter types declared elsewhere so a fragment can mention
    their values; the fragment's own declarations take precedence.
    """
    p = _Parser(text)
    p.take_keyword("concrete")
    name = p.take("ident").value
    p.take_keyword("of")
    abs_name = p.take("ident").value
    p.take("punct", "{")
    params: dict[str, ParamTypeDecl] = {}
    lincats: dict[str, LinType] = {}
    linrules: dict[str, LinRule] = {}
    raw_rules: list[tuple[str, tuple[str, ...], LinExpr, _Tok]] = []
    while not p.at("punct", "}"):
        if p.at_keyword("param"):
            p.take_keyword("param")
            pname = p.take("ident").value
            p.take("punct", "=")
            values = [p.take("ident").value]
            while p.at("punct", "|"):
                p.take("punct", "|")
                values.append(p.take("ident").value)
            p.take("punct", ";")
            if pname in params:
                raise p.error(f"parameter type {pname!r} declared twice")
            params[pname] = ParamTypeDecl(pname, tuple(values))
        elif p.at_keyword("lincat"):
            p.take_keyword("lincat")
            cat = p.take("ident").value
            p.take("punct", "=")
            lt = _parse_lintype(p)
            p.take("punct", ";")
            if cat in lincats:
                raise p.error(f"lincat for {cat!r} declared twice")
            lincats[cat] = lt
        elif p.at_keyword("lin"):
            tok = p.cur
            p.take_keyword("lin")
            fun = p.take("ident").value
            arg_names = []
            while p.at("ident"):
                arg_names.append(p.take("ident").value)
            p.take("punct", "=")
            expr = _parse_linexpr(p)
            p.take("punct", ";")
            raw_rules.append((fun, tuple(arg_names), expr, tok))
        else:
            raise p.error(f"expected 'param', 'lincat' or 'lin', found {p.cur.value!r}")
    p.take("punct", "}")
    p.take("eof")

    conc = ConcreteGrammar(name, abs_name, params, lincats, {})
    owner: dict[str, str] = {}
    for decl in (extra_params or {}).values():
        for v in decl.values:
            owner[v] = decl.name
    owner.update(conc.value_owner())
    for fun, arg_names, expr, tok in raw_rules:
        if fun in linrules:
            raise GrammarSyntaxError(f"lin rule for {fun!r} declared twice", tok.line, tok.col)
        linrules[fun] = LinRule(fun, arg_names, _resolve(expr, arg_names, owner))
    conc.linrules = linrules
    return conc


def _parse_lintype(p: _Parser) -> LinType:
    left = _parse_lintype_atom(p)
    if p.at("punct", "=>"):
        p.take("punct", "=>")
        if not isinstance(left, ParamType):
            raise p.error("table key must be a parameter type name")
        return TableType(left.name, _parse_lintype(p))
    return left


def _parse_lintype_atom(p: _Parser) -> LinType:
    if p.at("ident", "Str"):
        p.take("ident")
        return STR
    if p.at("ident"):
        return ParamType(p.take("ident").value)
    if p.at("punct", "{"):
        p.take("punct", "{")
        fields = []
        while True:
            fname = p.take("ident").value
            p.take("punct", ":")
            fields.append((fname, _parse_lintype(p)))
            if p.at("punct", ";"):
                p.take("punct", ";")
                continue
            break
        p.take("punct", "}")
        return RecordType(tuple(fields))
    if p.at("punct", "("):
        p.take("punct", "(")
        lt = _parse_lintype(p)
        p.take("punct", ")")
        return lt
    raise p.error(f"expected a linearization type, found {p.cur.value!r}")


def _parse_linexpr(p: _Parser) -> LinExpr:
    expr = _parse_select(p)
    while p.at("punct", "++"):
        p.take("punct", "++")
        expr = Concat(expr, _parse_select(p))
    return expr


def _parse_select(p: _Parser) -> LinExpr:
    expr = _parse_postfix(p)
    while p.at("punct", "!"):
        p.take("punct", "!")
        expr = Select(expr, _parse_postfix(p))
    return expr


def _parse_postfix(p: _Parser) -> LinExpr:
    expr = _parse_primary(p)
    while p.at("punct", "."):
        p.take("punct", ".")
        expr = Project(expr, p.take("ident").value)
    return expr


def _parse_primary(p: _Parser) -> LinExpr:
    if p.at("str"):
        return StrLit(tuple(p.take("str").value.split()))
    if p.at_keyword("table"):
        p.take_keyword("table")
        p.take("punct", "{")
        branches = []
        while True:
            key = p.take("ident").value
            p.take("punct", "=>")
            branches.append((key, _parse_linexpr(p)))
            if p.at("punct", ";"):
                p.take("punct", ";")
                continue
            break
        p.take("punct", "}")
        return TableLit(tuple(branches))
    if p.at_keyword("strcase"):
        tok = p.cur
        p.take_keyword("strcase")
        scrutinee = Name(p.take("ident").value, tok.line, tok.col)
        p.take("punct", "{")
        branches = []
        default: Optional[LinExpr] = None
        while True:
            if p.at("punct", "_"):
                p.take("punct", "_")
                p.take("punct", "=>")
                default = _parse_linexpr(p)
            else:
                key = p.take("str").value
                p.take("punct", "=>")
                branches.append((key, _parse_linexpr(p)))
            if p.at("punct", ";"):
                p.take("punct", ";")
                continue
            break
        p.take("punct", "}")
        if default is None:
            raise p.error("strcase requires a default '_' branch")
        return StrCase(scrutinee, tuple(branches), default)
    if p.at("punct", "{"):
        p.take("punct", "{")
        fields = []
        while True:
            fname = p.take("ident").value
            p.take("punct", "=")
            fields.append((fname, _parse_linexpr(p)))
            if p.at("punct", ";"):
                p.take("punct", ";")
                continue
            break
        p.take("punct", "}")
        return RecordLit(tuple(fields))
    if p.at("punct", "("):
        p.take("punct", "(")
        expr = _parse_linexpr(p)
        p.take("punct", ")")
        return expr
    if p.at("ident"):
        tok = p.take("ident")
        return Name(tok.value, tok.line, tok.col)
    raise p.error(f"expected an expression, found {p.cur.value!r}")


def _resolve(expr: LinExpr, arg_names: tuple[str, ...], owner: dict[str, str]) -> LinExpr:
    """Replace Name nodes by argument references or parameter literals."""
    def go(e: LinExpr) -> LinExpr:
        if isinstance(e, Name):
            if e.ident in arg_names:
                return Arg(arg_names.index(e.ident), e.ident)
            if e.ident in owner:
                return ParamLit(e.ident)
            raise GrammarSyntaxError(f"unknown name {e.ident!r}", e.line, e.col)
        if isinstance(e, Concat):
            return Concat(go(e.left), go(e.right))
        if isinstance(e, Project):
            return Project(go(e.expr), e.field)
        if isinstance(e, Select):
            return Select(go(e.expr), go(e.key))
        if isinstance(e, TableLit):
            return TableLit(tuple((k, go(v)) for k, v in e.branches))
        if isinstance(e, RecordLit):
            return RecordLit(tuple((k, go(v)) for k, v in e.fields))
        if isinstance(e, StrCase):
            return StrCase(go(e.scrutinee), tuple((k, go(v)) for k, v in e.branches), go(e.default))
        return e
    return go(expr)


# === Validation ===

def validate_concrete(conc: ConcreteGrammar, sig: AbstractSignature) -> list[Finding]:
    """Check a concrete grammar against its signature, reporting every fault.

    Totality both ways (lincats over categories, linrules over functions),
    well-formedness of types, and full type-checking of every rule body.
    """
    findings: list[Finding] = []
    owner = conc.value_owner()

    seen_values: dict[str, str] = {}
    for decl in conc.params.values():
        for v in decl.values:
            if v in seen_values and seen_values[v] != decl.name:
                findings.append(Finding("DuplicateName", v, f"value declared by both {seen_values[v]} and {decl.name}"))
            seen_values[v] = decl.name

    for cat in sorted(sig.categories):
        if cat not in conc.lincats:
            findings.append(Finding("MissingLincat", cat, "no lincat declared"))
    for cat, lt in conc.lincats.items():
        if cat not in sig.categories:
            findings.append(Finding("UnknownCategory", cat, "lincat for undeclared category"))
        findings.extend(_check_lintype(lt, cat, conc, under_table=False))

    for fname in sorted(sig.functions):
        if fname not in conc.linrules:
            findings.append(Finding("MissingLinRule", fname, "no lin rule declared"))
    for fname, rule in conc.linrules.items():
        decl = sig.functions.get(fname)
        if decl is None:
            findings.append(Finding("UnknownFunction", fname, "lin rule for undeclared function"))
            continue
        if len(rule.arg_names) != decl.arity:
            findings.append(
                Finding("ArityMismatch", fname, f"rule binds {len(rule.arg_names)} arguments, declaration has {decl.arity}")
            )
            continue
        missing = [t for t in decl.arg_types + (decl.result_type,) if t != STRING_TYPE and t not in conc.lincats]
        if missing:
            continue  # already reported as MissingLincat
        checker = _RuleChecker(conc, sig, decl, findings)
        checker.check(rule)
    return findings


def _check_lintype(lt: LinType, cat: str, conc: ConcreteGrammar, under_table: bool, path: tuple[str, ...] = ()) -> list[Finding]:
    out: list[Finding] = []
    if isinstance(lt, ParamType):
        if lt.name not in conc.params:
            out.append(Finding("UnknownParam", cat, f"parameter type {lt.name!r} is not declared", path))
        elif under_table:
            out.append(Finding("ParamUnderTable", cat, "parameter fields may not occur inside table values", path))
    elif isinstance(lt, RecordType):
        names = [n for n, _ in lt.fields]
        for n in names:
            if names.count(n) > 1:
                out.append(Finding("DuplicateName", cat, f"record field {n!r} declared twice", path))
                break
        for n, ft in lt.fields:
            out.extend(_check_lintype(ft, cat, conc, under_table, path + (n,)))
    elif isinstance(lt, TableType):
        if lt.param not in conc.params:
            out.append(Finding("UnknownParam", cat, f"parameter type {lt.param!r} is not declared", path))
        out.extend(_check_lintype(lt.value, cat, conc, under_table=True, path=path + (f"!{lt.param}",)))
    return out


class _RuleChecker:
    """Type-checks one lin rule body; appends findings instead of raising."""

    def __init__(self, conc: ConcreteGrammar, sig: AbstractSignature, decl: FunDecl, findings: list[Finding]):
        self.conc = conc
        self.sig = sig
        self.decl = decl
        self.findings = findings
        self.owner = conc.value_owner()

    def fail(self, path: tuple[str, ...], expected: str, got: str) -> None:
        self.findings.append(Finding("LinTypeError", self.decl.name, f"expected {expected}, got {got}", path))

    def check(self, rule: LinRule) -> None:
        expected = self.conc.lincats[self.decl.result_type]
        got = self.infer(rule.expr, ())
        if got is not None and got != expected:
            self.fail((), str(expected), str(got))

    def arg_type(self, index: int) -> LinType:
        cat = self.decl.arg_types[index]
        if cat == STRING_TYPE:
            return STR
        return self.conc.lincats[cat]

    def infer(self, expr: LinExpr, path: tuple[str, ...]) -> Optional[LinType]:
        if isinstance(expr, StrLit):
            return STR
        if isinstance(expr, Arg):
            return self.arg_type(expr.index)
        if isinstance(expr, Concat):
            ok = True
            for side, e in (("left", expr.left), ("right", expr.right)):
                t = self.infer(e, path + (f"++{side}",))
                if t is None:
                    ok = False
                elif t != STR:
                    self.fail(path + (f"++{side}",), "Str", str(t))
                    ok = False
            return STR if ok else None
        if isinstance(expr, Project):
            t = self.infer(expr.expr, path + (expr.field,))
            if t is None:
                return None
            if not isinstance(t, RecordType):
                self.fail(path + (expr.field,), "a record", str(t))
                return None
            ft = t.field(expr.field)
            if ft is None:
                self.fail(path + (expr.field,), f"a record with field {expr.field!r}", str(t))
                return None
            return ft
        if isinstance(expr, Select):
            t = self.infer(expr.expr, path + ("!table",))
            kt = self.infer(expr.key, path + ("!key",))
            if t is None:
                return None
            if not isinstance(t, TableType):
                self.fail(path + ("!table",), "a table", str(t))
                return None
            if kt is not None and kt != ParamType(t.param):
                self.fail(path + ("!key",), t.param, str(kt))
            return t.value
        if isinstance(expr, ParamLit):
            p = self.owner.get(expr.value)
            if p is None:
                self.fail(path, "a declared parameter value", expr.value)
                return None
            return ParamType(p)
        if isinstance(expr, TableLit):
            return self.infer_table(expr, path)
        if isinstance(expr, RecordLit):
            fields = []
            ok = True
            for n, e in expr.fields:
                t = self.infer(e, path + (n,))
                if t is None:
                    ok = False
                else:
                    fields.append((n, t))
            names = [n for n, _ in expr.fields]
            if len(set(names)) != len(names):
                self.fail(path, "distinct record fields", "duplicate field")
                return None
            return RecordType(tuple(fields)) if ok else None
        if isinstance(expr, StrCase):
            return self.infer_strcase(expr, path)
        raise AssertionError(f"unresolved expression {expr!r}")

    def infer_table(self, expr: TableLit, path: tuple[str, ...]) -> Optional[LinType]:
        keys = [k for k, _ in expr.branches]
        owners = {self.owner.get(k) for k in keys}
        if None in owners or len(owners) != 1:
            self.fail(path, "branch keys of one parameter type", f"keys {keys}")
            return None
        param = owners.pop()
        assert param is not None
        declared = self.conc.params[param].values
        missing = [v for v in declared if v not in keys]
        if missing:
            self.fail(path, f"a branch for every {param} value", f"missing {missing[0]!r}")
            return None
        if len(set(keys)) != len(keys):
            self.fail(path, "distinct branch keys", "duplicate branch")
            return None
        vtype: Optional[LinType] = None
        ok = True
        for k, e in expr.branches:
            t = self.infer(e, path + (f"=>{k}",))
            if t is None:
                ok = False
            elif vtype is None:
                vtype = t
            elif t != vtype:
                self.fail(path + (f"=>{k}",), str(vtype), str(t))
                ok = False
        if not ok or vtype is None:
            return None
        # Canonical branch order is declaration order.
        by_key = dict(expr.branches)
        object.__setattr__(expr, "branches", tuple((v, by_key[v]) for v in declared))
        return TableType(param, vtype)

    def infer_strcase(self, expr: StrCase, path: tuple[str, ...]) -> Optional[LinType]:
        if not (isinstance(expr.scrutinee, Arg) and self.decl.arg_types[expr.scrutinee.index] == STRING_TYPE):
            self.fail(path, "a String argument as strcase scrutinee", "other expression")
            return None
        keys = [k for k, _ in expr.branches]
        if len(set(keys)) != len(keys):
            self.fail(path, "distinct strcase keys", "duplicate key")
            return None
        vtype: Optional[LinType] = None
        ok = True
        for k, e in list(expr.branches) + [("_", expr.default)]:
            t = self.infer(e, path + (f"=>{k}",))
            if t is None:
                ok = False
            elif vtype is None:
                vtype = t
            elif t != vtype:
                self.fail(path + (f"=>{k}",), str(vtype), str(t))
                ok = False
        return vtype if ok else None


def parse_concrete(text: str, sig: AbstractSignature) -> ConcreteGrammar:
    """Parse and validate a concrete grammar against a signature."""
    conc = parse_concrete_source(text)
    findings = validate_concrete(conc, sig)
    if findings:
        raise GrammarValidationError(findings)
    return conc
