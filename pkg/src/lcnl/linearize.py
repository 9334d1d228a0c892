"""Evaluation of linearization rules over trees, with token provenance.

Every output token remembers the path of the tree node that produced it:
a literal belongs to the node whose rule text contains it, while tokens
that arrive through argument references keep the attribution of the child
that emitted them.  Confidence layering later resolves each token against
the layer tags along its source path.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .core import AbstractSignature, Layer, Path, Tree
from .dsl import (
    Arg,
    Concat,
    ConcreteGrammar,
    LinExpr,
    LinRule,
    ParamLit,
    Project,
    RecordLit,
    RecordType,
    Select,
    StrCase,
    StrLit,
    StrType,
    TableLit,
)


class LinearizeError(Exception):
    """Raised when a tree cannot be rendered by a concrete grammar."""


@dataclass(frozen=True)
class ProvToken:
    """One surface token plus the tree path of the node that emitted it.

    layer_override is set for guessed material (strcase default fallthrough),
    which reports word-level confidence regardless of the surrounding tree.
    """

    token: str
    source_path: Path
    layer_override: Optional[Layer] = None


@dataclass(frozen=True)
class StrValue:
    tokens: tuple[ProvToken, ...]


@dataclass(frozen=True)
class ParamValue:
    value: str


@dataclass(frozen=True)
class RecordValue:
    fields: dict[str, "LinValue"]


@dataclass(frozen=True)
class TableValue:
    branches: dict[str, "LinValue"]


LinValue = Union[StrValue, ParamValue, RecordValue, TableValue]


def eval_lin(tree: Tree, sig: AbstractSignature, conc: ConcreteGrammar, path: Path = ()) -> LinValue:
    """Evaluate a tree bottom-up; the result shape follows the root's lincat."""
    decl = sig.functions.get(tree.fun)
    if decl is None:
        raise LinearizeError(f"unknown function {tree.fun!r}")
    rule = conc.linrules.get(tree.fun)
    if rule is None:
        raise LinearizeError(f"no lin rule for {tree.fun!r} in {conc.name}")
    if len(tree.children) != decl.arity:
        raise LinearizeError(f"{tree.fun}: expected {decl.arity} arguments, got {len(tree.children)}")
    args: list[LinValue] = []
    for i, child in enumerate(tree.children):
        if isinstance(child, str):
            toks = tuple(ProvToken(t, path + (i,)) for t in child.split())
            args.append(StrValue(toks))
        else:
            args.append(eval_lin(child, sig, conc, path + (i,)))
    return _eval(rule.expr, args, path)


def _eval(expr: LinExpr, args: list[LinValue], path: Path) -> LinValue:
    if isinstance(expr, StrLit):
        return StrValue(tuple(ProvToken(t, path) for t in expr.tokens))
    if isinstance(expr, Arg):
        return args[expr.index]
    if isinstance(expr, Concat):
        left = _eval(expr.left, args, path)
        right = _eval(expr.right, args, path)
        if not isinstance(left, StrValue) or not isinstance(right, StrValue):
            raise LinearizeError("++ applied to non-string values")
        return StrValue(left.tokens + right.tokens)
    if isinstance(expr, Project):
        rec = _eval(expr.expr, args, path)
        if not isinstance(rec, RecordValue) or expr.field not in rec.fields:
            raise LinearizeError(f"projection .{expr.field} on non-record value")
        return rec.fields[expr.field]
    if isinstance(expr, Select):
        table = _eval(expr.expr, args, path)
        key = _eval(expr.key, args, path)
        if not isinstance(table, TableValue) or not isinstance(key, ParamValue):
            raise LinearizeError("! applied to non-table or non-parameter value")
        if key.value not in table.branches:
            raise LinearizeError(f"table has no branch for {key.value!r}")
        return table.branches[key.value]
    if isinstance(expr, ParamLit):
        return ParamValue(expr.value)
    if isinstance(expr, TableLit):
        return TableValue({k: _eval(v, args, path) for k, v in expr.branches})
    if isinstance(expr, RecordLit):
        return RecordValue({k: _eval(v, args, path) for k, v in expr.fields})
    if isinstance(expr, StrCase):
        return _eval_strcase(expr, args, path)
    raise LinearizeError(f"cannot evaluate {expr!r}")


def _eval_strcase(expr: StrCase, args: list[LinValue], path: Path) -> LinValue:
    assert isinstance(expr.scrutinee, Arg)
    scrutinee = args[expr.scrutinee.index]
    if not isinstance(scrutinee, StrValue):
        raise LinearizeError("strcase scrutinee is not a string value")
    if len(scrutinee.tokens) == 1:
        text = scrutinee.tokens[0].token
        for key, branch in expr.branches:
            if key == text:
                return _eval(branch, args, path)
    # Default branch: the raw token passes through as guessed material.
    marked = StrValue(
        tuple(ProvToken(t.token, t.source_path, Layer.WORD) for t in scrutinee.tokens)
    )
    patched = list(args)
    patched[expr.scrutinee.index] = marked
    return _eval(expr.default, patched, path)


def linearize(
    tree: Tree,
    sig: AbstractSignature,
    conc: ConcreteGrammar,
    start_field: str = "s",
) -> list[ProvToken]:
    """Render a tree to its token sequence via the start field.

    The start category's lincat must either be a plain Str or a record
    whose `s` field is a Str; anything else raises NoStartField.
    """
    value = eval_lin(tree, sig, conc)
    if isinstance(value, StrValue):
        return list(value.tokens)
    if isinstance(value, RecordValue):
        inner = value.fields.get(start_field)
        if isinstance(inner, StrValue):
            return list(inner.tokens)
    raise NoStartField(f"value of {tree.fun} has no string field {start_field!r}")


class NoStartField(LinearizeError):
    """The start category's lincat exposes no plain string to output."""


def lincat_has_start_field(lt: object, start_field: str = "s") -> bool:
    if isinstance(lt, StrType):
        return True
    if isinstance(lt, RecordType):
        return isinstance(lt.field(start_field), StrType)
    return False


# === Surface text ===

# Punctuation that binds to the preceding word: no space before it, and it
# is split from word ends by the tokenizer.
CLINGING_PUNCT = (".", "?", "!", ",")


def tokenize(text: str) -> list[str]:
    """Whitespace tokenization with terminal punctuation split off.

    Trailing '.', '?', '!', ',' become their own tokens; word-internal
    hyphens and apostrophes are preserved ("sixty-five" is one token).
    """
    tokens: list[str] = []
    for chunk in text.split():
        tail: list[str] = []
        while len(chunk) > 1 and chunk[-1] in CLINGING_PUNCT:
            tail.append(chunk[-1])
            chunk = chunk[:-1]
        if chunk:
            tokens.append(chunk)
        tokens.extend(reversed(tail))
    return tokens


def detokenize(tokens: list[str]) -> tuple[str, list[tuple[int, int]]]:
    """Join tokens with single spaces, attaching clinging punctuation.

    Returns the text and one [start, end) character span per token.
    """
    parts: list[str] = []
    spans: list[tuple[int, int]] = []
    pos = 0
    for i, tok in enumerate(tokens):
        if i > 0 and tok not in CLINGING_PUNCT:
            parts.append(" ")
            pos += 1
        start = pos
        parts.append(tok)
        pos += len(tok)
        spans.append((start, pos))
    return "".join(parts), spans
