"""Typed abstract syntax: categories, function declarations, trees.

The abstract layer is the language-neutral half of a grammar.  A signature
declares categories and typed constructor functions; trees are applications
of those functions.  Everything here is immutable and free of linearization
concerns, so the same tree can be rendered by any concrete grammar.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Optional, Union

IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")

# Built-in argument type for raw string leaves (digit strings, guessed words).
STRING_TYPE = "String"


class Layer(Enum):
    """Confidence layer attached to functions and, later, to output spans.

    NEUTRAL means "inherit from the nearest tagged ancestor" and only ever
    appears on function declarations.  UNKNOWN only ever appears on output
    spans, for tokens produced by unknown-chunk fallback hypotheses.
    """

    SEMANTIC = "semantic"
    SYNTACTIC = "syntactic"
    WORD = "word"
    NEUTRAL = "neutral"
    UNKNOWN = "unknown"


# Layers a function declaration may carry.
FUN_LAYERS = (Layer.SEMANTIC, Layer.SYNTACTIC, Layer.WORD, Layer.NEUTRAL)
# Layers an output span may carry.
SPAN_LAYERS = (Layer.SEMANTIC, Layer.SYNTACTIC, Layer.WORD, Layer.UNKNOWN)


class CoreError(Exception):
    """Base class for errors raised by the abstract-syntax layer."""


class SignatureError(CoreError):
    """Raised when a signature is internally inconsistent."""


@dataclass(frozen=True)
class FunDecl:
    """A typed constructor: name : arg_types -> result_type.

    cost is a non-negative preference weight (lower is preferred); layer
    tags the function's output material for confidence reporting.
    """

    name: str
    arg_types: tuple[str, ...]
    result_type: str
    cost: float = 1.0
    layer: Layer = Layer.NEUTRAL

    def __post_init__(self) -> None:
        if not IDENT_RE.match(self.name):
            raise SignatureError(f"invalid function name {self.name!r}")
        if self.cost < 0:
            raise SignatureError(f"function {self.name}: negative cost {self.cost}")
        if self.layer not in FUN_LAYERS:
            raise SignatureError(f"function {self.name}: layer {self.layer} not allowed on declarations")

    @property
    def arity(self) -> int:
        return len(self.arg_types)


@dataclass(frozen=True)
class AbstractSignature:
    """A set of categories plus uniquely named functions over them."""

    categories: frozenset[str]
    functions: dict[str, FunDecl]
    start_category: str

    def __post_init__(self) -> None:
        for cat in self.categories:
            if not IDENT_RE.match(cat):
                raise SignatureError(f"invalid category name {cat!r}")
        if self.start_category not in self.categories:
            raise SignatureError(f"start category {self.start_category!r} is not declared")
        for fun in self.functions.values():
            if fun.result_type not in self.categories:
                raise SignatureError(f"function {fun.name}: result {fun.result_type!r} is not a declared category")
            for arg in fun.arg_types:
                if arg != STRING_TYPE and arg not in self.categories:
                    raise SignatureError(f"function {fun.name}: argument {arg!r} is not a declared category")

    def functions_by_result(self, category: str) -> list[FunDecl]:
        return [f for f in self.functions.values() if f.result_type == category]


# A tree child is either a subtree or a raw string leaf (String-typed slot).
Child = Union["Tree", str]


@dataclass(frozen=True)
class Tree:
    """An application of a named function to child trees or string leaves."""

    fun: str
    children: tuple[Child, ...] = ()

    def __str__(self) -> str:
        return serialize_tree(self)


@dataclass(frozen=True)
class TypedTree:
    """A tree annotated with its category at every node."""

    fun: str
    children: tuple[Union["TypedTree", str], ...]
    category: str


Path = tuple[int, ...]


@dataclass(frozen=True)
class TypeIssue:
    """One problem found while checking a tree against a signature."""

    kind: str  # "UnknownFunction" | "ArityMismatch" | "CategoryMismatch"
    path: Path
    detail: str


class TreeTypeError(CoreError):
    """Raised by check_tree; carries the full list of issues found."""

    def __init__(self, issues: list[TypeIssue]):
        self.issues = issues
        super().__init__("; ".join(f"{i.kind} at {list(i.path)}: {i.detail}" for i in issues))


def check_tree(tree: Tree, sig: AbstractSignature, expected: Optional[str] = None) -> TypedTree:
    """Type-check a tree, returning it annotated with categories.

    All problems are collected before raising, so a single failed check
    reports every undeclared function, arity error, and category mismatch
    in the tree rather than just the first.
    """
    issues: list[TypeIssue] = []
    typed = _check(tree, sig, expected, (), issues)
    if issues:
        raise TreeTypeError(issues)
    assert typed is not None
    return typed


def _check(
    node: Child,
    sig: AbstractSignature,
    expected: Optional[str],
    path: Path,
    issues: list[TypeIssue],
) -> Optional[Union[TypedTree, str]]:
    if isinstance(node, str):
        if expected is not None and expected != STRING_TYPE:
            issues.append(TypeIssue("CategoryMismatch", path, f"expected {expected}, got string literal"))
            return None
        return node
    decl = sig.functions.get(node.fun)
    if decl is None:
        issues.append(TypeIssue("UnknownFunction", path, node.fun))
        # Still visit children so every bad node below gets reported.
        for i, child in enumerate(node.children):
            _check(child, sig, None, path + (i,), issues)
        return None
    if expected is not None and decl.result_type != expected:
        issues.append(
            TypeIssue("CategoryMismatch", path, f"expected {expected}, got {decl.result_type}")
        )
    if len(node.children) != decl.arity:
        issues.append(
            TypeIssue("ArityMismatch", path, f"{node.fun} expects {decl.arity} arguments, got {len(node.children)}")
        )
        for i, child in enumerate(node.children):
            _check(child, sig, None, path + (i,), issues)
        return None
    typed_children = []
    for i, (child, arg_type) in enumerate(zip(node.children, decl.arg_types)):
        if arg_type == STRING_TYPE and not isinstance(child, str):
            issues.append(TypeIssue("CategoryMismatch", path + (i,), "expected String, got tree"))
            continue
        typed_child = _check(child, sig, arg_type, path + (i,), issues)
        if typed_child is not None:
            typed_children.append(typed_child)
    if issues:
        return None
    return TypedTree(node.fun, tuple(typed_children), decl.result_type)


def tree_cost(tree: Tree, sig: AbstractSignature) -> float:
    """Sum of declared function costs over all nodes of the tree."""
    total = 0.0
    stack: list[Child] = [tree]
    while stack:
        node = stack.pop()
        if isinstance(node, str):
            continue
        decl = sig.functions.get(node.fun)
        if decl is None:
            raise TreeTypeError([TypeIssue("UnknownFunction", (), node.fun)])
        total += decl.cost
        stack.extend(node.children)
    return total


def iter_nodes(tree: Tree, path: Path = ()) -> Iterator[tuple[Path, Tree]]:
    """Yield (path, node) for every function node, preorder."""
    yield path, tree
    for i, child in enumerate(tree.children):
        if isinstance(child, Tree):
            yield from iter_nodes(child, path + (i,))


def subtree_at(tree: Tree, path: Path) -> Child:
    node: Child = tree
    for i in path:
        assert isinstance(node, Tree)
        node = node.children[i]
    return node


# === Canonical text form ===

def _quote(literal: str) -> str:
    return '"' + literal.replace("\\", "\\\\").replace('"', '\\"') + '"'


def serialize_tree(tree: Child) -> str:
    """Render a tree in fully parenthesized prefix form.

    Applications print as (fun child ...); zero-argument functions print as
    bare names and string leaves as double-quoted literals.
    """
    if isinstance(tree, str):
        return _quote(tree)
    if not tree.children:
        return tree.fun
    return "(" + " ".join([tree.fun] + [serialize_tree(c) for c in tree.children]) + ")"


class TreeSyntaxError(CoreError):
    """Raised on malformed tree text; offset is a character index."""

    def __init__(self, message: str, offset: int):
        self.offset = offset
        super().__init__(f"{message} (at offset {offset})")


def _lex_tree(text: str) -> list[tuple[str, str, int]]:
    """Tokenize tree text into (kind, value, offset) triples."""
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
        elif c in "()":
            tokens.append((c, c, i))
            i += 1
        elif c == '"':
            start = i
            i += 1
            out = []
            while i < n and text[i] != '"':
                if text[i] == "\\":
                    if i + 1 >= n or text[i + 1] not in '"\\':
                        raise TreeSyntaxError("bad escape in string literal", i)
                    out.append(text[i + 1])
                    i += 2
                else:
                    out.append(text[i])
                    i += 1
            if i >= n:
                raise TreeSyntaxError("unterminated string literal", start)
            tokens.append(("str", "".join(out), start))
            i += 1
        else:
            start = i
            while i < n and not text[i].isspace() and text[i] not in '()"':
                i += 1
            name = text[start:i]
            if not IDENT_RE.match(name):
                raise TreeSyntaxError(f"invalid name {name!r}", start)
            tokens.append(("name", name, start))
    return tokens


def parse_tree(text: str) -> Child:
    """Parse the canonical prefix form back into a tree.

    Inverse of serialize_tree: parse_tree(serialize_tree(t)) == t for every
    tree, including string leaves with quote and backslash escapes.
    """
    tokens = _lex_tree(text)
    if not tokens:
        raise TreeSyntaxError("empty input", 0)
    pos = 0

    def parse_node() -> Child:
        nonlocal pos
        kind, value, offset = tokens[pos]
        if kind == "str":
            pos += 1
            return value
        if kind == "name":
            pos += 1
            return Tree(value)
        if kind == "(":
            pos += 1
            if pos >= len(tokens) or tokens[pos][0] != "name":
                raise TreeSyntaxError("expected function name after '('", tokens[min(pos, len(tokens) - 1)][2])
            fun = tokens[pos][1]
            pos += 1
            children: list[Child] = []
            while pos < len(tokens) and tokens[pos][0] != ")":
                children.append(parse_node())
            if pos >= len(tokens):
                raise TreeSyntaxError("missing ')'", len(text))
            pos += 1
            return Tree(fun, tuple(children))
        raise TreeSyntaxError("unexpected ')'", offset)

    result = parse_node()
    if pos != len(tokens):
        raise TreeSyntaxError("trailing input after tree", tokens[pos][2])
    return result
