"""Layered grammar translation engine.

A controlled language is embedded into a larger host grammar under a
shared start category; input the combined grammar cannot analyse whole
is covered by phrase chunks and per-token fallbacks.  Every translation
carries per-span confidence derived from which layer produced it.
"""

from .core import (
    AbstractSignature,
    FunDecl,
    Layer,
    Tree,
    TypedTree,
    check_tree,
    parse_tree,
    serialize_tree,
    tree_cost,
)
from .dsl import (
    ConcreteGrammar,
    Finding,
    GrammarError,
    GrammarSyntaxError,
    GrammarValidationError,
    parse_abstract,
    parse_concrete,
    parse_concrete_source,
    validate_concrete,
)
from .linearize import ProvToken, detokenize, linearize, tokenize
from .pmcfg import CompileError, ParamExplosionError, ParsingGrammar, compile_grammar
from .chart import GuessPolicy, ParseResult, default_policy, oov_hypotheses, parse
from .embedding import (
    CoercionCycle,
    EmbedError,
    EmbeddingConfig,
    InvalidCostPolicy,
    LayeredGrammar,
    LincatClash,
    NameClash,
    add_coercions,
    embed,
    find_coercion_cycle,
)
from .translate import (
    ConfidenceSpan,
    NoParse,
    SourceAnnotation,
    TranslationResult,
    Translator,
    UnknownLanguage,
)
from .packs import CorpusRow, GrammarPack, PackError, demo_pack_path, load_pack

__version__ = "0.1.0"

__all__ = [
    "AbstractSignature",
    "FunDecl",
    "Layer",
    "Tree",
    "TypedTree",
    "check_tree",
    "parse_tree",
    "serialize_tree",
    "tree_cost",
    "ConcreteGrammar",
    "Finding",
    "GrammarError",
    "GrammarSyntaxError",
    "GrammarValidationError",
    "parse_abstract",
    "parse_concrete",
    "parse_concrete_source",
    "validate_concrete",
    "ProvToken",
    "detokenize",
    "linearize",
    "tokenize",
    "CompileError",
    "ParamExplosionError",
    "ParsingGrammar",
    "compile_grammar",
    "GuessPolicy",
    "ParseResult",
    "default_policy",
    "oov_hypotheses",
    "parse",
    "CoercionCycle",
    "EmbedError",
    "EmbeddingConfig",
    "InvalidCostPolicy",
    "LayeredGrammar",
    "LincatClash",
    "NameClash",
    "add_coercions",
    "embed",
    "find_coercion_cycle",
    "ConfidenceSpan",
    "NoParse",
    "SourceAnnotation",
    "TranslationResult",
    "Translator",
    "UnknownLanguage",
    "CorpusRow",
    "GrammarPack",
    "PackError",
    "demo_pack_path",
    "load_pack",
    "__version__",
]
