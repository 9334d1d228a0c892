"""Translation pipeline over a layered grammar.

tokenize -> parse in the source language -> linearize the rank-1 tree in
the target language -> detokenize, carrying per-token provenance so every
output character lands in a confidence span: SEMANTIC for material the
controlled language analyzed, SYNTACTIC for host-grammar analyses, WORD
for chunked or guessed material, UNKNOWN for unanalyzed tokens.

Source-side spans and chunk boundaries come from re-linearizing the same
tree in the source language, whose tokens match the input by parse
soundness.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Optional

from .core import AbstractSignature, Layer, Tree, subtree_at
from .chart import GuessPolicy, ParseResult, default_policy, parse
from .dsl import ConcreteGrammar
from .embedding import LayeredGrammar
from .linearize import ProvToken, detokenize, linearize, tokenize
from .pmcfg import ParsingGrammar, compile_grammar


class TranslateError(Exception):
    pass


class UnknownLanguage(TranslateError):
    def __init__(self, language: str):
        self.language = language
        super().__init__(f"unknown language {language!r}")


class NoParse(TranslateError):
    def __init__(self, text: str):
        super().__init__(f"no analysis for {text!r}")


@dataclass(frozen=True)
class ConfidenceSpan:
    """One [start, end) character range of uniform confidence."""

    start: int
    end: int
    layer: Layer


@dataclass
class TranslationResult:
    source: str
    target: str
    tree: str
    cost: float
    spans: list[ConfidenceSpan]
    source_spans: list[ConfidenceSpan]
    chunk_boundaries: list[tuple[int, int]]
    alternatives: list[tuple[str, float]]

    def to_payload(self) -> dict:
        return {
            "source": self.source,
            "target": self.target,
            "tree": self.tree,
            "cost": self.cost,
            "spans": [{"start": s.start, "end": s.end, "layer": s.layer.value} for s in self.spans],
            "sourceSpans": [
                {"start": s.start, "end": s.end, "layer": s.layer.value} for s in self.source_spans
            ],
            "chunkBoundaries": [[s, e] for s, e in self.chunk_boundaries],
            "alternatives": [{"target": t, "cost": c} for t, c in self.alternatives],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_payload(), ensure_ascii=False, separators=(",", ":"))


@dataclass
class SourceAnnotation:
    spans: list[ConfidenceSpan]
    chunk_boundaries: list[tuple[int, int]]
    tree: str
    cost: float


class Translator:
    """Compiled, reusable pipeline over one layered grammar.

    Immutable once constructed; safe to share across threads.
    """

    def __init__(self, lg: LayeredGrammar, max_productions: int = 100000):
        self.lg = lg
        self.pgs: dict[str, ParsingGrammar] = {}
        self.policies: dict[str, GuessPolicy] = {}
        for language, conc in lg.concretes.items():
            pg = compile_grammar(lg.sig, conc, max_productions)
            self.pgs[language] = pg
            self.policies[language] = replace(
                lg.guess_policy(language), digit_funs=default_policy(pg).digit_funs
            )
        self._restricted: dict[str, tuple[ParsingGrammar, GuessPolicy]] = {}

    @property
    def languages(self) -> list[str]:
        return sorted(self.pgs)

    def _check_language(self, language: str) -> None:
        if language not in self.pgs:
            raise UnknownLanguage(language)

    def _chunkless(self, language: str) -> tuple[ParsingGrammar, GuessPolicy]:
        """Grammar variant without the chunk layer, for --no-chunks mode."""
        if language not in self._restricted:
            lg = self.lg
            dropped_kinds = {"chunk_marker", "chunk_cnl", "chunk_list", "use_chunks", "unknown_chunk"}
            keep = {
                name: decl
                for name, decl in lg.sig.functions.items()
                if lg.provenance.get(name) not in dropped_kinds
            }
            sig = AbstractSignature(lg.sig.categories, keep, lg.sig.start_category)
            conc = lg.concretes[language]
            slim = ConcreteGrammar(
                name=conc.name,
                abstract_name=conc.abstract_name,
                params=conc.params,
                lincats=conc.lincats,
                linrules={f: r for f, r in conc.linrules.items() if f in keep},
            )
            pg = compile_grammar(sig, slim)
            policy = replace(
                self.policies[language], unknown_fun=None, digit_funs=default_policy(pg).digit_funs
            )
            self._restricted[language] = (pg, policy)
        return self._restricted[language]

    def parse_text(self, text: str, language: str, k: int = 5, chunks: bool = True) -> ParseResult:
        self._check_language(language)
        tokens = tokenize(text)
        if chunks:
            return parse(self.pgs[language], tokens, self.lg.start_category, k, self.policies[language])
        pg, policy = self._chunkless(language)
        return parse(pg, tokens, self.lg.start_category, k, policy)

    def translate(
        self, text: str, src: str, tgt: str, k: int = 5, chunks: bool = True
    ) -> TranslationResult:
        self._check_language(src)
        self._check_language(tgt)
        if src == tgt:
            raise TranslateError("source and target language are the same")
        if not tokenize(text):
            return TranslationResult(text, "", "", 0.0, [], [], [], [])
        result = self.parse_text(text, src, k=k, chunks=chunks)
        if result.empty:
            raise NoParse(text)
        tree = result.raw[0]
        cost = result.trees[0][1]

        out_tokens = linearize(tree, self.lg.sig, self.lg.concretes[tgt])
        target, token_spans = detokenize([t.token for t in out_tokens])
        spans = self._merge_spans(tree, out_tokens, token_spans)

        annotation = self._annotate(tree, cost, text, src)

        alternatives: list[tuple[str, float]] = []
        for alt_tree, alt_cost in zip(result.raw[1:], (c for _, c in result.trees[1:])):
            alt_tokens = linearize(alt_tree, self.lg.sig, self.lg.concretes[tgt])
            alt_text, _ = detokenize([t.token for t in alt_tokens])
            alternatives.append((alt_text, alt_cost))

        return TranslationResult(
            source=text,
            target=target,
            tree=str(tree),
            cost=cost,
            spans=spans,
            source_spans=annotation.spans,
            chunk_boundaries=annotation.chunk_boundaries,
            alternatives=alternatives,
        )

    def annotate_source(self, text: str, src: str, k: int = 5) -> SourceAnnotation:
        """Confidence spans and chunk boundaries over the input itself."""
        self._check_language(src)
        if not tokenize(text):
            return SourceAnnotation([], [], "", 0.0)
        result = self.parse_text(text, src, k=k)
        if result.empty:
            raise NoParse(text)
        return self._annotate(result.raw[0], result.trees[0][1], text, src)

    # === Internals ===

    def _annotate(self, tree: Tree, cost: float, text: str, src: str) -> SourceAnnotation:
        src_tokens = linearize(tree, self.lg.sig, self.lg.concretes[src])
        offsets = _original_offsets(text, [t.token for t in src_tokens])
        if offsets is None:
            # Re-linearization drifted from the raw input; fall back to the
            # normalized rendering so offsets stay meaningful.
            _, offsets = detokenize([t.token for t in src_tokens])
        spans = self._merge_spans(tree, src_tokens, offsets)
        boundaries = self._chunk_boundaries(tree, src_tokens, offsets)
        return SourceAnnotation(spans, boundaries, str(tree), cost)

    def _token_layer(self, tree: Tree, pt: ProvToken) -> Layer:
        if pt.layer_override is not None:
            return pt.layer_override
        for depth in range(len(pt.source_path), -1, -1):
            node = subtree_at(tree, pt.source_path[:depth])
            if isinstance(node, str):
                continue
            if self.lg.provenance.get(node.fun) == "unknown_chunk":
                return Layer.UNKNOWN
            layer = self.lg.sig.functions[node.fun].layer
            if layer is not Layer.NEUTRAL:
                return layer
        return Layer.WORD

    def _merge_spans(
        self, tree: Tree, tokens: list[ProvToken], offsets: list[tuple[int, int]]
    ) -> list[ConfidenceSpan]:
        spans: list[ConfidenceSpan] = []
        for pt, (start, end) in zip(tokens, offsets):
            layer = self._token_layer(tree, pt)
            if spans and spans[-1].layer is layer:
                spans[-1] = ConfidenceSpan(spans[-1].start, end, layer)
            else:
                spans.append(ConfidenceSpan(start, end, layer))
        return spans

    def _chunk_boundaries(
        self, tree: Tree, tokens: list[ProvToken], offsets: list[tuple[int, int]]
    ) -> list[tuple[int, int]]:
        """One [start, end) pair per chunk-rooted subtree, in textual order."""
        groups: dict[tuple, tuple[int, int]] = {}
        order: list[tuple] = []
        for pt, (start, end) in zip(tokens, offsets):
            chunk_path = None
            for depth in range(len(pt.source_path), -1, -1):
                node = subtree_at(tree, pt.source_path[:depth])
                if isinstance(node, str):
                    continue
                if self.lg.is_chunk_producer(node.fun):
                    chunk_path = pt.source_path[:depth]
                    break
            if chunk_path is None:
                continue
            if chunk_path not in groups:
                groups[chunk_path] = (start, end)
                order.append(chunk_path)
            else:
                s, e = groups[chunk_path]
                groups[chunk_path] = (min(s, start), max(e, end))
        return sorted(groups[p] for p in order)


def _original_offsets(text: str, tokens: list[str]) -> Optional[list[tuple[int, int]]]:
    """Locate each token in the original text, left to right."""
    offsets: list[tuple[int, int]] = []
    cursor = 0
    for tok in tokens:
        idx = text.find(tok, cursor)
        if idx < 0:
            return None
        offsets.append((idx, idx + len(tok)))
        cursor = idx + len(tok)
    return offsets
