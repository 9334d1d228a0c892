"""Grammar pack loading.

A pack is a directory with a manifest.json naming the two abstract
grammars, per-language concrete files plus an optional glue fragment for
coercion rules, embedding settings, and any corpus TSVs under corpus/.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

from ..core import AbstractSignature
from ..dsl import (
    ConcreteGrammar,
    GrammarError,
    ParamTypeDecl,
    parse_abstract,
    parse_concrete_source,
    validate_concrete,
)
from ..embedding import EmbedError, EmbeddingConfig, LayeredGrammar, LincatClash, embed


class PackError(Exception):
    """A pack directory is missing pieces or one of its files is broken."""


@dataclass(frozen=True)
class CorpusRow:
    language: str
    text: str
    expected: str


@dataclass
class GrammarPack:
    name: str
    directory: Path
    grammar: LayeredGrammar
    corpora: dict[str, list[CorpusRow]] = field(default_factory=dict)

    @property
    def languages(self) -> list[str]:
        return self.grammar.languages


_COST_KEYS = {
    "useCnl": "use_cnl",
    "useHost": "use_host",
    "perChunk": "per_chunk",
    "coercion": "coercion",
    "unknown": "unknown_cost",
    "properName": "proper_name_cost",
    "suffix": "suffix_cost",
}


def demo_pack_path() -> Path:
    """Path of the packaged demo grammars."""
    return Path(str(resources.files("lcnl") / "packs" / "demo"))


def _read(directory: Path, rel: str) -> str:
    p = directory / rel
    try:
        return p.read_text(encoding="utf-8")
    except OSError as exc:
        raise PackError(f"{rel}: cannot read file: {exc}") from exc


def _parse_sig(directory: Path, rel: str) -> AbstractSignature:
    try:
        return parse_abstract(_read(directory, rel))
    except GrammarError as exc:
        raise PackError(f"{rel}: {exc}") from exc


def _parse_conc(
    directory: Path,
    rel: str,
    sig: AbstractSignature,
    extra_params: Optional[dict[str, ParamTypeDecl]] = None,
) -> ConcreteGrammar:
    try:
        conc = parse_concrete_source(_read(directory, rel), extra_params=extra_params)
    except GrammarError as exc:
        raise PackError(f"{rel}: {exc}") from exc
    findings = validate_concrete(conc, sig)
    if findings:
        lines = "; ".join(str(f) for f in findings)
        raise PackError(f"{rel}: {lines}")
    return conc


def _parse_glue(directory: Path, rel: str, params: dict[str, ParamTypeDecl]) -> ConcreteGrammar:
    try:
        return parse_concrete_source(_read(directory, rel), extra_params=params)
    except GrammarError as exc:
        raise PackError(f"{rel}: {exc}") from exc


def _load_corpora(directory: Path) -> dict[str, list[CorpusRow]]:
    corpora: dict[str, list[CorpusRow]] = {}
    corpus_dir = directory / "corpus"
    if not corpus_dir.is_dir():
        return corpora
    for path in sorted(corpus_dir.glob("*.tsv")):
        rows: list[CorpusRow] = []
        for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
            if not line.strip() or line.startswith("#"):
                continue
            cols = line.split("\t")
            if len(cols) != 3:
                raise PackError(f"corpus/{path.name}:{lineno}: expected 3 tab-separated columns, got {len(cols)}")
            rows.append(CorpusRow(cols[0], cols[1], cols[2]))
        corpora[path.stem] = rows
    return corpora


def load_pack(directory: Path | str) -> GrammarPack:
    """Load and embed the grammars of a pack directory.

    Raises PackError with the offending filename on any malformed piece.
    """
    directory = Path(directory)
    manifest_path = directory / "manifest.json"
    if not manifest_path.is_file():
        raise PackError(f"manifest.json not found in {directory}")
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise PackError(f"manifest.json: {exc}") from exc

    for key in ("name", "abstract", "languages", "cnl_start", "host_start"):
        if key not in manifest:
            raise PackError(f"manifest.json: missing key {key!r}")

    cnl_sig = _parse_sig(directory, manifest["abstract"]["cnl"])
    host_sig = _parse_sig(directory, manifest["abstract"]["host"])

    cnl_concs: dict[str, ConcreteGrammar] = {}
    host_concs: dict[str, ConcreteGrammar] = {}
    adapters: dict[str, ConcreteGrammar] = {}
    for entry in manifest["languages"]:
        lang = entry["id"]
        files = entry["concrete"]
        cnl_concs[lang] = _parse_conc(directory, files["cnl"], cnl_sig)
        host_concs[lang] = _parse_conc(directory, files["host"], host_sig)
        # Categories the two grammars share must agree on their lincat, or
        # merging would silently pick one; report the host file by name.
        for cat in sorted(set(cnl_concs[lang].lincats) & set(host_concs[lang].lincats)):
            if cnl_concs[lang].lincats[cat] != host_concs[lang].lincats[cat]:
                raise PackError(f"{files['host']}: {LincatClash(cat, lang)}")
        if "glue" in files:
            merged = dict(cnl_concs[lang].params)
            merged.update(host_concs[lang].params)
            adapters[lang] = _parse_glue(directory, files["glue"], merged)

    costs = manifest.get("costs", {})
    unknown_cost_keys = set(costs) - set(_COST_KEYS)
    if unknown_cost_keys:
        raise PackError(f"manifest.json: unknown cost keys {sorted(unknown_cost_keys)}")
    guessers = manifest.get("guessers", {})
    cfg = EmbeddingConfig(
        cnl_start=manifest["cnl_start"],
        host_start=manifest["host_start"],
        chunk_categories=tuple(manifest.get("chunk_categories", ())),
        coercions=tuple((a, b) for a, b in manifest.get("coercions", ())),
        proper_name_category=guessers.get("proper_name"),
        suffix_guessers=tuple(
            (row["language"], row["suffix"], row["category"])
            for row in guessers.get("suffixes", ())
        ),
        **{_COST_KEYS[k]: float(v) for k, v in costs.items()},
    )

    try:
        grammar = embed((cnl_sig, cnl_concs), (host_sig, host_concs), cfg, adapters=adapters or None)
    except (GrammarError, EmbedError) as exc:
        raise PackError(f"embedding failed: {exc}") from exc

    return GrammarPack(
        name=manifest["name"],
        directory=directory,
        grammar=grammar,
        corpora=_load_corpora(directory),
    )
