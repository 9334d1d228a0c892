"""Command-line interface: compile, parse, linearize, translate, batch, serve."""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Optional

from .core import Layer, serialize_tree, CoreError
from .dsl import GrammarError
from .linearize import linearize, detokenize
from .packs import GrammarPack, PackError, demo_pack_path, load_pack
from .translate import NoParse, TranslateError, TranslationResult, Translator, UnknownLanguage

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PACK = 2
EXIT_NOPARSE = 3

_ANSI = {
    Layer.SEMANTIC: "\x1b[32m",
    Layer.SYNTACTIC: "\x1b[33m",
    Layer.WORD: "\x1b[31m",
    Layer.UNKNOWN: "\x1b[31m",
}
_RESET = "\x1b[0m"
_BRACKET = {
    Layer.SEMANTIC: "G",
    Layer.SYNTACTIC: "Y",
    Layer.WORD: "R",
    Layer.UNKNOWN: "R",
}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad flags; the contract wants 1."""

    def error(self, message):
        raise _UsageError(message)


def colorize(result: TranslationResult, no_color: bool = False) -> str:
    """Render the target text with per-span confidence marking.

    ANSI mode paints spans green/yellow/red; no_color wraps them in
    {G|...} / {Y|...} / {R|...} instead so tests can assert on plain text.
    """
    out = []
    pos = 0
    for span in result.spans:
        out.append(result.target[pos:span.start])
        piece = result.target[span.start:span.end]
        if no_color:
            out.append("{%s|%s}" % (_BRACKET[span.layer], piece))
        else:
            out.append(_ANSI[span.layer] + piece + _RESET)
        pos = span.end
    out.append(result.target[pos:])
    return "".join(out)


def _resolve_pack(arg: Optional[str]) -> Path:
    name = arg or os.environ.get("LCNL_PACK")
    if not name:
        raise _UsageError("no pack given and LCNL_PACK is not set")
    if name == "demo":
        return demo_pack_path()
    return Path(name)


def _load(arg: Optional[str]) -> GrammarPack:
    return load_pack(_resolve_pack(arg))


def _build_parser() -> _Parser:
    p = _Parser(prog="lcnl", description="layered grammar translation engine")
    sub = p.add_subparsers(dest="command", required=True)

    def pack_arg(sp):
        sp.add_argument("pack", nargs="?", default=None,
                        help="pack directory, or 'demo' (default: $LCNL_PACK)")

    sp = sub.add_parser("compile", help="load a pack and print grammar statistics")
    pack_arg(sp)

    sp = sub.add_parser("parse", help="print ranked trees for a sentence")
    pack_arg(sp)
    sp.add_argument("--lang", required=True)
    sp.add_argument("--k", type=int, default=5)
    sp.add_argument("--no-chunks", action="store_true")
    sp.add_argument("text")

    sp = sub.add_parser("linearize", help="render a serialized tree in a language")
    pack_arg(sp)
    sp.add_argument("--lang", required=True)
    sp.add_argument("tree")

    sp = sub.add_parser("translate", help="translate a sentence")
    pack_arg(sp)
    sp.add_argument("--from", dest="src", required=True)
    sp.add_argument("--to", dest="tgt", required=True)
    sp.add_argument("--k", type=int, default=5)
    sp.add_argument("--json", action="store_true")
    sp.add_argument("--no-color", action="store_true")
    sp.add_argument("--no-chunks", action="store_true")
    sp.add_argument("text")

    sp = sub.add_parser("batch", help="translate a file line by line")
    pack_arg(sp)
    sp.add_argument("--from", dest="src", required=True)
    sp.add_argument("--to", dest="tgt", required=True)
    sp.add_argument("--in", dest="infile", required=True)
    sp.add_argument("--out", dest="outfile", required=True)
    sp.add_argument("--no-chunks", action="store_true")

    sp = sub.add_parser("serve", help="run the HTTP service")
    pack_arg(sp)
    sp.add_argument("--port", type=int, default=8080)
    sp.add_argument("--host", default="127.0.0.1")
    return p


def _cmd_compile(args) -> int:
    pack = _load(args.pack)
    tr = Translator(pack.grammar)
    sig = pack.grammar.sig
    print(f"pack: {pack.name}")
    print(f"languages: {', '.join(pack.languages)}")
    print(f"categories: {len(sig.categories)}")
    print(f"functions: {len(sig.functions)}")
    for lang in pack.languages:
        print(f"productions[{lang}]: {len(tr.pgs[lang].productions)}")
    total = sum(len(rows) for rows in pack.corpora.values())
    print(f"corpus rows: {total}")
    return EXIT_OK


def _cmd_parse(args) -> int:
    pack = _load(args.pack)
    tr = Translator(pack.grammar)
    result = tr.parse_text(args.text, args.lang, k=args.k, chunks=not args.no_chunks)
    if result.empty:
        print("no parse", file=sys.stderr)
        return EXIT_NOPARSE
    for tree, cost in result.trees:
        print(f"{cost:g}\t{serialize_tree(tree)}")
    return EXIT_OK


def _cmd_linearize(args) -> int:
    pack = _load(args.pack)
    lg = pack.grammar
    if args.lang not in lg.concretes:
        raise UnknownLanguage(args.lang)
    from .core import parse_tree, check_tree

    tree = parse_tree(args.tree)
    check_tree(tree, lg.sig)
    tokens = linearize(tree, lg.sig, lg.concretes[args.lang])
    text, _ = detokenize([t.token for t in tokens])
    print(text)
    return EXIT_OK


def _cmd_translate(args) -> int:
    pack = _load(args.pack)
    tr = Translator(pack.grammar)
    result = tr.translate(args.text, args.src, args.tgt, k=args.k, chunks=not args.no_chunks)
    if args.json:
        print(result.to_json())
    else:
        print(colorize(result, no_color=args.no_color))
    return EXIT_OK


def _cmd_batch(args) -> int:
    pack = _load(args.pack)
    tr = Translator(pack.grammar)
    lines = Path(args.infile).read_text(encoding="utf-8").splitlines()
    out = []
    for line in lines:
        if not line.strip():
            out.append("")
            continue
        result = tr.translate(line, args.src, args.tgt, chunks=not args.no_chunks)
        out.append(result.target)
    Path(args.outfile).write_text("\n".join(out) + ("\n" if out else ""), encoding="utf-8")
    return EXIT_OK


def _cmd_serve(args) -> int:
    from .service import run_server

    pack = _load(args.pack)
    run_server(pack, host=args.host, port=args.port)
    return EXIT_OK


_VALUE_FLAGS = {"--from", "--to", "--k", "--lang", "--in", "--out", "--port", "--host"}


def _reorder(argv: list[str]) -> list[str]:
    """Move flags after positionals so `pack --from L text` parses.

    argparse cannot match two positional groups split by options when the
    first positional is optional; grouping them restores the documented
    call shape.
    """
    if not argv or argv[0].startswith("-"):
        return argv
    head, rest = argv[0], argv[1:]
    positionals: list[str] = []
    flags: list[str] = []
    i = 0
    while i < len(rest):
        tok = rest[i]
        if tok.startswith("--"):
            flags.append(tok)
            if tok in _VALUE_FLAGS and i + 1 < len(rest):
                flags.append(rest[i + 1])
                i += 1
        else:
            positionals.append(tok)
        i += 1
    return [head] + positionals + flags


def main(argv: Optional[list[str]] = None) -> int:
    parser = _build_parser()
    if argv is None:
        argv = sys.argv[1:]
    try:
        args = parser.parse_args(_reorder(list(argv)))
        handler = {
            "compile": _cmd_compile,
            "parse": _cmd_parse,
            "linearize": _cmd_linearize,
            "translate": _cmd_translate,
            "batch": _cmd_batch,
            "serve": _cmd_serve,
        }[args.command]
        return handler(args)
    except NoParse as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOPARSE
    except (_UsageError, TranslateError, CoreError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (PackError, GrammarError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PACK
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
