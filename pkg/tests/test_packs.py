"""Pack loading, manifest validation, and the bundled demo corpora."""

import json
import shutil

import pytest

from lcnl.core import parse_tree
from lcnl.packs import PackError, demo_pack_path, load_pack

from conftest import OTHER


def copy_demo(tmp_path):
    dest = tmp_path / "pack"
    shutil.copytree(demo_pack_path(), dest)
    return dest


class TestDemoPack:
    def test_loads_with_two_languages(self, demo_pack):
        assert demo_pack.name == "demo"
        assert demo_pack.languages == ["eng", "fra"]

    def test_cnl_suite_is_large_enough(self, demo_pack):
        assert len(demo_pack.corpora["cnl_suite"]) >= 30

    def test_parse_suites_match_rank_one(self, demo_pack, translator):
        for suite in ("cnl_suite", "host_suite", "chunk_suite"):
            for row in demo_pack.corpora[suite]:
                res = translator.parse_text(row.text, row.language, k=1)
                assert not res.empty, (suite, row.text)
                got = str(res.raw[0])
                assert got == row.expected, (suite, row.text, got)
                # The expectation itself must be well-formed.
                parse_tree(row.expected)

    def test_golden_translations_round_trip(self, demo_pack, translator):
        for row in demo_pack.corpora["golden_translations"]:
            res = translator.translate(row.text, row.language, OTHER[row.language])
            assert res.target == row.expected, (row.language, row.text, res.target)


class TestLoaderErrors:
    def test_missing_manifest(self, tmp_path):
        with pytest.raises(PackError) as exc:
            load_pack(tmp_path)
        assert "manifest.json" in str(exc.value)

    def test_missing_manifest_key(self, tmp_path):
        pack = copy_demo(tmp_path)
        manifest = json.loads((pack / "manifest.json").read_text())
        del manifest["cnl_start"]
        (pack / "manifest.json").write_text(json.dumps(manifest))
        with pytest.raises(PackError) as exc:
            load_pack(pack)
        assert "cnl_start" in str(exc.value)

    def test_unknown_cost_key(self, tmp_path):
        pack = copy_demo(tmp_path)
        manifest = json.loads((pack / "manifest.json").read_text())
        manifest["costs"]["bogus"] = 1.0
        (pack / "manifest.json").write_text(json.dumps(manifest))
        with pytest.raises(PackError) as exc:
            load_pack(pack)
        assert "bogus" in str(exc.value)

    def test_syntax_error_names_the_file(self, tmp_path):
        pack = copy_demo(tmp_path)
        path = pack / "host.lcg"
        path.write_text(path.read_text().replace("abstract", "abstractt", 1))
        with pytest.raises(PackError) as exc:
            load_pack(pack)
        assert "host.lcg" in str(exc.value)

    def test_seeded_lincat_clash_names_the_file(self, tmp_path):
        # Numeral is declared by both grammars; widening it on the
        # controlled-language side stays internally valid (the extra field
        # is simply never projected) but must be caught before embedding.
        pack = copy_demo(tmp_path)
        path = pack / "cnl_eng.lcg"
        src = path.read_text().replace(
            "lincat Numeral = {s : Str} ;", "lincat Numeral = {s : Str ; x : Str} ;"
        )
        assert src != path.read_text()
        path.write_text(src)
        with pytest.raises(PackError) as exc:
            load_pack(pack)
        msg = str(exc.value)
        assert "host_eng.lcg" in msg and "Numeral" in msg

    def test_malformed_corpus_row_names_file_and_line(self, tmp_path):
        pack = copy_demo(tmp_path)
        suite = pack / "corpus" / "cnl_suite.tsv"
        lines = suite.read_text().splitlines()
        lines.insert(3, "eng\tonly two columns")
        suite.write_text("\n".join(lines))
        with pytest.raises(PackError) as exc:
            load_pack(pack)
        assert "cnl_suite.tsv:4" in str(exc.value)

    def test_broken_glue_names_the_file(self, tmp_path):
        pack = copy_demo(tmp_path)
        glue = pack / "glue_eng.lcg"
        glue.write_text(glue.read_text().replace("lin np2person", "lin ", 1))
        with pytest.raises(PackError) as exc:
            load_pack(pack)
        assert "glue_eng.lcg" in str(exc.value)

    def test_validation_failure_names_the_file(self, tmp_path):
        pack = copy_demo(tmp_path)
        conc = pack / "host_fra.lcg"
        # Drop one lin rule: totality validation must flag the file.
        src = conc.read_text()
        assert "lin positivePol = {p = Pos} ;" in src
        conc.write_text(src.replace("lin positivePol = {p = Pos} ;", ""))
        with pytest.raises(PackError) as exc:
            load_pack(pack)
        msg = str(exc.value)
        assert "host_fra.lcg" in msg and "positivePol" in msg


class TestCorpusFormat:
    def test_comments_and_blank_lines_are_skipped(self, tmp_path):
        pack = copy_demo(tmp_path)
        suite = pack / "corpus" / "host_suite.tsv"
        original_rows = len(load_pack(pack).corpora["host_suite"])
        suite.write_text("# a comment\n\n" + suite.read_text())
        assert len(load_pack(pack).corpora["host_suite"]) == original_rows

    def test_rows_keep_corpus_order(self, demo_pack):
        rows = demo_pack.corpora["golden_translations"]
        assert rows[0].language in ("eng", "fra")
        assert all("\t" not in r.text for r in rows)
