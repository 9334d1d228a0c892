"""Compilation of grammar rules to parameter-free string productions."""

import random

import pytest

from lcnl.core import Tree, parse_tree
from lcnl.dsl import parse_abstract, parse_concrete
from lcnl.pmcfg import (
    ArgRef,
    Lit,
    ParamExplosionError,
    PNonterminal,
    compile_grammar,
)
from lcnl.chart import default_policy
from lcnl.linearize import linearize

import oracles


def toy(abstract, concrete, **kw):
    sig = parse_abstract(abstract)
    return compile_grammar(sig, parse_concrete(concrete, sig), **kw)


PARAM_AB = """
abstract t { flags startcat = A ;
  cat A ; cat B ;
  fun mk : B -> A ;
  fun b0 : B ;
}
"""

PARAM_CC = """
concrete te of t {
  param Num = Sg | Pl ;
  lincat A = Str ;
  lincat B = { s : Num => Str } ;
  lin mk x = x.s ! Sg ;
  lin b0 = { s = table { Sg => "ox" ; Pl => "oxen" } } ;
}
"""


FIELD_CC = """
concrete tf of t {
  param Num = Sg | Pl ;
  lincat A = Str ;
  lincat B = { s : Str ; n : Num } ;
  lin mk x = x.s ;
  lin b0 = { s = "ox" ; n = Sg } ;
}
"""


class TestParameterExpansion:
    def test_no_params_one_production_each(self):
        pg = toy(
            "abstract t { flags startcat = A ; cat A ; fun a0 : A ; }",
            'concrete te of t { lincat A = Str ; lin a0 = "hi" ; }',
        )
        assert len(pg.productions) == 1

    def test_table_lincat_flattens_to_string_components(self):
        # A table over a two-value parameter yields one nonterminal with
        # two string components, not two nonterminals.
        pg = toy(PARAM_AB, PARAM_CC)
        assert pg.nonterminals("B") == [PNonterminal("B", ())]
        (prod,) = [p for p in pg.productions if p.fun == "b0"]
        assert prod.components == ((Lit("ox"),), (Lit("oxen"),))

    def test_param_field_splits_nonterminals(self):
        pg = toy(PARAM_AB, FIELD_CC)
        assert len(pg.nonterminals("B")) == 2
        # b0 pins n = Sg, so only the Sg nonterminal gets its production.
        (b_prod,) = [p for p in pg.productions if p.fun == "b0"]
        assert b_prod.lhs == PNonterminal("B", ("Sg",))
        # mk does not constrain n: one production per B assignment.
        mk_prods = [p for p in pg.productions if p.fun == "mk"]
        assert {p.rhs[0] for p in mk_prods} == set(pg.nonterminals("B"))

    def test_selection_reads_the_right_component(self):
        pg = toy(PARAM_AB, PARAM_CC)
        for prod in pg.productions:
            if prod.fun != "mk":
                continue
            ((item,),) = prod.components
            assert isinstance(item, ArgRef)
            # mk always reads the component holding the Sg form.
            shape = pg.shapes["B"]
            assert shape.str_paths[item.comp] == (("f", "s"), ("k", "Sg"))

    def test_explosion_guard(self):
        with pytest.raises(ParamExplosionError):
            toy(PARAM_AB, FIELD_CC, max_productions=2)


class TestStrcase:
    def test_keys_become_productions_and_default_a_template(self, translator):
        pg = translator.pgs["eng"]
        key_prods = [p for p in pg.productions if p.fun == "mkNumeral"]
        # One production per spelled-out numeral key.
        assert len(key_prods) == 69
        assert any(p.components[0][0] == Lit("sixty-five") for p in key_prods)
        template = pg.templates["mkNumeral"]
        assert template.excluded_keys == frozenset(str(i) for i in range(1, 70))

    def test_instantiate_rejects_covered_keys(self, translator):
        pg = translator.pgs["eng"]
        assert pg.instantiate("mkNumeral", "65") == []
        prods = pg.instantiate("mkNumeral", "947")
        assert prods and prods[0].components[0] == (Lit("947"),)

    def test_digit_templates_autodetected(self, translator):
        for lang in ("eng", "fra"):
            assert "mkNumeral" in default_policy(translator.pgs[lang]).digit_funs
        # Unknown-chunk and guess templates accept arbitrary tokens, so they
        # must not be mistaken for digit passthroughs.
        assert "UnknownChunk" not in default_policy(translator.pgs["eng"]).digit_funs

    def test_instantiated_production_carries_string_arg(self, translator):
        pg = translator.pgs["eng"]
        prods = pg.instantiate("UnknownChunk", "blorks")
        assert prods
        for p in prods:
            assert ("str", "blorks") in p.args_template


class TestMayEmpty:
    def test_french_first_person_surface_is_empty(self, translator):
        # The French CNL fuses first person into the verb form, leaving the
        # pronoun's own string component empty.
        pg = translator.pgs["fra"]
        empties = {(nt.cat, comp) for nt, comp in pg.may_empty}
        assert any(cat == "Person" for cat, comp in empties)

    def test_english_has_no_empty_person(self, translator):
        pg = translator.pgs["eng"]
        empties = {(nt.cat, comp) for nt, comp in pg.may_empty}
        assert not any(cat == "Person" for cat, comp in empties)


class TestReplay:
    def _derivation_strings(self, pg, tree):
        """All comps tuples a tree can denote, one per param assignment."""
        if isinstance(tree, str):
            return [((tree,),)]
        outs = []
        child_options = [self._derivation_strings(pg, c) for c in tree.children]
        import itertools

        for p in pg.productions + [
            q for tok in self._tokens(tree) for f in pg.templates for q in pg.instantiate(f, tok)
        ]:
            if p.fun != tree.fun:
                continue
            tree_children = [c for c in tree.children]
            # args_template str entries must match the string children.
            ok = all(
                kind != "str" or tree_children[i] == payload
                for i, (kind, payload) in enumerate(p.args_template)
            )
            if not ok:
                continue
            nt_children = [i for i, (kind, _) in enumerate(p.args_template) if kind == "nt"]
            for combo in itertools.product(*[child_options[i] for i in nt_children]):
                by_rhs = dict(zip(range(len(combo)), combo))
                comps = []
                feasible = True
                for seq in p.components:
                    toks = []
                    for item in seq:
                        if isinstance(item, Lit):
                            toks.append(item.token)
                        else:
                            child = by_rhs[item.arg]
                            if item.comp >= len(child):
                                feasible = False
                                break
                            toks.extend(child[item.comp])
                    if not feasible:
                        break
                    comps.append(tuple(toks))
                if feasible:
                    outs.append(tuple(comps))
        return outs

    def _tokens(self, tree):
        toks = set()
        stack = [tree]
        while stack:
            node = stack.pop()
            if isinstance(node, str):
                toks.add(node)
            else:
                stack.extend(node.children)
        return toks

    def test_productions_replay_rule_concatenation(self, lg, translator):
        # For random trees, some production chain must reproduce exactly the
        # token sequence the linearizer emits.
        rng = random.Random(13)
        from lcnl.chart import start_component

        for _ in range(40):
            tree = oracles.random_layered_tree(lg, rng, max_depth=4)
            for lang in lg.languages:
                pg = translator.pgs[lang]
                want = tuple(pt.token for pt in linearize(tree, lg.sig, lg.concretes[lang]))
                comp = start_component(pg, "S")
                denots = {c[comp] for c in self._derivation_strings(pg, tree)}
                assert want in denots, (str(tree), lang, want, denots)
