import re

import pytest
from hypothesis import given, settings, strategies as st

from mcc.grammar import generate_grammar
from mcc.languages import calc_model
from mcc.lexer import (LexicalError, PatternCompileError, Token,
                       brute_force_matches, compile_lexicon, ignore_spans,
                       token_graph_dot, tokenize)
from mcc.model import ModelBuilder, PatternSpec, Registry, validate_model, mem


def calc_lexicon():
    vm = validate_model(calc_model())
    return compile_lexicon(vm, generate_grammar(vm))


class TestCompileLexicon:
    def test_calculator_recognizers(self):
        lex = calc_lexicon()
        symbols = sorted(r.symbol for r in lex.recognizers)
        assert symbols == sorted([
            "IntegerLiteral", "RealLiteral",
            "PlusOperator", "MinusOperator",
            "AdditionOperator", "SubtractionOperator",
            "MultiplicationOperator", "DivisionOperator",
            "'('", "')'",
        ])

    def test_empty_ignore_list(self):
        b = ModelBuilder("M", "A")
        b.basic("A", "a")
        vm = validate_model(b.build())
        lex = compile_lexicon(vm, generate_grammar(vm))
        assert lex.ignore == []

    def test_unregistered_matcher_fails(self):
        b = ModelBuilder("M", "A")
        b.basic("A", matcher="nope")
        vm = validate_model(b.build())
        with pytest.raises(PatternCompileError):
            compile_lexicon(vm, generate_grammar(vm), Registry())

    def test_custom_matcher_tokenizes(self):
        b = ModelBuilder("M", "A")
        b.basic("A", matcher="digits_then_bang")

        def digits_then_bang(text, pos):
            m = re.compile(r"[0-9]+!").match(text, pos)
            return m.end() if m else None

        reg = Registry()
        reg.register_matcher("digits_then_bang", digits_then_bang)
        vm = validate_model(b.build(), reg)
        lex = compile_lexicon(vm, generate_grammar(vm), reg)
        graph = tokenize(lex, "42!")
        assert [str(t) for t in graph.nodes] == ["A:42!@[0,3)"]


class TestTokenize:
    def test_operator_ambiguity(self):
        graph = tokenize(calc_lexicon(), "10/(2+3)")
        plus_types = {t.type_name for t in graph.nodes if t.lexeme == "+"}
        assert plus_types == {"PlusOperator", "AdditionOperator"}
        at_zero = [t for t in graph.nodes if t.start == 0]
        assert {t.lexeme for t in at_zero} == {"10"}  # longest per recognizer

    def test_overlapping_literals(self):
        graph = tokenize(calc_lexicon(), "12.")
        spellings = {(t.type_name, t.lexeme) for t in graph.nodes}
        assert ("RealLiteral", "12.") in spellings
        assert ("IntegerLiteral", "12") in spellings

    def test_empty_input(self):
        graph = tokenize(calc_lexicon(), "")
        assert graph.nodes == []
        assert graph.start_nodes == [] and graph.end_nodes == []
        assert graph.start_offset == graph.end_offset == 0

    def test_lexical_error_offset(self):
        with pytest.raises(LexicalError) as err:
            tokenize(calc_lexicon(), "1+#")
        assert err.value.offset == 2

    def test_edges_respect_ignored_gaps(self):
        graph = tokenize(calc_lexicon(), " 1 + 2 ")
        one = next(t for t in graph.nodes if t.lexeme == "1")
        succs = {t.lexeme for t in graph.edges[one]}
        assert succs == {"+"}
        assert all(t.start == 1 for t in graph.start_nodes)
        assert all(t.lexeme == "2" for t in graph.end_nodes)

    def test_precedence_deletes_same_span_loser(self):
        b = ModelBuilder("M", "S")
        b.composite("S", members=[mem("x", "Word")])
        b.basic("Keyword", PatternSpec.regex("if", precedence=0))
        b.basic("Word", PatternSpec.regex("[a-z]+", precedence=1))
        vm = validate_model(b.build())
        lex = compile_lexicon(vm, generate_grammar(vm))
        graph = tokenize(lex, "if")
        assert {t.type_name for t in graph.nodes} == {"Keyword"}

    def test_no_precedence_keeps_both(self):
        b = ModelBuilder("M", "S")
        b.composite("S", members=[mem("x", "Word")])
        b.basic("Keyword", "if")
        b.basic("Word", "[a-z]+")
        vm = validate_model(b.build())
        lex = compile_lexicon(vm, generate_grammar(vm))
        graph = tokenize(lex, "if")
        assert {t.type_name for t in graph.nodes} == {"Keyword", "Word"}

    def test_all_lengths_flag(self):
        b = ModelBuilder("M", "A")
        b.basic("A", "a+")
        vm = validate_model(b.build())
        lex = compile_lexicon(vm, generate_grammar(vm))
        default = tokenize(lex, "aaa")
        assert sorted(t.lexeme for t in default.nodes if t.start == 0) == ["aaa"]
        graph = tokenize(lex, "aaa", all_lengths=True)
        assert sorted(t.lexeme for t in graph.nodes if t.start == 0) \
            == ["a", "aa", "aaa"]

    def test_alternation_takes_longest(self):
        b = ModelBuilder("M", "A")
        b.basic("A", "a|aa")
        vm = validate_model(b.build())
        lex = compile_lexicon(vm, generate_grammar(vm))
        graph = tokenize(lex, "aa")
        assert sorted(t.lexeme for t in graph.nodes if t.start == 0) == ["aa"]


class TestIgnoreSpans:
    def test_whitespace_spans(self):
        lex = calc_lexicon()
        assert ignore_spans(lex, " 1 + 2 ") == [(0, 1), (2, 3), (4, 5), (6, 7)]

    def test_no_ignorables(self):
        assert ignore_spans(calc_lexicon(), "1+2") == []

    def test_line_comment(self):
        b = ModelBuilder("M", "A")
        b.ignore(r"#[^\n]*")
        b.basic("A", "1")
        vm = validate_model(b.build())
        lex = compile_lexicon(vm, generate_grammar(vm))
        assert ignore_spans(lex, "#x\n1")[0] == (0, 2)


class TestDot:
    def test_dump_contains_labels(self):
        dot = token_graph_dot(tokenize(calc_lexicon(), "1+2"))
        assert dot.startswith("digraph")
        assert "IntegerLiteral:1@[0,1)" in dot
        assert "->" in dot


@settings(max_examples=60, deadline=None)
@given(st.text(alphabet="0123456789+-*/(). ", max_size=12))
def test_completeness_against_brute_force(text):
    """Every brute-force longest match appears as a node, before
    precedence filtering (calc declares no precedences)."""
    lex = calc_lexicon()
    try:
        graph = tokenize(lex, text)
    except LexicalError:
        return
    reference = brute_force_matches(lex, text)
    spans = {(t.type_name, t.start, t.end) for t in graph.nodes}
    ignored = ignore_spans(lex, text)

    def inside_ignored(pos):
        return any(s <= pos < e for (s, e) in ignored)

    reachable = {t.start for t in graph.nodes}
    for tok in reference:
        if inside_ignored(tok.start) or tok.start not in reachable:
            continue
        assert (tok.type_name, tok.start, tok.end) in spans


@settings(max_examples=40, deadline=None)
@given(st.text(alphabet="0123456789+*(). ", max_size=10))
def test_tokenize_deterministic(text):
    lex = calc_lexicon()
    try:
        a = tokenize(lex, text)
        b = tokenize(lex, text)
    except LexicalError:
        return
    assert a.nodes == b.nodes
    assert a.edges == b.edges
