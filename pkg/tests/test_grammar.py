import pytest

from mcc.grammar import (BoundedExpansionLimit, PermutationLimitExceeded,
                         generate_grammar, grammar_text,
                         repetition_productions)
from mcc.languages import calc_model, imp_model
from mcc.model import (Member, ModelBuilder, Multiplicity, PatternSpec,
                       validate_model, mem)


def grammar_of(model):
    return generate_grammar(validate_model(model))


def production_set(grammar):
    return {(p.lhs, p.rhs) for p in grammar.productions}


class TestGeneration:
    def test_composition_production(self):
        b = ModelBuilder("M", "AssignmentStatement")
        b.composite("AssignmentStatement",
                    members=[mem("identifier", "Identifier"),
                             mem("expression", "Expression")])
        b.basic("Identifier", "[a-z]+")
        b.basic("Expression", "[0-9]+")
        g = grammar_of(b.build())
        assert ("AssignmentStatement", ("Identifier", "Expression")) \
            in production_set(g)

    def test_selection_productions(self):
        g = grammar_of(calc_model())
        prods = production_set(g)
        for sub in ("GroupExpression", "BinaryExpression", "UnaryExpression",
                    "LiteralExpression"):
            assert ("Expression", (sub,)) in prods

    def test_repetition_productions_inline(self):
        b = ModelBuilder("M", "OutputStatement")
        b.composite("OutputStatement",
                    members=[mem("exprs", "Expression", many=True)])
        b.basic("Expression", "[0-9]+")
        g = grammar_of(b.build())
        prods = production_set(g)
        assert ("OutputStatement", ("ExpressionList",)) in prods
        assert ("ExpressionList", ("Expression", "ExpressionList")) in prods
        assert ("ExpressionList", ("Expression",)) in prods

    def test_separator_list(self):
        member = mem("params", "Identifier", many=True, separator=",")
        prods = repetition_productions(member)
        shapes = {(p.lhs, p.rhs) for p in prods}
        assert ("IdentifierList", ("Identifier", "','", "IdentifierList")) in shapes
        assert ("IdentifierList", ("Identifier",)) in shapes

    def test_bounded_multiplicity_expands(self):
        member = mem("xs", "E", many=True, min_count=2, max_count=2)
        prods = repetition_productions(member)
        assert [(p.lhs, p.rhs) for p in prods] == [("EList", ("E", "E"))]

    def test_bounded_range_alternatives(self):
        member = mem("xs", "E", many=True, min_count=1, max_count=3)
        prods = repetition_productions(member)
        assert {p.rhs for p in prods} == {("E",), ("E", "E"), ("E", "E", "E")}

    def test_bounded_expansion_limit(self):
        member = mem("xs", "E", many=True, min_count=1, max_count=9)
        with pytest.raises(BoundedExpansionLimit):
            repetition_productions(member)

    def test_delimiters_wrap_element(self):
        g = grammar_of(calc_model())
        assert ("GroupExpression", ("'('", "Expression", "')'")) \
            in production_set(g)

    def test_member_prefix_inserted(self):
        b = ModelBuilder("M", "ReturnStatement")
        b.composite("ReturnStatement", suffix=";",
                    members=[mem("value", "Expression", prefix="return")])
        b.basic("Expression", "[0-9]+")
        g = grammar_of(b.build())
        assert ("ReturnStatement", ("'return'", "Expression", "';'")) \
            in production_set(g)

    def test_no_delimiters_identity(self):
        b = ModelBuilder("M", "C")
        b.composite("C", members=[mem("x", "A")])
        b.basic("A", "a")
        g = grammar_of(b.build())
        assert ("C", ("A",)) in production_set(g)

    def test_optional_member_wrapper(self):
        b = ModelBuilder("M", "C")
        b.composite("C", members=[mem("x", "A"), mem("y", "B", optional=True)])
        b.basic("A", "a")
        b.basic("B", "b")
        g = grammar_of(b.build())
        prods = production_set(g)
        assert ("C", ("A", "Opt_B")) in prods
        assert ("Opt_B", ("B",)) in prods
        assert ("Opt_B", ()) in prods

    def test_permutations(self):
        b = ModelBuilder("M", "C")
        b.composite("C", free_order=True,
                    members=[mem("a", "A"), mem("b", "B"), mem("c", "D")])
        for name, pat in (("A", "a"), ("B", "b"), ("D", "d")):
            b.basic(name, pat)
        g = grammar_of(b.build())
        perms = [p for p in g.productions if p.lhs == "C"]
        assert len(perms) == 6
        assert len({p.rhs for p in perms}) == 6

    def test_single_member_free_order(self):
        b = ModelBuilder("M", "C")
        b.composite("C", free_order=True, members=[mem("a", "A")])
        b.basic("A", "a")
        g = grammar_of(b.build())
        assert [(p.lhs, p.rhs) for p in g.productions if p.lhs == "C"] \
            == [("C", ("A",))]

    def test_permutation_limit(self):
        b = ModelBuilder("M", "C")
        b.composite("C", free_order=True,
                    members=[mem(f"m{i}", "A") for i in range(7)])
        b.basic("A", "a")
        with pytest.raises(PermutationLimitExceeded):
            grammar_of(b.build())

    def test_positions_reorder_rhs(self):
        b = ModelBuilder("M", "C")
        b.composite("C", members=[mem("a", "A", position=1),
                                  mem("b", "B", position=0)])
        b.basic("A", "a")
        b.basic("B", "b")
        g = grammar_of(b.build())
        assert ("C", ("B", "A")) in production_set(g)

    def test_basic_start_gets_wrapper(self):
        b = ModelBuilder("M", "A")
        b.basic("A", "a")
        g = grammar_of(b.build())
        assert g.start == "Start"
        assert ("Start", ("A",)) in production_set(g)
        assert g.terminals == {"A"}

    def test_reference_member_occupies_identifier_terminal(self):
        g = grammar_of(imp_model())
        prods = {p.lhs: p for p in g.productions if p.lhs == "VariableExpression"}
        assert prods["VariableExpression"].rhs == ("Identifier",)

    def test_epsilon_only_on_optional_origins(self):
        g = grammar_of(imp_model())
        for p in g.productions:
            assert (p.origin == "optional-epsilon") == (len(p.rhs) == 0)


class TestGrammarShape:
    def test_symbol_sets_disjoint_and_closed(self):
        for model in (calc_model(), imp_model()):
            g = grammar_of(model)
            assert not (g.nonterminals & g.terminals)
            assert g.start in g.nonterminals
            for p in g.productions:
                assert p.lhs in g.nonterminals
                for s in p.rhs:
                    assert s in g.nonterminals or s in g.terminals

    def test_deterministic(self):
        a = grammar_of(calc_model())
        b = grammar_of(calc_model())
        assert [(p.lhs, p.rhs, p.origin) for p in a.productions] \
            == [(p.lhs, p.rhs, p.origin) for p in b.productions]
        assert grammar_text(a) == grammar_text(b)

    def test_every_nonbasic_type_yields_productions(self):
        vm = validate_model(imp_model())
        g = generate_grammar(vm)
        lhs = {p.lhs for p in g.productions}
        for el in vm.elements.values():
            if el.kind == "basic":
                assert el.name in g.terminals
            else:
                assert el.name in lhs


class TestPrinter:
    def test_calctrad_layout(self):
        g = grammar_of(calc_model())
        text = grammar_text(g)
        lines = text.splitlines()
        assert lines[0] == ("<Expression> ::= <GroupExpression> | "
                            "<BinaryExpression> | <UnaryExpression> | "
                            "<LiteralExpression>")
        assert "<GroupExpression> ::= '(' <Expression> ')'" in lines
        assert "<BinaryExpression> ::= <Expression> <BinaryOperator> <Expression>" in lines
        assert "<UnaryExpression> ::= <UnaryOperator> <Expression>" in lines
        assert "<LiteralExpression> ::= <RealLiteral> | <IntegerLiteral>" in lines

    def test_epsilon_rendering(self):
        b = ModelBuilder("M", "C")
        b.composite("C", members=[mem("y", "B", optional=True)])
        b.basic("B", "b")
        text = grammar_text(grammar_of(b.build()))
        assert "<Opt_B> ::= <B> | ε" in text
