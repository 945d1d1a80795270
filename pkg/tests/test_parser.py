import pytest

from mcc.earley import ParseError, parse
from mcc.forest import count_trees, enumerate_trees, forest_dot
from mcc.harness import canon_tree, oracle_parse_graph
from mcc.languages import calc_engine, calc_unconstrained_engine
from mcc.model import ModelBuilder, mem
from mcc.pipeline import Engine


def list_engine(separator=None, min_count=1):
    b = ModelBuilder("Lists", "Doc")
    b.ignore(r"[ \t]+")
    b.composite("Doc", members=[mem("items", "Item", many=True,
                                    min_count=min_count, separator=separator)])
    b.basic("Item", "[a-z]+")
    return Engine(b.build())


class TestParse:
    def test_paper_expression_parses(self, calc):
        forest = calc.raw_forest("10/(2+3)*0.5+1")
        assert not forest.is_empty
        assert forest.root == ("Expression", 0, 14)

    def test_incomplete_input_reports_farthest(self, calc):
        with pytest.raises(ParseError) as err:
            calc.raw_forest("1+")
        assert err.value.offset == 2
        assert "IntegerLiteral" in err.value.expected
        assert "RealLiteral" in err.value.expected

    def test_epsilon_grammar_accepts_empty(self):
        b = ModelBuilder("M", "Doc")
        b.composite("Doc", members=[mem("x", "A", optional=True)])
        b.basic("A", "a")
        e = Engine(b.build())
        forest = e.raw_forest("")
        assert count_trees(forest, 10) == 1

    def test_left_recursion_terminates(self):
        # The recursive list production is right recursive; exercise a
        # left-recursive rule through the binary-expression grammar.
        e = calc_engine()
        forest = e.forest("1+2+3+4+5+6")
        assert count_trees(forest, 100) == 1

    def test_list_lengths_round_trip(self):
        e = list_engine(separator=",")
        for n in (1, 2, 17, 100):
            text = ",".join(["ab"] * n)
            forest = e.forest(text)
            assert count_trees(forest, 10) == 1
            tree = enumerate_trees(forest, 1)[0]
            leaves = [t for t in tree.walk() if t.is_leaf
                      and t.symbol == "Item"]
            assert len(leaves) == n

    def test_ambiguity_is_packed(self, calc_unconstrained):
        forest = calc_unconstrained.raw_forest("1+2+3+4")
        assert count_trees(forest, 100) == 5  # Catalan(3)

    def test_cyclic_same_extent_productions_contribute_nothing(self):
        b = ModelBuilder("M", "A")
        b.abstract("A")
        b.composite("Wrap", "A", members=[mem("inner", "A", optional=True),
                                          mem("x", "X")])
        b.basic("X", "x")
        e = Engine(b.build())
        forest = e.raw_forest("x")
        n = count_trees(forest, 50)
        trees = enumerate_trees(forest, 50)
        assert n == len(trees) < 50


class TestCounting:
    def test_empty_forest_counts_zero(self):
        b = ModelBuilder("M", "C")
        b.abstract("Op", assoc="non")
        b.basic("Lt", "<", "Op", priority=1)
        b.composite("C", "Expr", [mem("e1", "Expr"), mem("op", "Op"),
                                  mem("e2", "Expr")])
        b.abstract("Expr")
        b.basic("N", "[0-9]", "Expr")
        e = Engine(b.build())
        forest = e.forest("1<2<3")  # non-associative chain dies entirely
        assert forest.is_empty
        assert count_trees(forest, 10) == 0

    def test_cap_saturates(self, calc_unconstrained):
        forest = calc_unconstrained.raw_forest("1+2+3+4+5+6+7")
        assert count_trees(forest, 10) == 10

    def test_count_matches_enumeration(self, calc_unconstrained):
        forest = calc_unconstrained.raw_forest("1+2*3+4")
        assert count_trees(forest, 1000) \
            == len(enumerate_trees(forest, 1000))


class TestEnumeration:
    def test_single_tree(self, calc):
        trees = enumerate_trees(calc.forest("1+2"), 10)
        assert len(trees) == 1

    def test_limit_respected(self, calc_unconstrained):
        trees = enumerate_trees(calc_unconstrained.raw_forest("1+2+3"), 1)
        assert len(trees) == 1

    def test_deterministic_order(self, calc_unconstrained):
        f1 = calc_unconstrained.raw_forest("1+2+3")
        f2 = calc_unconstrained.raw_forest("1+2+3")
        a = [canon_tree(t) for t in enumerate_trees(f1, 10)]
        b = [canon_tree(t) for t in enumerate_trees(f2, 10)]
        assert a == b

    def test_pruned_shape_of_mixed_expression(self, calc):
        tree = enumerate_trees(calc.forest("1+2*3"), 10)[0]
        root = canon_tree(tree)

        def strip(node):
            # collapse selections to the concrete production's children
            if node[0] == "tok":
                return node[1]
            prod = calc.grammar.production(node[1])
            if prod.origin in ("selection", "start"):
                return strip(node[2][0])
            return (prod.element_type,) + tuple(strip(c) for c in node[2])

        assert strip(root) == (
            "BinaryExpression", "IntegerLiteral", "AdditionOperator",
            ("BinaryExpression", "IntegerLiteral", "MultiplicationOperator",
             "IntegerLiteral"))


class TestOracleAgreement:
    @pytest.mark.parametrize("text", ["1", "1+2", "1+2+3", "1+2*3",
                                      "(1+2)*3", "-1+2", "1--2",
                                      "10/(2+3)*0.5+1"])
    def test_raw_trees_match_oracle(self, calc_unconstrained, text):
        engine = calc_unconstrained
        graph = engine.tokenize(text)
        oracle = oracle_parse_graph(engine.grammar, graph)
        mine = sorted((canon_tree(t)
                       for t in enumerate_trees(engine.raw_forest(text), 10**4)),
                      key=repr)
        assert mine == oracle


class TestDot:
    def test_forest_dump(self, calc):
        dot = forest_dot(calc.forest("1+2"))
        assert dot.startswith("digraph forest")
        assert "Expression" in dot
