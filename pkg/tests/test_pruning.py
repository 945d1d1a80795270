import pytest

from mcc.forest import count_trees, enumerate_trees
from mcc.harness import canon_tree, filter_by_constraints, oracle_parse_graph
from mcc.languages import calc_engine
from mcc.model import ModelBuilder, mem
from mcc.pipeline import Engine
from mcc.pruning import prune_constraints


def op_engine(assoc="left", priorities=(1, 2)):
    """Binary expressions over two operators '@' (tight) and '#' (loose)."""
    b = ModelBuilder("Ops", "Expr")
    b.ignore(r"[ \t]+")
    b.abstract("Expr")
    b.abstract("Op", assoc=assoc)
    b.basic("Tight", "@", "Op", priority=priorities[0])
    b.basic("Loose", "#", "Op", priority=priorities[1])
    b.composite("Bin", "Expr", [mem("e1", "Expr"), mem("op", "Op"),
                                mem("e2", "Expr")])
    b.basic("Num", "[0-9]", "Expr")
    return Engine(b.build())


def shapes(engine, text, pruned=True):
    forest = engine.forest(text) if pruned else engine.raw_forest(text)
    out = []
    for tree in enumerate_trees(forest, 100):
        out.append(_shape(engine, canon_tree(tree)))
    return sorted(out, key=repr)


def _shape(engine, node):
    if node[0] == "tok":
        return node[1]
    prod = engine.grammar.production(node[1])
    if prod.origin in ("selection", "start"):
        return _shape(engine, node[2][0])
    return (prod.element_type,) + tuple(_shape(engine, c) for c in node[2])


class TestAssociativity:
    def test_left_to_right_keeps_left_grouping(self, calc):
        raw = calc.raw_forest("8-4-2")
        assert count_trees(raw, 10) == 2
        pruned = prune_constraints(raw, calc.model)
        assert count_trees(pruned, 10) == 1
        shape = shapes(calc, "8-4-2")[0]
        # left grouping: the left operand is itself a subtraction
        assert shape[0] == "BinaryExpression"
        assert shape[1][0] == "BinaryExpression"
        assert shape[3] == "IntegerLiteral"

    def test_right_to_left_keeps_right_grouping(self):
        e = op_engine(assoc="right", priorities=(1, 1))
        got = shapes(e, "1@2@3")
        assert got == [("Bin", "Num", "Tight", ("Bin", "Num", "Tight", "Num"))]

    def test_non_associative_rejects_chains(self):
        e = op_engine(assoc="non", priorities=(1, 1))
        assert e.match_count("1@2") == 1
        assert e.match_count("1@2@3") == 0

    def test_unrelated_priorities_do_not_trigger_assoc_rule(self):
        e = op_engine(assoc="left")
        # '@' then '#': differing priorities, so associativity does not
        # apply between them; priority alone groups the tight one inside.
        got = shapes(e, "1@2#3")
        assert got == [("Bin", ("Bin", "Num", "Tight", "Num"), "Loose", "Num")]


class TestPriority:
    def test_loose_under_tight_is_pruned(self, calc):
        got = shapes(calc, "2+3*4")
        assert got == [("BinaryExpression", "IntegerLiteral",
                        "AdditionOperator",
                        ("BinaryExpression", "IntegerLiteral",
                         "MultiplicationOperator", "IntegerLiteral"))]

    def test_groups_shield_priorities(self, calc):
        got = shapes(calc, "10/(2+3)")
        assert got[0][0] == "BinaryExpression"
        assert got[0][3][0] == "GroupExpression"

    def test_single_derivation_unchanged(self, calc):
        raw = calc.raw_forest("1+2")
        pruned = prune_constraints(raw, calc.model)
        assert count_trees(raw, 10) == count_trees(pruned, 10) == 1

    def test_equal_priority_needs_assoc_to_disambiguate(self):
        e = op_engine(assoc="none", priorities=(1, 1))
        assert e.match_count("1@2@3") == 2


class TestProfileSplitting:
    def test_lexically_ambiguous_operators_with_distinct_priorities(self):
        # One lexeme '@' is two operator types at different priorities;
        # packed nodes must split by profile, not share one verdict.
        b = ModelBuilder("Amb", "Expr")
        b.ignore(r"[ \t]+")
        b.abstract("Expr")
        b.abstract("Op", assoc="left")
        b.basic("OpA", "@", "Op", priority=1)
        b.basic("OpB", "@", "Op", priority=2)
        b.composite("Bin", "Expr", [mem("e1", "Expr"), mem("op", "Op"),
                                    mem("e2", "Expr")])
        b.basic("Num", "[0-9]", "Expr")
        e = Engine(b.build())
        graph = e.tokenize("1@2@3")
        oracle = filter_by_constraints(
            e.grammar, e.model, oracle_parse_graph(e.grammar, graph))
        mine = sorted((canon_tree(t) for t in e.trees("1@2@3", 100)), key=repr)
        assert mine == oracle
        # survivors: per (tight,loose) profile assignment; the left-assoc
        # rule removes only the equal-priority right nesting.
        assert len(mine) == len(oracle)


class TestComposition:
    def cond_engine(self, policy):
        b = ModelBuilder("Cond", "Stmt")
        b.ignore(r"[ \t]+")
        b.abstract("Stmt")
        b.composite("If", "Stmt", composition=policy, prefix="if", members=[
            mem("cond", "Name"),
            mem("then", "Stmt"),
            mem("els", "Stmt", optional=True, prefix="else"),
        ])
        b.composite("Say", "Stmt", prefix="say", members=[mem("what", "Name")])
        b.basic("Name", "[a-z]+")
        return Engine(b.build())

    def test_without_policy_both_attachments_survive(self):
        e = self.cond_engine("none")
        assert e.match_count("if a if b say x else say y") == 2

    def test_eager_attaches_inner(self):
        e = self.cond_engine("eager")
        asg = e.asgs("if a if b say x else say y")[0]
        outer = asg.root_node
        assert outer.members["els"] is None
        inner = outer.members["then"]
        assert inner.type_name == "If" and inner.members["els"] is not None

    def test_lazy_attaches_outer(self):
        e = self.cond_engine("lazy")
        asg = e.asgs("if a if b say x else say y")[0]
        outer = asg.root_node
        assert outer.members["els"] is not None
        assert outer.members["then"].members["els"] is None

    def test_policy_matches_tree_level_filter(self):
        for policy in ("eager", "lazy"):
            e = self.cond_engine(policy)
            text = "if a if b say x else say y"
            graph = e.tokenize(text)
            oracle = filter_by_constraints(
                e.grammar, e.model, oracle_parse_graph(e.grammar, graph))
            mine = sorted((canon_tree(t) for t in e.trees(text, 100)), key=repr)
            assert mine == oracle


class TestSoundnessCompleteness:
    @pytest.mark.parametrize("text", ["8-4-2", "8/4/2", "2+3*4", "1+2+3",
                                      "1+2*3", "2*3+4", "1-2*3-4",
                                      "10/(2+3)*0.5+1"])
    def test_survivors_equal_filtered_oracle(self, calc, text):
        graph = calc.tokenize(text)
        oracle = filter_by_constraints(
            calc.grammar, calc.model, oracle_parse_graph(calc.grammar, graph))
        mine = sorted((canon_tree(t) for t in calc.trees(text, 10**4)), key=repr)
        assert mine == oracle
