import pytest
from hypothesis import given, settings, strategies as st

from mcc.model import (AmbiguousPriorityError, ModelBuilder,
                       ModelValidationError, Multiplicity, PatternSpec,
                       effective_priority, mem, subtypes_of, validate_model)
from mcc.languages import calc_model
from mcc.harness import random_model


def tiny_model():
    b = ModelBuilder("Tiny", "Pair")
    b.composite("Pair", members=[mem("a", "Atom"), mem("b", "Atom")])
    b.basic("Atom", "x")
    return b.build()


def errors_of(model, registry=None):
    with pytest.raises(ModelValidationError) as err:
        validate_model(model, registry)
    return [e.kind for e in err.value.errors]


class TestValidate:
    def test_calculator_model_validates(self):
        vm = validate_model(calc_model())
        assert len(vm.elements) == 15
        assert vm.warnings == []

    def test_idempotent(self):
        vm = validate_model(tiny_model())
        assert validate_model(vm) is vm

    def test_unknown_member_type(self):
        b = ModelBuilder("M", "C")
        b.composite("C", members=[mem("x", "Nope")])
        assert "UnknownType" in errors_of(b.build())

    def test_unknown_start(self):
        b = ModelBuilder("M", "Nope")
        b.basic("A", "a")
        assert "UnknownType" in errors_of(b.build())

    def test_cyclic_inheritance(self):
        b = ModelBuilder("M", "A")
        b.abstract("A", "B")
        b.abstract("B", "A")
        assert "CyclicInheritance" in errors_of(b.build())

    def test_pattern_compile_error(self):
        b = ModelBuilder("M", "A")
        b.basic("A", "[unclosed")
        assert "PatternCompileError" in errors_of(b.build())

    def test_multiplicity_error(self):
        b = ModelBuilder("M", "C")
        b.composite("C", members=[mem("xs", "A", many=True, min_count=3,
                                      max_count=2)])
        b.basic("A", "a")
        assert "MultiplicityError" in errors_of(b.build())

    def test_separator_without_repetition(self):
        b = ModelBuilder("M", "C")
        m = mem("x", "A")
        m.separator = PatternSpec.regex(",")
        b.composite("C", members=[m])
        b.basic("A", "a")
        assert "MultiplicityError" in errors_of(b.build())

    def test_reference_to_type_without_id(self):
        b = ModelBuilder("M", "C")
        b.composite("C", members=[mem("t", "Target", ref=True)])
        b.composite("Target", members=[mem("x", "A")])
        b.basic("A", "a")
        assert "DanglingReferenceTarget" in errors_of(b.build())

    def test_reserved_names_rejected(self):
        for bad in ("Opt_X", "Perm_X", "ShoppingList", "Start"):
            b = ModelBuilder("M", bad)
            b.basic(bad, "a")
            assert "ReservedName" in errors_of(b.build()), bad

    def test_supertype_must_be_abstract(self):
        b = ModelBuilder("M", "A")
        b.basic("A", "a")
        b.basic("B", "b", supertype="A")
        assert "BadDeclaration" in errors_of(b.build())

    def test_free_order_forbids_positions(self):
        b = ModelBuilder("M", "C")
        b.composite("C", free_order=True,
                    members=[mem("a", "A", position=0), mem("b", "A")])
        b.basic("A", "a")
        assert "PositionError" in errors_of(b.build())

    def test_duplicate_positions(self):
        b = ModelBuilder("M", "C")
        b.composite("C", members=[mem("a", "A", position=0),
                                  mem("b", "A", position=0)])
        b.basic("A", "a")
        assert "PositionError" in errors_of(b.build())

    def test_unreachable_elements_warn(self):
        b = ModelBuilder("M", "C")
        b.composite("C", members=[mem("a", "A")])
        b.basic("A", "a")
        b.basic("Lost", "z")
        vm = validate_model(b.build())
        assert any("Lost" in w for w in vm.warnings)

    def test_abstract_with_members_rejected(self):
        b = ModelBuilder("M", "A")
        b.abstract("A")
        b.build().elements["A"].members.append(mem("x", "A"))
        assert "BadDeclaration" in errors_of(b.build())


class TestSubtypes:
    def test_expression_subtypes_in_declaration_order(self):
        vm = validate_model(calc_model())
        names = [t.name for t in subtypes_of(vm, vm.element("Expression"))]
        assert names == ["GroupExpression", "BinaryExpression",
                         "UnaryExpression", "LiteralExpression"]

    def test_binary_operator_subtypes(self):
        vm = validate_model(calc_model())
        names = [t.name for t in subtypes_of(vm, "BinaryOperator")]
        assert names == ["AdditionOperator", "SubtractionOperator",
                         "MultiplicationOperator", "DivisionOperator"]

    def test_leaf_has_no_subtypes(self):
        vm = validate_model(calc_model())
        assert subtypes_of(vm, "IntegerLiteral") == []


class TestEffectivePriority:
    def test_operator_priorities(self):
        vm = validate_model(calc_model())
        assert effective_priority(vm, "MultiplicationOperator") == 1
        assert effective_priority(vm, "DivisionOperator") == 1
        assert effective_priority(vm, "AdditionOperator") == 2
        assert effective_priority(vm, "SubtractionOperator") == 2

    def test_unannotated_composite_is_none(self):
        vm = validate_model(calc_model())
        assert effective_priority(vm, "GroupExpression") is None

    def test_binary_expression_defers_to_instance(self):
        vm = validate_model(calc_model())
        assert effective_priority(vm, "BinaryExpression") is None

    def test_two_bearing_slots_is_ambiguous(self):
        b = ModelBuilder("M", "C")
        b.abstract("Op", assoc="left")
        b.basic("Plus", r"\+", "Op", priority=1)
        b.composite("C", members=[mem("a", "Op"), mem("b", "Op")])
        vm = validate_model(b.build())
        with pytest.raises(AmbiguousPriorityError):
            effective_priority(vm, "C")


class TestMultiplicity:
    def test_default(self):
        m = Multiplicity()
        assert (m.min, m.max, m.is_list) == (1, 1, False)

    def test_unbounded(self):
        assert Multiplicity(0, None).is_list
        assert Multiplicity(1, 3).is_list


class TestPatternSpec:
    @pytest.mark.parametrize("expr,literal", [
        (r"\+", "+"),
        (r"\(", "("),
        ("abc", "abc"),
        (r"\|\|", "||"),
        ("<=", "<="),
        (r"[0-9]+", None),
        (r"a|b", None),
        (r"\w", None),
    ])
    def test_literal_text(self, expr, literal):
        assert PatternSpec.regex(expr).literal_text() == literal


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=10**6))
def test_random_models_validate(seed):
    vm = validate_model(random_model(seed))
    assert vm.element(vm.start_type) is not None


@settings(max_examples=20, deadline=None)
@given(st.integers(min_value=0, max_value=10**6))
def test_random_model_deterministic(seed):
    assert random_model(seed) == random_model(seed)
