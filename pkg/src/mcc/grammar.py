"""Context-free grammar generation from a validated model.

Every composite element type yields a concatenation production over its
member symbols, every abstract type yields one selection production per
subtype, repeatable members yield recursive list productions (with their
separator, when declared), optional members are wrapped in a helper
nonterminal with an epsilon alternative, and free-order composites expand
into one production per member permutation. Basic element types become
terminals, as do the anonymous delimiters introduced by prefix, suffix and
separator patterns.

The generated grammar is a pure function of the model: identical models
produce symbol-for-symbol identical grammars. Left recursion is preserved,
never rewritten.
"""

import itertools
from dataclasses import dataclass, field

from . import model as M

# Production origins.
COMPOSITION = "composition"
SELECTION = "selection"
REPETITION_RECURSIVE = "repetition-recursive"
REPETITION_BASE = "repetition-base"
OPTIONAL_EPSILON = "optional-epsilon"
OPTIONAL_WRAP = "optional-wrap"
DELIMITER = "delimiter"
PERMUTATION = "permutation"
START = "start"

PERMUTATION_LIMIT = 6
BOUNDED_EXPANSION_LIMIT = 8

START_SYMBOL = "Start"


class GrammarError(Exception):
    pass


class PermutationLimitExceeded(GrammarError):
    pass


class BoundedExpansionLimit(GrammarError):
    pass


@dataclass(frozen=True)
class Production:
    """One rewrite rule. ``member_bindings`` maps rhs indices holding a
    member's symbol back to the member name; delimiter indices stay
    unbound. ``origin`` records which generation step produced the rule."""

    lhs: str
    rhs: tuple
    origin: str
    element_type: str | None = None
    member_bindings: dict = field(default_factory=dict, compare=False)

    def __str__(self):
        rhs = " ".join(self.rhs) if self.rhs else "ε"
        return f"{self.lhs} ::= {rhs}"


@dataclass
class Grammar:
    """The tuple (nonterminals, terminals, productions, start) plus the
    delimiter pattern table needed to build a lexicon."""

    nonterminals: set
    terminals: set
    productions: list
    start: str
    delimiter_patterns: dict = field(default_factory=dict)

    def __post_init__(self):
        self.by_lhs = {}
        for i, p in enumerate(self.productions):
            self.by_lhs.setdefault(p.lhs, []).append(i)

    def production(self, prod_id):
        return self.productions[prod_id]

    def alternatives(self, lhs):
        return self.by_lhs.get(lhs, [])


def delimiter_symbol(pattern):
    """Terminal symbol for an anonymous delimiter: its literal text quoted,
    which keeps delimiter symbols disjoint from type-name symbols."""
    text = pattern.literal_text()
    if text is None:
        text = pattern.expression
    return f"'{text}'"


class _Generator:
    def __init__(self, vmodel):
        self.model = vmodel
        self.nonterminals = set()
        self.terminals = set()
        self.productions = []
        self.delimiters = {}
        # Helper nonterminals are shared between identical configurations
        # and numbered deterministically otherwise.
        self._helper_names = {}
        self._helper_counts = {}

    def terminal_for(self, el):
        self.terminals.add(el.name)
        return el.name

    def delimiter_for(self, pattern):
        sym = delimiter_symbol(pattern)
        self.terminals.add(sym)
        self.delimiters.setdefault(sym, pattern)
        return sym

    def add(self, lhs, rhs, origin, element_type=None, bindings=None):
        self.nonterminals.add(lhs)
        self.productions.append(Production(
            lhs=lhs, rhs=tuple(rhs), origin=origin,
            element_type=element_type, member_bindings=dict(bindings or {})))

    def helper_name(self, base, config):
        key = (base, config)
        if key in self._helper_names:
            return self._helper_names[key], False
        n = self._helper_counts.get(base, 0) + 1
        self._helper_counts[base] = n
        name = base if n == 1 else f"{base}{n}"
        self._helper_names[key] = name
        return name, True

    def symbol_of(self, type_name):
        el = self.model.element(type_name)
        if el.kind == M.BASIC:
            return self.terminal_for(el)
        self.nonterminals.add(el.name)
        return el.name

    def member_core_symbol(self, member):
        """The grammar symbol a member occupies, before delimiters and
        optionality. Reference members occupy the terminal of the target's
        id member rather than the full target type."""
        if member.is_reference:
            target = self.model.element(member.type_name)
            id_type = target.member(target.id_member).type_name
            return self.symbol_of(id_type)
        return self.symbol_of(member.type_name)

    def list_symbol(self, member):
        """Nonterminal for a repeatable member, generating its recursive and
        base productions on first use."""
        core = self.member_core_symbol(member)
        mult = member.multiplicity
        sep = self.delimiter_for(member.separator) if member.separator else None
        base = core.strip("'")
        if not base.isidentifier():
            base = "Item"
        config = (core, sep, mult.min, mult.max)
        name, fresh = self.helper_name(base + "List", config)
        if fresh:
            self.repetition_productions_into(name, core, sep, mult,
                                             self.model.element(member.type_name).name
                                             if member.type_name in self.model.elements else None)
        return name, mult.min == 0

    def repetition_productions_into(self, name, core, sep, mult, element_type):
        if mult.max is not None:
            if mult.max > BOUNDED_EXPANSION_LIMIT:
                raise BoundedExpansionLimit(
                    f"bounded multiplicity max {mult.max} exceeds {BOUNDED_EXPANSION_LIMIT}")
            # Fixed-length alternatives, one per admissible count.
            for n in range(max(mult.min, 1), mult.max + 1):
                rhs = []
                for i in range(n):
                    if i and sep:
                        rhs.append(sep)
                    rhs.append(core)
                self.add(name, rhs, REPETITION_BASE, element_type)
            if mult.min == 0:
                self.add(name, [], OPTIONAL_EPSILON, element_type)
            return
        # Unbounded: the classic recursive pair. A minimum above one is
        # expressed by a leading run of fixed elements.
        inner = name
        if mult.min > 1:
            inner, fresh = self.helper_name(name + "Tail", (core, sep))
            rhs = []
            for i in range(mult.min - 1):
                if i and sep:
                    rhs.append(sep)
                rhs.append(core)
            if sep:
                rhs.append(sep)
            rhs.append(inner)
            self.add(name, rhs, REPETITION_BASE, element_type)
            if not fresh:
                return
        recursive = [core, sep, inner] if sep else [core, inner]
        self.add(inner, recursive, REPETITION_RECURSIVE, element_type)
        self.add(inner, [core], REPETITION_BASE, element_type)

    def optional_wrapper(self, fragment, base):
        config = tuple(fragment)
        name, fresh = self.helper_name(f"Opt_{base}", config)
        if fresh:
            self.add(name, fragment, OPTIONAL_WRAP)
            self.add(name, [], OPTIONAL_EPSILON)
        return name

    def member_fragment(self, member):
        """The rhs symbols of one member: prefixes, core (or list helper),
        suffixes, wrapped in an optional helper when the member may be
        absent. Returns (symbols, index of the bound core symbol or None
        when the binding moved into a wrapper)."""
        prefixes = [self.delimiter_for(p) for p in member.prefix]
        suffixes = [self.delimiter_for(p) for p in member.suffix]
        if member.multiplicity.is_list:
            core, zero_ok = self.list_symbol(member)
            if zero_ok and member.multiplicity.max is None:
                core = self.optional_wrapper([core], core.strip("'"))
        else:
            core = self.member_core_symbol(member)
        fragment = prefixes + [core] + suffixes
        if member.optional:
            wrapped = self.optional_wrapper(fragment, core.strip("'"))
            return [wrapped], 0
        return fragment, len(prefixes)

    def ordered_members(self, el):
        """Members in composition order: explicit positions name final
        slots, unannotated members fill the remaining slots in declaration
        order."""
        n = len(el.members)
        slots = [None] * n
        rest = []
        for m in el.members:
            if m.position is not None:
                slots[m.position] = m
            else:
                rest.append(m)
        it = iter(rest)
        return [m if m is not None else next(it) for m in slots]

    def composite_productions(self, el):
        members = self.ordered_members(el)
        fragments = []
        for m in members:
            symbols, core_index = self.member_fragment(m)
            fragments.append((m, symbols, core_index))

        el_prefix = [self.delimiter_for(p) for p in el.prefix]
        el_suffix = [self.delimiter_for(p) for p in el.suffix]

        if el.constraints.free_order and len(members) > 1:
            if len(members) > PERMUTATION_LIMIT:
                raise PermutationLimitExceeded(
                    f"{el.name}: free order over {len(members)} members "
                    f"exceeds the limit of {PERMUTATION_LIMIT}")
            for perm in itertools.permutations(fragments):
                self._emit_composition(el, el_prefix, el_suffix, perm, PERMUTATION)
        else:
            self._emit_composition(el, el_prefix, el_suffix, fragments, COMPOSITION)

    def _emit_composition(self, el, el_prefix, el_suffix, fragments, origin):
        rhs = list(el_prefix)
        bindings = {}
        for m, symbols, core_index in fragments:
            bindings[len(rhs) + core_index] = m.name
            rhs.extend(symbols)
        rhs.extend(el_suffix)
        self.add(el.name, rhs, origin, el.name, bindings)

    def run(self):
        vm = self.model
        for el in vm.elements.values():
            if el.kind == M.ABSTRACT:
                self.nonterminals.add(el.name)
                for sub in vm.subtypes_of(el):
                    self.add(el.name, [self.symbol_of(sub.name)], SELECTION, el.name)
            elif el.kind == M.COMPOSITE:
                self.composite_productions(el)
            else:
                self.terminal_for(el)

        start_el = vm.element(vm.start_type)
        if start_el.kind == M.BASIC:
            start = START_SYMBOL
            self.add(start, [start_el.name], START, start_el.name)
        else:
            start = start_el.name
            self.nonterminals.add(start)

        # Move the start symbol's productions to the front so dumps read
        # top-down; relative order is otherwise declaration order.
        return Grammar(
            nonterminals=self.nonterminals,
            terminals=self.terminals - self.nonterminals,
            productions=self.productions,
            start=start,
            delimiter_patterns=self.delimiters)


def generate_grammar(vmodel) -> Grammar:
    """Generate the concrete-syntax grammar of a validated model."""
    vmodel = M.validate_model(vmodel)
    return _Generator(vmodel).run()


class _StandaloneModel:
    """Minimal model view over one basic type, for fragment-level helpers."""

    def __init__(self, elements):
        self.elements = elements

    def element(self, name):
        return self.elements[name]


def repetition_productions(member):
    """The list productions a repeatable member expands into, in isolation
    (the repeating element is treated as a terminal). generate_grammar
    emits the same rules in context."""
    el = M.ElementType(name=member.type_name, kind=M.BASIC,
                       pattern=M.PatternSpec.regex("x"))
    gen = _Generator(_StandaloneModel({member.type_name: el}))
    gen.list_symbol(member)
    return gen.productions


def delimiter_wrap(prefixes, symbols, suffixes):
    """Insert delimiter terminals around a fragment of rhs symbols."""
    pre = [delimiter_symbol(p) for p in prefixes]
    suf = [delimiter_symbol(p) for p in suffixes]
    return pre + list(symbols) + suf


def grammar_text(grammar: Grammar) -> str:
    """Render the grammar in BNF-like notation, one left-hand side per
    line with alternatives joined by ``|``. Nonterminals and named
    terminals print in angle brackets, anonymous delimiters print quoted,
    and the empty right-hand side prints as ε. Byte-stable for a given
    grammar."""
    groups = {}
    order = []
    for p in grammar.productions:
        if p.lhs not in groups:
            groups[p.lhs] = []
            order.append(p.lhs)
        groups[p.lhs].append(p)
    if grammar.start in groups:
        order.remove(grammar.start)
        order.insert(0, grammar.start)

    def sym(s):
        return s if s.startswith("'") else f"<{s}>"

    lines = []
    for lhs in order:
        alts = []
        for p in groups[lhs]:
            alts.append(" ".join(sym(s) for s in p.rhs) if p.rhs else "ε")
        lines.append(f"<{lhs}> ::= " + " | ".join(alts))
    return "\n".join(lines) + "\n"
