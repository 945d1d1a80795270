"""Language models: element types, members, constraints, and validation.

A language is described by a model of element types. Basic types are
token-backed (a pattern recognizes their lexemes), composite types
concatenate typed members, and abstract types stand for a choice among
their subtypes. Declarative constraints (delimiters, multiplicity,
associativity, priority, composition policy, member order, identifiers
and references, custom predicates) attach to types and members and steer
grammar generation, parse-forest pruning, and reference resolution.
"""

import re
from dataclasses import dataclass, field, replace

# Element type kinds.
BASIC = "basic"
COMPOSITE = "composite"
ABSTRACT = "abstract"

# Associativity values.
ASSOC_NONE = "none"
LEFT_TO_RIGHT = "left"
RIGHT_TO_LEFT = "right"
NON_ASSOCIATIVE = "non"
ASSOCIATIVITIES = (ASSOC_NONE, LEFT_TO_RIGHT, RIGHT_TO_LEFT, NON_ASSOCIATIVE)

# Composition policies for nested composites.
COMPOSE_NONE = "none"
EAGER = "eager"
LAZY = "lazy"
COMPOSITIONS = (COMPOSE_NONE, EAGER, LAZY)

# Literal kinds a value-binding member may declare.
VALUE_KINDS = ("int", "float", "string")

# Validation error kinds.
UNKNOWN_TYPE = "UnknownType"
CYCLIC_INHERITANCE = "CyclicInheritance"
PATTERN_COMPILE_ERROR = "PatternCompileError"
MULTIPLICITY_ERROR = "MultiplicityError"
DANGLING_REFERENCE_TARGET = "DanglingReferenceTarget"
RESERVED_NAME = "ReservedName"
BAD_DECLARATION = "BadDeclaration"
POSITION_ERROR = "PositionError"

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")

# Characters that carry meaning in the regular-expression syntax; used to
# decide whether a pattern is a plain literal.
_REGEX_META = set(".^$*+?{}[]()|\\")


@dataclass(frozen=True)
class PatternSpec:
    """How a basic element or delimiter is recognized in the input.

    ``form`` is ``"regex"`` (``expression`` is a regular expression) or
    ``"matcher"`` (``expression`` names a matcher registered with the host).
    ``precedence`` is the optional token precedence; on exact-span
    conflicts the token with the lower value survives.
    """

    form: str = "regex"
    expression: str = ""
    precedence: int | None = None

    @staticmethod
    def regex(expression, precedence=None):
        return PatternSpec("regex", expression, precedence)

    @staticmethod
    def matcher(name, precedence=None):
        return PatternSpec("matcher", name, precedence)

    def literal_text(self):
        """The plain string this pattern matches, or None if it is not a
        pure literal (quantifiers, classes, alternation...)."""
        if self.form != "regex":
            return None
        out = []
        chars = iter(self.expression)
        for c in chars:
            if c == "\\":
                nxt = next(chars, None)
                if nxt is None or nxt.isalnum():
                    return None
                out.append(nxt)
            elif c in _REGEX_META:
                return None
            else:
                out.append(c)
        return "".join(out) if out else None


@dataclass(frozen=True)
class Multiplicity:
    """Allowed repetition count of a member; ``max=None`` means unbounded."""

    min: int = 1
    max: int | None = 1

    @property
    def is_list(self):
        return self.max is None or self.max > 1


@dataclass
class Member:
    """One slot of a composite element type."""

    name: str
    type_name: str
    optional: bool = False
    multiplicity: Multiplicity = field(default_factory=Multiplicity)
    separator: PatternSpec | None = None
    prefix: list[PatternSpec] = field(default_factory=list)
    suffix: list[PatternSpec] = field(default_factory=list)
    position: int | None = None
    is_reference: bool = False
    is_value_binding: bool = False


@dataclass
class ConstraintSet:
    """Declarative constraints attached to one element type."""

    associativity: str = ASSOC_NONE
    composition: str = COMPOSE_NONE
    priority: int | None = None
    free_order: bool = False
    custom_constraints: list[str] = field(default_factory=list)


@dataclass
class ElementType:
    """One node kind of the language model."""

    name: str
    kind: str
    supertype: str | None = None
    pattern: PatternSpec | None = None
    members: list[Member] = field(default_factory=list)
    constraints: ConstraintSet = field(default_factory=ConstraintSet)
    prefix: list[PatternSpec] = field(default_factory=list)
    suffix: list[PatternSpec] = field(default_factory=list)
    scope_defining: bool = False
    id_member: str | None = None
    semantic_tag: str | None = None

    def member(self, name):
        for m in self.members:
            if m.name == name:
                return m
        raise KeyError(name)

    @property
    def value_member(self):
        for m in self.members:
            if m.is_value_binding:
                return m
        return None


@dataclass
class Model:
    """A complete language model: named element types plus ignore patterns."""

    name: str
    start_type: str
    elements: dict[str, ElementType] = field(default_factory=dict)
    ignore_patterns: list[PatternSpec] = field(default_factory=list)


@dataclass
class ModelError:
    kind: str
    message: str
    element: str | None = None
    member: str | None = None

    def __str__(self):
        where = self.element or ""
        if self.member:
            where += f".{self.member}"
        return f"{self.kind}: {self.message}" + (f" (at {where})" if where else "")


class ModelValidationError(Exception):
    """Raised by validate_model with the complete list of violations."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(str(e) for e in self.errors))


class AmbiguousPriorityError(Exception):
    """A composite has more than one priority-bearing member slot."""


class Registry:
    """Host-registered callables: custom matchers, constraint predicates,
    and evaluation callbacks keyed by semantic tag."""

    def __init__(self):
        self.matchers = {}
        self.predicates = {}
        self.callbacks = {}

    def register_matcher(self, name, fn):
        self.matchers[name] = fn
        return fn

    def register_predicate(self, name, fn):
        self.predicates[name] = fn
        return fn

    def register_callback(self, tag, fn):
        self.callbacks[tag] = fn
        return fn


class ValidatedModel:
    """A model whose names all resolve and whose invariants hold.

    Immutable after construction; safe to share between concurrent parsers.
    """

    def __init__(self, model, warnings=()):
        self.model = model
        self.name = model.name
        self.start_type = model.start_type
        self.elements = model.elements
        self.ignore_patterns = model.ignore_patterns
        self.warnings = list(warnings)
        self._subtypes = {name: [] for name in model.elements}
        for el in model.elements.values():
            if el.supertype is not None:
                self._subtypes[el.supertype].append(el)

    def element(self, name):
        return self.elements[name]

    def subtypes_of(self, t):
        """Direct subtypes of ``t`` in declaration order."""
        name = t.name if isinstance(t, ElementType) else t
        return list(self._subtypes[name])

    def supertype_chain(self, t):
        """The type itself followed by its ancestors, innermost first."""
        el = t if isinstance(t, ElementType) else self.elements[t]
        chain = [el]
        while el.supertype is not None:
            el = self.elements[el.supertype]
            chain.append(el)
        return chain

    def is_subtype_of(self, sub, sup):
        sup_name = sup.name if isinstance(sup, ElementType) else sup
        return any(el.name == sup_name for el in self.supertype_chain(sub))

    def type_closure(self, t):
        """The type and all of its transitive subtypes."""
        el = t if isinstance(t, ElementType) else self.elements[t]
        out, todo = [], [el]
        while todo:
            cur = todo.pop(0)
            out.append(cur)
            todo.extend(self._subtypes[cur.name])
        return out


# Generated grammar helpers reserve these shapes; user type names may not
# collide with them.
_RESERVED_PREFIXES = ("Opt_", "Perm_")
_RESERVED_SUFFIX = "List"
_RESERVED_NAMES = ("Start",)


def _reserved(name):
    if name in _RESERVED_NAMES:
        return True
    if any(name.startswith(p) for p in _RESERVED_PREFIXES):
        return True
    return name.endswith(_RESERVED_SUFFIX)


def _check_pattern(errors, pattern, element, member=None):
    if pattern.form == "regex":
        try:
            re.compile(pattern.expression)
        except re.error as exc:
            errors.append(ModelError(PATTERN_COMPILE_ERROR,
                                     f"bad pattern {pattern.expression!r}: {exc}",
                                     element, member))
    elif pattern.form != "matcher":
        errors.append(ModelError(PATTERN_COMPILE_ERROR,
                                 f"unknown pattern form {pattern.form!r}",
                                 element, member))


def validate_model(model, registry=None):
    """Check every model invariant and return a ValidatedModel.

    Raises ModelValidationError carrying the complete list of violations;
    never returns a partially validated model. Validating an already
    validated model returns it unchanged. Types unreachable from the start
    type produce warnings, not errors.
    """
    if isinstance(model, ValidatedModel):
        return model

    errors = []
    elements = model.elements

    for name, el in elements.items():
        if name != el.name:
            errors.append(ModelError(BAD_DECLARATION,
                                     f"element registered as {name!r} but named {el.name!r}",
                                     name))
        if not _IDENT_RE.match(name):
            errors.append(ModelError(BAD_DECLARATION,
                                     f"element name {name!r} is not an identifier", name))
        elif _reserved(name):
            errors.append(ModelError(RESERVED_NAME,
                                     f"element name {name!r} collides with generated helper names",
                                     name))

    if model.start_type not in elements:
        errors.append(ModelError(UNKNOWN_TYPE,
                                 f"start type {model.start_type!r} is not declared"))

    for pat in model.ignore_patterns:
        _check_pattern(errors, pat, None)

    for el in elements.values():
        _validate_element(errors, el, elements, registry)

    _check_inheritance_cycles(errors, elements)

    if errors:
        raise ModelValidationError(errors)

    warnings = _reachability_warnings(model)
    return ValidatedModel(model, warnings)


def _validate_element(errors, el, elements, registry):
    name = el.name

    if el.kind not in (BASIC, COMPOSITE, ABSTRACT):
        errors.append(ModelError(BAD_DECLARATION, f"unknown kind {el.kind!r}", name))
        return

    if el.kind == BASIC and el.pattern is None:
        errors.append(ModelError(BAD_DECLARATION, "basic type requires a pattern", name))
    if el.kind != BASIC and el.pattern is not None:
        errors.append(ModelError(BAD_DECLARATION,
                                 f"{el.kind} type may not carry a pattern", name))
    if el.pattern is not None:
        _check_pattern(errors, el.pattern, name)
        if registry is not None and el.pattern.form == "matcher" \
                and el.pattern.expression not in registry.matchers:
            errors.append(ModelError(PATTERN_COMPILE_ERROR,
                                     f"matcher {el.pattern.expression!r} is not registered",
                                     name))

    if el.kind == ABSTRACT and el.members:
        errors.append(ModelError(BAD_DECLARATION, "abstract type may not have members", name))
    if el.kind == BASIC:
        extras = [m.name for m in el.members if not m.is_value_binding]
        if extras:
            errors.append(ModelError(BAD_DECLARATION,
                                     f"basic type may only carry a value-binding member, got {extras}",
                                     name))

    if el.supertype is not None:
        sup = elements.get(el.supertype)
        if sup is None:
            errors.append(ModelError(UNKNOWN_TYPE,
                                     f"supertype {el.supertype!r} is not declared", name))
        elif sup.kind != ABSTRACT:
            errors.append(ModelError(BAD_DECLARATION,
                                     f"supertype {el.supertype!r} is not abstract", name))

    value_members = [m for m in el.members if m.is_value_binding]
    if len(value_members) > 1:
        errors.append(ModelError(BAD_DECLARATION,
                                 "more than one value-binding member", name))
    if value_members and el.kind != BASIC:
        errors.append(ModelError(BAD_DECLARATION,
                                 "value-binding member on a non-basic type", name))

    seen_positions = {}
    for m in el.members:
        _validate_member(errors, el, m, elements)
        if m.position is not None:
            if m.position in seen_positions:
                errors.append(ModelError(POSITION_ERROR,
                                         f"position {m.position} used by {seen_positions[m.position]!r} and {m.name!r}",
                                         name))
            seen_positions[m.position] = m.name
            if el.constraints.free_order:
                errors.append(ModelError(POSITION_ERROR,
                                         "explicit position on a free-order composite",
                                         name, m.name))
            if m.position >= len(el.members):
                errors.append(ModelError(POSITION_ERROR,
                                         f"position {m.position} out of range", name, m.name))

    if el.constraints.associativity not in ASSOCIATIVITIES:
        errors.append(ModelError(BAD_DECLARATION,
                                 f"unknown associativity {el.constraints.associativity!r}", name))
    if el.constraints.composition not in COMPOSITIONS:
        errors.append(ModelError(BAD_DECLARATION,
                                 f"unknown composition policy {el.constraints.composition!r}", name))
    if el.constraints.priority is not None and el.constraints.priority < 0:
        errors.append(ModelError(BAD_DECLARATION, "priority must be nonnegative", name))
    if registry is not None:
        for pred in el.constraints.custom_constraints:
            if pred not in registry.predicates:
                errors.append(ModelError(BAD_DECLARATION,
                                         f"constraint predicate {pred!r} is not registered",
                                         name))

    if el.id_member is not None:
        try:
            idm = el.member(el.id_member)
        except KeyError:
            errors.append(ModelError(UNKNOWN_TYPE,
                                     f"id member {el.id_member!r} is not declared", name))
        else:
            target = elements.get(idm.type_name)
            if target is None or target.kind != BASIC:
                errors.append(ModelError(BAD_DECLARATION,
                                         f"id member {el.id_member!r} must have a basic type",
                                         name))

    for pat in list(el.prefix) + list(el.suffix):
        _check_pattern(errors, pat, name)


def _validate_member(errors, el, m, elements):
    name, mname = el.name, m.name
    if not _IDENT_RE.match(m.name):
        errors.append(ModelError(BAD_DECLARATION,
                                 f"member name {m.name!r} is not an identifier", name, mname))

    if m.is_value_binding:
        if m.type_name not in VALUE_KINDS:
            errors.append(ModelError(BAD_DECLARATION,
                                     f"value-binding member must be one of {VALUE_KINDS}",
                                     name, mname))
        return

    target = elements.get(m.type_name)
    if target is None:
        errors.append(ModelError(UNKNOWN_TYPE,
                                 f"member type {m.type_name!r} is not declared", name, mname))

    mult = m.multiplicity
    if mult.min < 0 or (mult.max is not None and mult.max < 0):
        errors.append(ModelError(MULTIPLICITY_ERROR, "negative multiplicity", name, mname))
    if mult.max is not None and mult.min > mult.max:
        errors.append(ModelError(MULTIPLICITY_ERROR,
                                 f"min {mult.min} exceeds max {mult.max}", name, mname))
    if m.separator is not None and not mult.is_list:
        errors.append(ModelError(MULTIPLICITY_ERROR,
                                 "separator on a member that cannot repeat", name, mname))

    if m.is_reference:
        if target is not None and target.id_member is None:
            errors.append(ModelError(DANGLING_REFERENCE_TARGET,
                                     f"referenced type {m.type_name!r} declares no id member",
                                     name, mname))

    for pat in list(m.prefix) + list(m.suffix) + ([m.separator] if m.separator else []):
        _check_pattern(errors, pat, name, mname)


def _check_inheritance_cycles(errors, elements):
    state = {}  # name -> 0 visiting, 1 done

    def walk(name, trail):
        if state.get(name) == 1:
            return
        if state.get(name) == 0:
            cycle = trail[trail.index(name):] + [name]
            errors.append(ModelError(CYCLIC_INHERITANCE,
                                     "inheritance cycle: " + " -> ".join(cycle), name))
            state[name] = 1
            return
        state[name] = 0
        el = elements.get(name)
        if el is not None and el.supertype is not None and el.supertype in elements:
            walk(el.supertype, trail + [name])
        state[name] = 1

    for name in elements:
        if name not in state:
            walk(name, [])


def _reachability_warnings(model):
    elements = model.elements
    subtypes = {name: [] for name in elements}
    for el in elements.values():
        if el.supertype is not None and el.supertype in subtypes:
            subtypes[el.supertype].append(el.name)

    seen = set()
    todo = [model.start_type]
    while todo:
        name = todo.pop()
        if name in seen or name not in elements:
            continue
        seen.add(name)
        el = elements[name]
        if el.supertype is not None:
            todo.append(el.supertype)
        todo.extend(subtypes[name])
        for m in el.members:
            if not m.is_value_binding:
                todo.append(m.type_name)

    return [f"element type {name!r} is unreachable from {model.start_type!r}"
            for name in elements if name not in seen]


def subtypes_of(model: ValidatedModel, t):
    """Direct subtypes of ``t`` in declaration order (empty for leaves)."""
    return model.subtypes_of(t)


def static_priority(model: ValidatedModel, t):
    """Priority declared on the type or its nearest annotated ancestor."""
    for el in model.supertype_chain(t):
        if el.constraints.priority is not None:
            return el.constraints.priority
    return None


def associativity_group(model: ValidatedModel, t):
    """(group anchor name, associativity) from the nearest ancestor that
    declares one, or (None, "none")."""
    for el in model.supertype_chain(t):
        if el.constraints.associativity != ASSOC_NONE:
            return el.name, el.constraints.associativity
    return None, ASSOC_NONE


def _slot_bears_constraints(model, m):
    if m.is_value_binding or m.type_name not in model.elements:
        return False
    for el in model.type_closure(m.type_name):
        if el.constraints.priority is not None:
            return True
        if el.constraints.associativity != ASSOC_NONE:
            return True
    return False


def bearing_slot(model: ValidatedModel, t):
    """The unique member slot whose type family declares priority or
    associativity, if any. Such a slot lends its constraints to the
    composite instance that contains it (a binary expression binds as
    tightly as its operator does)."""
    el = t if isinstance(t, ElementType) else model.elements[t]
    if el.kind != COMPOSITE:
        return None
    slots = [m for m in el.members if _slot_bears_constraints(model, m)]
    if len(slots) > 1:
        raise AmbiguousPriorityError(
            f"{el.name}: members {[m.name for m in slots]} all bear priority/associativity")
    return slots[0] if slots else None


def effective_priority(model: ValidatedModel, t):
    """The statically known priority of a type: its own declaration (or an
    ancestor's). For composites whose priority comes from a constituent,
    returns None; the per-instance value is read off the parse forest."""
    el = t if isinstance(t, ElementType) else model.elements[t]
    own = static_priority(model, el)
    if own is not None:
        return own
    if el.kind == COMPOSITE:
        bearing_slot(model, el)  # raises if the slot is ambiguous
    return None


def _mult(optional, many, min_count, max_count):
    if many:
        lo = 1 if min_count is None else min_count
        hi = max_count  # None = unbounded
        return Multiplicity(lo, hi)
    return Multiplicity(1, 1)


def mem(name, type_name, *, optional=False, many=False, min_count=None,
        max_count=None, separator=None, prefix=None, suffix=None,
        ref=False, id=False, position=None):
    """Member factory used with ModelBuilder. ``separator``, ``prefix`` and
    ``suffix`` accept regex strings or PatternSpec values."""
    def pat(p):
        return p if isinstance(p, PatternSpec) else PatternSpec.regex(p)

    member = Member(
        name=name,
        type_name=type_name,
        optional=optional,
        multiplicity=_mult(optional, many, min_count, max_count),
        separator=pat(separator) if separator is not None else None,
        prefix=[pat(p) for p in (prefix if isinstance(prefix, (list, tuple)) else [prefix])] if prefix else [],
        suffix=[pat(p) for p in (suffix if isinstance(suffix, (list, tuple)) else [suffix])] if suffix else [],
        position=position,
        is_reference=ref,
    )
    if id:
        member._marks_id = True  # consumed by ModelBuilder
    return member


class ModelBuilder:
    """Incremental, single-owner construction of a Model."""

    def __init__(self, name, start):
        self._model = Model(name=name, start_type=start)

    def ignore(self, pattern):
        p = pattern if isinstance(pattern, PatternSpec) else PatternSpec.regex(pattern)
        self._model.ignore_patterns.append(p)
        return self

    def _add(self, el):
        if el.name in self._model.elements:
            raise ValueError(f"duplicate element type {el.name!r}")
        self._model.elements[el.name] = el
        return self

    def abstract(self, name, supertype=None, *, assoc=ASSOC_NONE, priority=None,
                 composition=COMPOSE_NONE, tag=None, constraints=()):
        return self._add(ElementType(
            name=name, kind=ABSTRACT, supertype=supertype,
            semantic_tag=tag or name,
            constraints=ConstraintSet(associativity=assoc, priority=priority,
                                      composition=composition,
                                      custom_constraints=list(constraints))))

    def basic(self, name, pattern=None, supertype=None, *, value=None,
              priority=None, precedence=None, matcher=None, tag=None,
              constraints=()):
        if matcher is not None:
            spec = PatternSpec.matcher(matcher, precedence)
        elif isinstance(pattern, PatternSpec):
            spec = pattern
        else:
            spec = PatternSpec.regex(pattern or "", precedence)
        members = []
        if value is not None:
            members.append(Member(name="value", type_name=value, is_value_binding=True))
        return self._add(ElementType(
            name=name, kind=BASIC, supertype=supertype, pattern=spec,
            members=members, semantic_tag=tag or name,
            constraints=ConstraintSet(priority=priority,
                                      custom_constraints=list(constraints))))

    def composite(self, name, supertype=None, members=(), *, prefix=None,
                  suffix=None, scope=False, assoc=ASSOC_NONE, priority=None,
                  composition=COMPOSE_NONE, free_order=False, tag=None,
                  constraints=()):
        def pats(v):
            if not v:
                return []
            seq = v if isinstance(v, (list, tuple)) else [v]
            return [p if isinstance(p, PatternSpec) else PatternSpec.regex(p) for p in seq]

        id_member = None
        mlist = []
        for m in members:
            if getattr(m, "_marks_id", False):
                id_member = m.name
                del m._marks_id
            mlist.append(m)
        return self._add(ElementType(
            name=name, kind=COMPOSITE, supertype=supertype, members=mlist,
            prefix=pats(prefix), suffix=pats(suffix), scope_defining=scope,
            id_member=id_member, semantic_tag=tag or name,
            constraints=ConstraintSet(associativity=assoc, priority=priority,
                                      composition=composition, free_order=free_order,
                                      custom_constraints=list(constraints))))

    def build(self):
        return self._model

    def validate(self, registry=None):
        return validate_model(self._model, registry)


def strip_evaluation_order(model):
    """A copy of the model with associativity and priority removed, used to
    observe raw ambiguity counts."""
    src = model.model if isinstance(model, ValidatedModel) else model
    elements = {}
    for name, el in src.elements.items():
        cs = replace(el.constraints, associativity=ASSOC_NONE, priority=None)
        elements[name] = replace(el, constraints=cs)
    return Model(name=src.name, start_type=src.start_type, elements=elements,
                 ignore_patterns=list(src.ignore_patterns))
