"""Abstract syntax graphs: typed object trees plus resolved references.

A pruned parse tree is instantiated into nodes mirroring the model:
selection collapses (the subtype node stands in for the supertype slot),
list helpers flatten into member lists, delimiters disappear, and
value-binding basics parse their lexeme into a literal. Identifier
declarations are then gathered into nested scopes and reference members
are resolved lexeme-by-lexeme, innermost scope first, in a second pass,
so references may point backward, forward, or at their own declaration.
Evaluation walks the finished graph through host-registered callbacks
with members evaluated on demand.
"""

import itertools
import json
import math
from dataclasses import dataclass, field

from . import model as M
from . import grammar as G


class ValueParseError(Exception):
    pass


class MissingCallback(Exception):
    pass


class RuntimeEvalError(Exception):
    pass


class ConstraintPredicateError(Exception):
    pass


class DuplicateDeclaration(Exception):
    def __init__(self, lexeme, scope, span=None):
        self.lexeme = lexeme
        self.scope = scope
        self.span = span
        super().__init__(f"duplicate declaration of {lexeme!r}")


class UnresolvedReference(Exception):
    def __init__(self, lexeme, span, candidates=()):
        self.lexeme = lexeme
        self.span = span
        self.candidates = list(candidates)
        hint = f"; candidates elsewhere: {self.candidates}" if self.candidates else ""
        super().__init__(f"unresolved reference {lexeme!r} at {span}{hint}")


class AmbiguousParse(Exception):
    """More than one interpretation survived every constraint."""

    def __init__(self, count, spans):
        self.count = count
        self.spans = spans
        super().__init__(f"{count} interpretations survive; "
                         f"conflicting spans: {spans}")


@dataclass(frozen=True)
class RefPlaceholder:
    """An unresolved reference member: the identifier lexeme at the site."""

    lexeme: str
    span: tuple
    target_type: str


@dataclass(frozen=True)
class Ref:
    """A resolved reference member: target node id plus the site lexeme."""

    target: int
    lexeme: str
    span: tuple


@dataclass
class AsgNode:
    """One instantiated model object."""

    id: int
    type_name: str
    span: tuple
    members: dict = field(default_factory=dict)
    value: object = None
    lexeme: str | None = None
    builtin: bool = False

    def member_nodes(self):
        """Direct tree children in member order (lists flattened)."""
        for value in self.members.values():
            if isinstance(value, AsgNode):
                yield value
            elif isinstance(value, list):
                yield from (v for v in value if isinstance(v, AsgNode))

    def walk(self):
        yield self
        for child in self.member_nodes():
            yield from child.walk()


@dataclass
class Scope:
    """One nesting level of the symbol table."""

    owner: int | None
    parent: "Scope | None" = None
    bindings: dict = field(default_factory=dict)

    def declare(self, name, node):
        if name in self.bindings:
            raise DuplicateDeclaration(name, self, node.span)
        self.bindings[name] = node

    def chain(self):
        scope = self
        while scope is not None:
            yield scope
            scope = scope.parent


@dataclass
class Asg:
    """The finished graph: nodes by id, the root, and reference edges."""

    nodes: dict
    root: int
    reference_edges: list
    global_scope: Scope | None = None

    @property
    def root_node(self):
        return self.nodes[self.root]


def _core_child(tree):
    """The single non-delimiter child of a wrapper tree."""
    for child in tree.children:
        if not child.symbol.startswith("'"):
            return child
    return None


def _leaf_span(tree):
    leaves = [t for t in tree.walk() if t.is_leaf]
    if not leaves:
        return (tree.start, tree.start)
    return (leaves[0].token.start, leaves[-1].token.end)


class _Instantiator:
    def __init__(self, vmodel, grammar, ids=None):
        self.model = vmodel
        self.grammar = grammar
        self.ids = ids if ids is not None else itertools.count()

    def node_of(self, tree):
        prod = self.grammar.production(tree.prod_id)
        if prod.origin in (G.SELECTION, G.START):
            child = tree.children[0]
            return self.leaf_node(child.token) if child.is_leaf else self.node_of(child)
        if prod.origin in (G.COMPOSITION, G.PERMUTATION):
            return self.composite_node(tree, prod)
        raise ValueError(f"cannot instantiate {prod.origin} node {tree.symbol}")

    def composite_node(self, tree, prod):
        el = self.model.element(prod.element_type)
        members = {}
        for idx in sorted(prod.member_bindings):
            name = prod.member_bindings[idx]
            member = el.member(name)
            members[name] = self.member_value(member, tree.children[idx])
        # Member maps keep declaration order regardless of surface order.
        ordered = {m.name: members[m.name] for m in el.members
                   if m.name in members}
        return AsgNode(id=next(self.ids), type_name=el.name,
                       span=_leaf_span(tree), members=ordered)

    def member_value(self, member, tree):
        if member.multiplicity.is_list:
            items = []
            self.collect_list(member, tree, items)
            return items
        if member.optional:
            core = _core_child(tree)
            if core is None:
                return None
            return self.decode_core(member, core)
        return self.decode_core(member, tree)

    def collect_list(self, member, tree, items):
        if tree.is_leaf:
            if not tree.symbol.startswith("'"):
                items.append(self.decode_core(member, tree))
            return
        prod = self.grammar.production(tree.prod_id)
        if prod.origin in (G.REPETITION_RECURSIVE, G.REPETITION_BASE,
                           G.OPTIONAL_WRAP, G.OPTIONAL_EPSILON):
            for child in tree.children:
                self.collect_list(member, child, items)
        else:
            items.append(self.decode_core(member, tree))

    def decode_core(self, member, tree):
        if member.is_reference:
            tok = tree.token
            return RefPlaceholder(lexeme=tok.lexeme, span=(tok.start, tok.end),
                                  target_type=member.type_name)
        if tree.is_leaf:
            return self.leaf_node(tree.token)
        return self.node_of(tree)

    def leaf_node(self, token):
        el = self.model.element(token.type_name)
        value = None
        vm = el.value_member
        if vm is not None:
            value = parse_literal(token.lexeme, vm.type_name)
        return AsgNode(id=next(self.ids), type_name=el.name,
                       span=(token.start, token.end), value=value,
                       lexeme=token.lexeme)


def parse_literal(lexeme, kind):
    try:
        if kind == "int":
            return int(lexeme, 10)
        if kind == "float":
            return float(lexeme)
        return lexeme
    except ValueError as exc:
        raise ValueParseError(f"cannot read {lexeme!r} as {kind}") from exc


def instantiate(tree, vmodel, grammar, ids=None) -> AsgNode:
    """Build the object tree of one parse tree; references stay
    unresolved placeholders."""
    return _Instantiator(vmodel, grammar, ids).node_of(tree)


def apply_custom_constraints(root, vmodel, registry):
    """Run every registered constraint predicate depth-first. Returns the
    list of (node, predicate name) violations; empty means the candidate
    stands. Predicates may see unresolved reference placeholders."""
    violations = []
    for node in _post_order(root):
        el = vmodel.elements.get(node.type_name)
        if el is None:
            continue
        for ancestor in vmodel.supertype_chain(el):
            for pred_name in ancestor.constraints.custom_constraints:
                pred = registry.predicates.get(pred_name) if registry else None
                if pred is None:
                    raise ConstraintPredicateError(
                        f"predicate {pred_name!r} is not registered")
                try:
                    ok = pred(node)
                except Exception as exc:
                    raise ConstraintPredicateError(
                        f"predicate {pred_name!r} failed on node {node.id}: {exc}") from exc
                if not ok:
                    violations.append((node, pred_name))
    return violations


def _post_order(node):
    for child in node.member_nodes():
        yield from _post_order(child)
    yield node


def builtin_node(type_name, name, ids):
    """A predefined declaration for the global scope (no source span)."""
    ident = AsgNode(id=next(ids), type_name="Identifier", span=(-1, -1),
                    value=name, lexeme=name, builtin=True)
    return AsgNode(id=next(ids), type_name=type_name, span=(-1, -1),
                   members={"identifier": ident}, builtin=True)


def _binding_name(node, el):
    id_value = node.members.get(el.id_member)
    if isinstance(id_value, AsgNode):
        return id_value.lexeme if id_value.lexeme is not None else str(id_value.value)
    return None


def resolve_references(root, vmodel, predefined=(), ids=None) -> Asg:
    """Two passes: collect declarations into nested scopes, then resolve
    every reference member from its own scope outward. Inner declarations
    shadow outer ones; same-scope forward references and self references
    resolve because collection completes first."""
    ids = ids if ids is not None else itertools.count(10**6)
    global_scope = Scope(owner=None)
    for node in predefined:
        el = vmodel.elements.get(node.type_name)
        name = _binding_name(node, el) if el is not None and el.id_member else None
        if name is not None:
            global_scope.declare(name, node)

    sites = []  # (owner node, member name, index or None, placeholder, scope)

    def walk(node, scope):
        el = vmodel.elements.get(node.type_name)
        if el is not None and el.id_member is not None:
            name = _binding_name(node, el)
            if name is not None:
                scope.declare(name, node)
        inner = Scope(owner=node.id, parent=scope) \
            if el is not None and el.scope_defining else scope
        for mname, value in node.members.items():
            if isinstance(value, RefPlaceholder):
                sites.append((node, mname, None, value, inner))
            elif isinstance(value, AsgNode):
                walk(value, inner)
            elif isinstance(value, list):
                for i, item in enumerate(value):
                    if isinstance(item, RefPlaceholder):
                        sites.append((node, mname, i, item, inner))
                    elif isinstance(item, AsgNode):
                        walk(item, inner)

    walk(root, global_scope)

    edges = []
    for owner, mname, index, placeholder, scope in sites:
        target = None
        candidates = []
        for s in scope.chain():
            node = s.bindings.get(placeholder.lexeme)
            if node is None:
                continue
            if vmodel.is_subtype_of(node.type_name, placeholder.target_type):
                target = node
                break
            candidates.append(node.type_name)
        if target is None:
            raise UnresolvedReference(placeholder.lexeme, placeholder.span,
                                      candidates)
        ref = Ref(target=target.id, lexeme=placeholder.lexeme,
                  span=placeholder.span)
        if index is None:
            owner.members[mname] = ref
        else:
            owner.members[mname][index] = ref
        edges.append((owner.id, mname, target.id))

    nodes = {n.id: n for n in root.walk()}
    for n in predefined:
        for sub in n.walk():
            nodes[sub.id] = sub
    return Asg(nodes=nodes, root=root.id, reference_edges=edges,
               global_scope=global_scope)


class EvalContext:
    """What a semantic callback sees: its node, lazy member evaluation,
    resolved reference targets, and a shared mutable state."""

    def __init__(self, engine, node):
        self._engine = engine
        self.node = node
        self.state = engine.state
        self.asg = engine.asg

    @property
    def value(self):
        return self.node.value

    def member_node(self, name):
        return self.node.members.get(name)

    def ref(self, name):
        value = self.node.members.get(name)
        if isinstance(value, Ref):
            return self.asg.nodes[value.target]
        raise RuntimeEvalError(f"member {name!r} of {self.node.type_name} "
                               "is not a resolved reference")

    def eval_node(self, node):
        return self._engine.eval_node(node)

    def member(self, name):
        """Evaluate one member on demand; lists evaluate element-wise,
        absent optionals yield None."""
        value = self.node.members.get(name)
        if value is None:
            return None
        if isinstance(value, list):
            return [self._engine.eval_node(v) if isinstance(v, AsgNode) else v
                    for v in value]
        if isinstance(value, AsgNode):
            return self._engine.eval_node(value)
        return value


class _Evaluator:
    def __init__(self, asg, vmodel, registry, state):
        self.asg = asg
        self.model = vmodel
        self.registry = registry
        self.state = state

    def eval_node(self, node):
        el = self.model.elements.get(node.type_name)
        tag = el.semantic_tag if el is not None else None
        cb = self.registry.callbacks.get(tag or node.type_name)
        if cb is None:
            raise MissingCallback(
                f"no callback registered for {tag or node.type_name!r}")
        return cb(EvalContext(self, node))


def evaluate(asg, vmodel, registry, state=None):
    """Evaluate the graph from its root. Callbacks pull member values on
    demand, so control flow can skip or repeat subtrees. Repeated
    evaluation of the same graph with the same state is bit-identical for
    pure callbacks."""
    return _Evaluator(asg, vmodel, registry, state or {}).eval_node(asg.root_node)


def ieee_div(a, b):
    """Division that never traps: IEEE-754 semantics on zero divisors."""
    try:
        return a / b
    except ZeroDivisionError:
        if a == 0:
            return math.nan
        return math.copysign(math.inf, a) * math.copysign(1.0, b)


def format_number(x):
    """Shortest round-trip decimal; integral values print with no point."""
    if isinstance(x, float) and math.isfinite(x) and x == int(x):
        return str(int(x))
    if isinstance(x, int):
        return str(x)
    return repr(x)


def _member_json(value):
    if value is None:
        return None
    if isinstance(value, AsgNode):
        return value.id
    if isinstance(value, Ref):
        return value.target
    if isinstance(value, RefPlaceholder):
        return {"ref": value.lexeme}
    if isinstance(value, list):
        return [_member_json(v) for v in value]
    return value


def asg_json(asg: Asg, indent=2) -> str:
    """Stable JSON export; field order is fixed for golden comparisons."""
    nodes = []
    for nid in sorted(asg.nodes):
        n = asg.nodes[nid]
        nodes.append({
            "id": n.id,
            "type": n.type_name,
            "span": list(n.span),
            "value": n.value,
            "members": {k: _member_json(v) for k, v in n.members.items()},
        })
    doc = {
        "nodes": nodes,
        "root": asg.root,
        "refEdges": [{"from": f, "member": m, "to": t}
                     for (f, m, t) in asg.reference_edges],
    }
    return json.dumps(doc, indent=indent)


def asg_dot(asg: Asg) -> str:
    """Graphviz export: solid member edges, dashed reference edges."""
    lines = ["digraph asg {", "  node [shape=box];"]
    for nid in sorted(asg.nodes):
        n = asg.nodes[nid]
        label = n.type_name
        if n.value is not None:
            label += f"\\n{n.value}"
        elif n.lexeme:
            label += f"\\n{n.lexeme}"
        lines.append(f'  n{nid} [label="{label}"];')
    for nid in sorted(asg.nodes):
        n = asg.nodes[nid]
        for mname, value in n.members.items():
            vals = value if isinstance(value, list) else [value]
            for v in vals:
                if isinstance(v, AsgNode):
                    lines.append(f'  n{nid} -> n{v.id} [label="{mname}"];')
    for (f, m, t) in asg.reference_edges:
        lines.append(f'  n{f} -> n{t} [style=dashed, label="{m}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _pattern_text(pats):
    return [p.literal_text() or p.expression for p in pats]


def asg_to_text(node, vmodel) -> str:
    """Reconstruct a concrete text for an object tree: members in
    composition order with delimiters and separators re-inserted. Parsing
    the result again yields an isomorphic tree."""
    pieces = []

    def wordish(ch):
        return ch.isalnum() or ch == "_"

    def emit(piece):
        if not piece:
            return
        if pieces and wordish(pieces[-1][-1]) and wordish(piece[0]):
            pieces.append(" ")
        pieces.append(piece)

    def render(n):
        if isinstance(n, (Ref, RefPlaceholder)):
            emit(n.lexeme)
            return
        el = vmodel.element(n.type_name)
        if el.kind == M.BASIC:
            emit(n.lexeme if n.lexeme is not None else str(n.value))
            return
        for text in _pattern_text(el.prefix):
            emit(text)
        for member in _ordered_members(el):
            value = n.members.get(member.name)
            if value is None:
                continue  # absent optional member: delimiters stay out too
            for text in _pattern_text(member.prefix):
                emit(text)
            if isinstance(value, list):
                sep = member.separator.literal_text() if member.separator else None
                for i, item in enumerate(value):
                    if i and sep is not None:
                        emit(sep)
                    render(item)
            else:
                render(value)
            for text in _pattern_text(member.suffix):
                emit(text)
        for text in _pattern_text(el.suffix):
            emit(text)

    def _ordered_members(el):
        n = len(el.members)
        slots = [None] * n
        rest = []
        for m in el.members:
            if m.position is not None and m.position < n:
                slots[m.position] = m
            else:
                rest.append(m)
        it = iter(rest)
        return [m if m is not None else next(it) for m in slots]

    render(node)
    return "".join(pieces)
