"""Declarative disambiguation: forest filtering by model constraints.

Three rules prune derivations after parsing:

* associativity: inside a left-to-right node, the rightmost constituent
  may not belong to the same associativity group at equal effective
  priority (mirrored for right-to-left; non-associative forbids both
  ends);
* priority: no constituent of an annotated node may bind more loosely
  (numerically greater effective priority) than the node itself;
* composition: when two derivations of an eager node differ only in how
  far a trailing optional or repeatable constituent extends into a nested
  composite of the same type, the inner attachment wins (lazy keeps the
  outer one).

Effective priority and associativity of a composite instance come from
the constituent filling its unique constraint-bearing member slot (a
binary expression binds like its operator token), so the same packed
extent can behave differently depending on which concrete constituent it
packs. Pruning therefore first refines node keys by constraint profile,
then filters derivations, then drops nodes left without derivations,
transitively.
"""

from collections import namedtuple

from . import model as M
from .forest import Derivation, ParseForest
from .grammar import COMPOSITION, PERMUTATION, SELECTION, START
from .lexer import Token

Profile = namedtuple("Profile", ["group", "priority", "assoc"])
NO_PROFILE = Profile(None, None, M.ASSOC_NONE)


def static_profile(vmodel, type_name):
    if type_name not in vmodel.elements:
        return NO_PROFILE
    group, assoc = M.associativity_group(vmodel, type_name)
    prio = M.static_priority(vmodel, type_name)
    return Profile(group, prio, assoc)


class _Pruner:
    def __init__(self, forest, vmodel):
        self.forest = forest
        self.model = vmodel
        self.grammar = forest.grammar
        self._static = {}
        self._bearing = {}

    def static(self, type_name):
        if type_name not in self._static:
            self._static[type_name] = static_profile(self.model, type_name)
        return self._static[type_name]

    def bearing_member(self, type_name):
        if type_name not in self._bearing:
            el = self.model.elements.get(type_name)
            if el is None or el.kind != M.COMPOSITE:
                self._bearing[type_name] = None
            else:
                self._bearing[type_name] = M.bearing_slot(self.model, el)
        return self._bearing[type_name]

    # -- profile computation ------------------------------------------------

    def node_profiles(self):
        """Fixpoint over the forest: the set of constraint profiles each
        packed node can take, one per concrete interpretation below it."""
        profiles = {key: set() for key in self.forest.nodes}
        changed = True
        while changed:
            changed = False
            for key, derivs in self.forest.nodes.items():
                for d in derivs:
                    for p in self.deriv_profiles(d, profiles):
                        if p not in profiles[key]:
                            profiles[key].add(p)
                            changed = True
        return profiles

    def child_profiles(self, child, profiles):
        if isinstance(child, Token):
            return {self.static(child.type_name)}
        return profiles.get(child, set())

    def deriv_profiles(self, d, profiles):
        prod = self.grammar.production(d.prod_id)
        if prod.origin in (SELECTION, START):
            return self.child_profiles(d.children[0], profiles) if d.children else {NO_PROFILE}
        if prod.origin not in (COMPOSITION, PERMUTATION):
            return {NO_PROFILE}
        return self.composite_profiles(prod, d, profiles)

    def composite_profiles(self, prod, d, profiles):
        own = self.static(prod.element_type)
        bearing = self.bearing_member(prod.element_type)
        if bearing is None:
            return {own}
        idx = self._slot_index(prod, bearing.name)
        if idx is None or idx >= len(d.children):
            return {own}
        out = set()
        for q in self.child_profiles(d.children[idx], profiles):
            out.add(self._combine(own, q))
        return out or {own}

    @staticmethod
    def _combine(own, constituent):
        prio = own.priority if own.priority is not None else constituent.priority
        if own.assoc != M.ASSOC_NONE:
            group, assoc = own.group, own.assoc
        else:
            group, assoc = constituent.group, constituent.assoc
        return Profile(group, prio, assoc)

    @staticmethod
    def _slot_index(prod, member_name):
        for idx, name in prod.member_bindings.items():
            if name == member_name:
                return idx
        return None

    # -- refinement ----------------------------------------------------------

    def refine(self, profiles):
        """Split every packed node by profile so each refined node has a
        single, definite constraint profile. Derivations expand over the
        profile choices of their children."""
        refined = {}
        for key, derivs in self.forest.nodes.items():
            for p in profiles[key] or {NO_PROFILE}:
                refined[key + (p,)] = []
        for key, derivs in self.forest.nodes.items():
            for d in derivs:
                node_children = [(i, c) for i, c in enumerate(d.children)
                                 if not isinstance(c, Token)]
                choice_sets = [sorted(profiles[c] or {NO_PROFILE}, key=repr)
                               for _, c in node_children]
                for combo in _product(choice_sets):
                    children = list(d.children)
                    assigned = {}
                    for (i, c), q in zip(node_children, combo):
                        children[i] = c + (q,)
                        assigned[i] = q
                    p = self._deriv_profile_under(d, assigned)
                    rkey = key + (p,)
                    if rkey in refined:
                        refined[rkey].append(
                            _RefinedDeriv(d.prod_id, tuple(children)))
        return refined

    def _deriv_profile_under(self, d, assigned):
        prod = self.grammar.production(d.prod_id)
        if prod.origin in (SELECTION, START):
            if not d.children:
                return NO_PROFILE
            return self._child_profile_under(d.children[0], assigned.get(0))
        if prod.origin not in (COMPOSITION, PERMUTATION):
            return NO_PROFILE
        own = self.static(prod.element_type)
        bearing = self.bearing_member(prod.element_type)
        if bearing is None:
            return own
        idx = self._slot_index(prod, bearing.name)
        if idx is None or idx >= len(d.children):
            return own
        return self._combine(own, self._child_profile_under(d.children[idx],
                                                            assigned.get(idx)))

    def _child_profile_under(self, child, assigned):
        if isinstance(child, Token):
            return self.static(child.type_name)
        return assigned if assigned is not None else NO_PROFILE

    # -- predicates ----------------------------------------------------------

    def violates(self, rkey, rd):
        """Associativity and priority checks for one refined derivation."""
        prod = self.grammar.production(rd.prod_id)
        if prod.origin not in (COMPOSITION, PERMUTATION):
            return False
        p = rkey[3]
        slots = sorted(prod.member_bindings)
        if not slots:
            return False

        def slot_profile(idx):
            c = rd.children[idx]
            if isinstance(c, Token):
                return self.static(c.type_name)
            return c[3]

        if p.assoc != M.ASSOC_NONE and p.group is not None:
            ends = []
            if p.assoc in (M.LEFT_TO_RIGHT, M.NON_ASSOCIATIVE):
                ends.append(slots[-1])
            if p.assoc in (M.RIGHT_TO_LEFT, M.NON_ASSOCIATIVE):
                ends.append(slots[0])
            for idx in ends:
                q = slot_profile(idx)
                if q.group == p.group and q.priority == p.priority:
                    return True

        if p.priority is not None:
            bearing = self.bearing_member(prod.element_type)
            bearing_idx = self._slot_index(prod, bearing.name) if bearing else None
            for idx in slots:
                if idx == bearing_idx:
                    continue
                q = slot_profile(idx)
                if q.priority is not None and q.priority > p.priority:
                    return True
        return False

    # -- composition policy ----------------------------------------------------

    def apply_composition(self, refined):
        """Within one refined node, resolve inner-vs-outer attachment of a
        trailing optional or repeatable constituent between derivations of
        the same production. The policy lives on the composite type the
        node instantiates."""
        for rkey, derivs in refined.items():
            if len(derivs) < 2:
                continue
            el = self.model.elements.get(rkey[0])
            if el is None or el.kind != M.COMPOSITE:
                continue
            policy = el.constraints.composition
            if policy == M.COMPOSE_NONE:
                continue
            refined[rkey] = self._filter_attachments(el, policy, derivs)

    def _filter_attachments(self, el, policy, derivs):
        keep = list(derivs)
        for a in derivs:
            for b in derivs:
                if a is b or a not in keep:
                    continue
                loser = self._attachment_loser(el, policy, a, b)
                if loser is not None and loser in keep and len(keep) > 1:
                    keep.remove(loser)
        return keep

    def _attachment_loser(self, el, policy, a, b):
        """If a and b differ only in the split between the last two member
        slots, with the earlier slot nesting a composite of the same type
        and the trailing member optional or repeatable, return the
        derivation the policy rejects."""
        if a.prod_id != b.prod_id:
            return None
        prod = self.grammar.production(a.prod_id)
        slots = sorted(prod.member_bindings)
        if len(slots) < 2:
            return None
        t_idx, p_idx = slots[-1], slots[-2]
        if t_idx != p_idx + 1:
            return None
        member = el.member(prod.member_bindings[t_idx])
        if not (member.optional or member.multiplicity.is_list):
            return None
        for i, (ca, cb) in enumerate(zip(a.children, b.children)):
            if i in (t_idx, p_idx):
                continue
            if ca != cb:
                return None
        if a.children[t_idx] == b.children[t_idx]:
            return None
        if not self._nests_same_type(a.children[p_idx], el.name) and \
           not self._nests_same_type(b.children[p_idx], el.name):
            return None
        wa = _extent_width(a.children[t_idx])
        wb = _extent_width(b.children[t_idx])
        if wa == wb:
            return None
        if policy == M.EAGER:
            return a if wa > wb else b
        return a if wa < wb else b

    def _nests_same_type(self, child, type_name):
        """Whether a constituent can stand for an instance of the given
        composite type (through selection collapse)."""
        if isinstance(child, Token):
            return child.type_name == type_name
        sym = child[0]
        if sym == type_name:
            return True
        el = self.model.elements.get(sym)
        return el is not None and el.kind == M.ABSTRACT and \
            any(s.name == type_name for s in self.model.type_closure(el))

    # -- cleanup -----------------------------------------------------------

    @staticmethod
    def sweep(refined, roots):
        """Drop derivations referencing nodes that cannot ground out, then
        unreachable nodes; both transitively."""
        valid = set()
        changed = True
        while changed:
            changed = False
            for key, derivs in refined.items():
                if key in valid:
                    continue
                for d in derivs:
                    if all(isinstance(c, Token) or c in valid for c in d.children):
                        valid.add(key)
                        changed = True
                        break

        pruned = {}
        for key, derivs in refined.items():
            if key not in valid:
                continue
            pruned[key] = [d for d in derivs
                           if all(isinstance(c, Token) or c in valid
                                  for c in d.children)]

        live_roots = [r for r in roots if r in pruned]
        reachable = set()
        todo = list(live_roots)
        while todo:
            key = todo.pop()
            if key in reachable:
                continue
            reachable.add(key)
            for d in pruned[key]:
                for c in d.children:
                    if not isinstance(c, Token) and c in pruned:
                        todo.append(c)
        return {k: v for k, v in pruned.items() if k in reachable}, live_roots


class _RefinedDeriv:
    __slots__ = ("prod_id", "children")

    def __init__(self, prod_id, children):
        self.prod_id = prod_id
        self.children = children

    def __eq__(self, other):
        return (self.prod_id, self.children) == (other.prod_id, other.children)

    def __hash__(self):
        return hash((self.prod_id, self.children))


def _extent_width(child):
    if isinstance(child, Token):
        return child.end - child.start
    return child[2] - child[1]


def _product(choice_sets):
    if not choice_sets:
        yield ()
        return
    head, *rest = choice_sets
    for h in head:
        for r in _product(rest):
            yield (h,) + r


def prune_constraints(forest: ParseForest, vmodel) -> ParseForest:
    """Filter a raw forest down to the derivations satisfying every
    associativity, priority, and composition constraint of the model.
    May return an empty forest; never raises."""
    if forest.is_empty:
        return forest
    pruner = _Pruner(forest, vmodel)
    profiles = pruner.node_profiles()
    refined = pruner.refine(profiles)

    for rkey, derivs in refined.items():
        refined[rkey] = [d for d in derivs if not pruner.violates(rkey, d)]
    pruner.apply_composition(refined)

    roots = []
    for r in forest.roots:
        roots.extend(sorted((k for k in refined if k[:3] == tuple(r[:3])),
                            key=repr))

    nodes, live_roots = pruner.sweep(refined, roots)
    frozen = {k: [Derivation(d.prod_id, d.children) for d in v]
              for k, v in nodes.items()}
    return ParseForest(grammar=forest.grammar, nodes=frozen,
                       roots=live_roots, text=forest.text)
