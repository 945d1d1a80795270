"""Shared packed parse forests and concrete parse trees.

A forest node is keyed by (symbol, start, end) and packs one Derivation
per way of tiling a production over that extent; common subtrees are
shared between derivations. Constraint pruning refines keys with a
fourth component but the structure is otherwise identical, so counting
and enumeration treat keys opaquely.

Forests may contain derivation edges that point back to a node already on
the current path (a production cycle over the same extent); such edges
contribute no trees and are skipped during counting and enumeration.
"""

import itertools
from dataclasses import dataclass, field

from .lexer import Token


@dataclass(frozen=True)
class Derivation:
    """One alternative of a packed node: a production applied to an
    ordered run of children (node keys or tokens)."""

    prod_id: int
    children: tuple


@dataclass(frozen=True)
class ParseTree:
    """A concrete derivation tree unpacked from a forest."""

    symbol: str
    prod_id: int | None
    children: tuple
    token: Token | None
    start: int
    end: int

    @property
    def is_leaf(self):
        return self.token is not None

    def walk(self):
        yield self
        for c in self.children:
            yield from c.walk()

    def pretty(self, indent=0):
        pad = "  " * indent
        if self.is_leaf:
            return f"{pad}{self.symbol} {self.token.lexeme!r}"
        lines = [f"{pad}{self.symbol}[{self.start},{self.end})"]
        lines += [c.pretty(indent + 1) for c in self.children]
        return "\n".join(lines)


@dataclass
class ParseForest:
    """All derivations of the start symbol over one input."""

    grammar: object
    nodes: dict
    roots: list
    text: str = ""

    @property
    def root(self):
        """(symbol, start, end) of the root extent, or None when empty."""
        if not self.roots:
            return None
        return tuple(self.roots[0][:3])

    @property
    def is_empty(self):
        return not self.roots or all(not self.nodes.get(r) for r in self.roots)

    @staticmethod
    def empty(grammar, text=""):
        return ParseForest(grammar=grammar, nodes={}, roots=[], text=text)

    def has_cycle(self):
        state = {}

        def visit(key):
            st = state.get(key)
            if st == 1:
                return True
            if st == 2:
                return False
            state[key] = 1
            for d in self.nodes.get(key, ()):
                for c in d.children:
                    if not isinstance(c, Token) and visit(c):
                        return True
            state[key] = 2
            return False

        return any(visit(r) for r in self.roots)


def count_trees(forest: ParseForest, cap: int) -> int:
    """Number of distinct derivation trees, saturating at ``cap``."""
    if cap < 1:
        raise ValueError("cap must be at least 1")
    if forest.is_empty:
        return 0

    if not forest.has_cycle():
        memo = {}

        def count(key):
            if key in memo:
                return memo[key]
            total = 0
            for d in forest.nodes.get(key, ()):
                ways = 1
                for c in d.children:
                    if not isinstance(c, Token):
                        ways *= count(c)
                        if ways >= cap:
                            break
                total = min(cap, total + ways)
                if total >= cap:
                    break
            memo[key] = total
            return total

        return min(cap, sum(count(r) for r in forest.roots))

    # Cyclic forest: count path-aware, skipping derivations that revisit a
    # node on the current path. No memoization; saturation keeps it small.
    def count_acyclic(key, active):
        if key in active:
            return 0
        active = active | {key}
        total = 0
        for d in forest.nodes.get(key, ()):
            ways = 1
            for c in d.children:
                if not isinstance(c, Token):
                    ways *= count_acyclic(c, active)
                    if ways == 0 or ways >= cap:
                        break
            total = min(cap, total + ways)
            if total >= cap:
                break
        return total

    return min(cap, sum(count_acyclic(r, frozenset()) for r in forest.roots))


def _leaf(tok):
    return ParseTree(symbol=tok.type_name, prod_id=None, children=(),
                     token=tok, start=tok.start, end=tok.end)


def enumerate_trees(forest: ParseForest, limit: int):
    """Concrete trees in derivation-index lexicographic order, at most
    ``limit`` of them."""
    if limit < 1:
        raise ValueError("limit must be at least 1")

    def trees(key, active):
        if key in active:
            return
        sub_active = active | {key}
        sym, start, end = key[0], key[1], key[2]
        for d in forest.nodes.get(key, ()):
            child_iters = []
            for c in d.children:
                if isinstance(c, Token):
                    child_iters.append((_leaf(c),))
                else:
                    child_iters.append(tuple(trees(c, sub_active)))
            for combo in itertools.product(*child_iters):
                yield ParseTree(symbol=sym, prod_id=d.prod_id,
                                children=combo, token=None,
                                start=start, end=end)

    out = []
    for root in forest.roots:
        for t in trees(root, frozenset()):
            out.append(t)
            if len(out) >= limit:
                return out
    return out


def forest_dot(forest: ParseForest) -> str:
    """Graphviz rendering: packed nodes as records with one port per
    derivation."""
    ids = {key: f"n{i}" for i, key in enumerate(forest.nodes)}
    lines = ["digraph forest {", "  node [shape=record];"]
    for key, derivs in forest.nodes.items():
        sym, start, end = key[0], key[1], key[2]
        ports = "|".join(f"<d{i}> #{d.prod_id}" for i, d in enumerate(derivs))
        label = f"{sym} [{start},{end})" + (f"|{ports}" if ports else "")
        label = label.replace('"', '\\"')
        lines.append(f'  {ids[key]} [label="{{{label}}}"];')
    leaf_ids = {}
    for key, derivs in forest.nodes.items():
        for i, d in enumerate(derivs):
            for c in d.children:
                if isinstance(c, Token):
                    if c not in leaf_ids:
                        leaf_ids[c] = f"t{len(leaf_ids)}"
                        label = str(c).replace('"', '\\"')
                        lines.append(f'  {leaf_ids[c]} [shape=plaintext, label="{label}"];')
                    lines.append(f"  {ids[key]}:d{i} -> {leaf_ids[c]};")
                else:
                    lines.append(f"  {ids[key]}:d{i} -> {ids[c]};")
    lines.append("}")
    return "\n".join(lines) + "\n"
