"""Earley-style chart parsing over a token graph.

The chart is indexed by input offsets rather than token indices, which
lets alternative lexical paths of the token graph compete inside one
parse. Epsilon productions are handled with the standard nullable
precomputation (advancing over a predicted nullable symbol immediately),
left and right recursion both work, and production cycles over an
identical extent contribute no derivations.

The result is a shared packed parse forest: one node per
(symbol, start, end) extent holding every derivation of that extent.
"""

from dataclasses import dataclass

from .forest import Derivation, ParseForest


class ParseError(Exception):
    """No derivation of the start symbol spans the input. Reports the
    farthest offset reached and the terminals expected there."""

    def __init__(self, offset, expected, message=None):
        self.offset = offset
        self.expected = sorted(expected)
        super().__init__(message or
                         f"parse failed at offset {offset}, expected one of: "
                         + (", ".join(self.expected) or "(nothing)"))


def nullable_symbols(grammar):
    """Nonterminals that derive the empty token sequence."""
    nullable = set()
    changed = True
    while changed:
        changed = False
        for p in grammar.productions:
            if p.lhs in nullable:
                continue
            if all(s in nullable for s in p.rhs):
                nullable.add(p.lhs)
                changed = True
    return nullable


@dataclass(frozen=True)
class ChartItem:
    """A dotted production instance: rhs[:dot] recognized since origin."""

    prod_id: int
    dot: int
    origin: int


def parse(grammar, graph) -> ParseForest:
    """Parse a token graph and return the packed forest of every
    derivation of the start symbol over the whole input."""
    chart, completed = _run_chart(grammar, graph)
    start_key = (grammar.start, graph.start_offset, graph.end_offset)
    if start_key not in completed:
        _report_failure(grammar, graph, chart)
    nodes = _build_forest(grammar, graph, completed, start_key)
    return ParseForest(grammar=grammar, nodes=nodes, roots=[start_key],
                       text=graph.text)


def _run_chart(grammar, graph):
    nullable = nullable_symbols(grammar)
    nonterminals = grammar.nonterminals
    productions = grammar.productions

    chart = {}  # offset -> set of ChartItem
    completed = {}  # (symbol, start, end) -> sorted set of prod ids

    def add(pos, item):
        bucket = chart.setdefault(pos, set())
        if item in bucket:
            return False
        bucket.add(item)
        return True

    start0 = graph.start_offset
    for pid in grammar.alternatives(grammar.start):
        add(start0, ChartItem(pid, 0, start0))

    positions = sorted({start0}
                       | {t.start for t in graph.nodes}
                       | {graph.next_offset(t) for t in graph.nodes})

    for pos in positions:
        if pos not in chart:
            continue
        worklist = list(chart[pos])
        while worklist:
            item = worklist.pop()
            prod = productions[item.prod_id]
            if item.dot < len(prod.rhs):
                nxt = prod.rhs[item.dot]
                if nxt in nonterminals:
                    for pid in grammar.alternatives(nxt):
                        if add(pos, ChartItem(pid, 0, pos)):
                            worklist.append(ChartItem(pid, 0, pos))
                    if nxt in nullable:
                        advanced = ChartItem(item.prod_id, item.dot + 1, item.origin)
                        if add(pos, advanced):
                            worklist.append(advanced)
                # Terminals wait for the scan pass below.
            else:
                key = (prod.lhs, item.origin, pos)
                completed.setdefault(key, set()).add(item.prod_id)
                for waiting in list(chart.get(item.origin, ())):
                    wprod = productions[waiting.prod_id]
                    if waiting.dot < len(wprod.rhs) and wprod.rhs[waiting.dot] == prod.lhs:
                        advanced = ChartItem(waiting.prod_id, waiting.dot + 1,
                                             waiting.origin)
                        if add(pos, advanced):
                            worklist.append(advanced)

        for item in list(chart[pos]):
            prod = productions[item.prod_id]
            if item.dot >= len(prod.rhs):
                continue
            nxt = prod.rhs[item.dot]
            if nxt in nonterminals:
                continue
            for tok in graph.tokens_at(pos):
                if tok.type_name == nxt:
                    add(graph.next_offset(tok),
                        ChartItem(item.prod_id, item.dot + 1, item.origin))

    return chart, completed


def _report_failure(grammar, graph, chart):
    farthest = max(chart) if chart else graph.start_offset
    expected = set()
    for item in chart.get(farthest, ()):
        prod = grammar.productions[item.prod_id]
        if item.dot < len(prod.rhs):
            sym = prod.rhs[item.dot]
            if sym not in grammar.nonterminals:
                expected.add(sym)
    raise ParseError(farthest, expected)


def _build_forest(grammar, graph, completed, start_key):
    """Assemble packed nodes top-down from the recognition chart. Each
    derivation of a node is one tiling of a production's rhs over the
    node's extent; constituents are other completed extents or tokens."""
    by_end = {}  # (symbol, end) -> sorted list of starts
    for (sym, i, j) in completed:
        by_end.setdefault((sym, j), []).append(i)
    for starts in by_end.values():
        starts.sort()

    tokens_by_skip_end = {}  # (type, next offset) -> tokens
    for tok in graph.nodes:
        tokens_by_skip_end.setdefault(
            (tok.type_name, graph.next_offset(tok)), []).append(tok)

    nonterminals = grammar.nonterminals

    def tilings(prod_id, i, j):
        rhs = grammar.productions[prod_id].rhs
        memo = {}

        def seqs(k, end):
            if k == 0:
                return [()] if end == i else []
            if (k, end) in memo:
                return memo[(k, end)]
            out = []
            sym = rhs[k - 1]
            if sym in nonterminals:
                for m in by_end.get((sym, end), ()):
                    if m < i:
                        continue
                    for head in seqs(k - 1, m):
                        out.append(head + ((sym, m, end),))
            else:
                for tok in tokens_by_skip_end.get((sym, end), ()):
                    if tok.start < i:
                        continue
                    for head in seqs(k - 1, tok.start):
                        out.append(head + (tok,))
            memo[(k, end)] = out
            return out

        return seqs(len(rhs), j)

    nodes = {}
    todo = [start_key]
    while todo:
        key = todo.pop()
        if key in nodes:
            continue
        sym, i, j = key
        derivs = []
        seen = set()
        for prod_id in sorted(completed.get(key, ())):
            for children in tilings(prod_id, i, j):
                d = Derivation(prod_id, children)
                if d not in seen:
                    seen.add(d)
                    derivs.append(d)
        nodes[key] = derivs
        for d in derivs:
            for child in d.children:
                if isinstance(child, tuple) and child not in nodes:
                    todo.append(child)
    return nodes
