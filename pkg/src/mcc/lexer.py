"""Lexical analysis with ambiguity support.

Instead of a single token stream, tokenization produces a directed acyclic
graph of candidate tokens: at every input offset, every recognizer that
matches contributes its longest match as a node, so overlapping and nested
lexemes of different types coexist as alternative paths. Token precedence
(lower value wins) removes a token only when another token of strictly
lower precedence covers exactly the same span. The parser picks whichever
lexical path is grammatically consistent.

Recognizers come from the basic element types of a model, from the
anonymous delimiter terminals of its grammar, and from the model's ignore
patterns. Patterns are regular expressions or host-registered matcher
callables of the form ``matcher(text, offset) -> end | None``.
"""

import re
from dataclasses import dataclass, field


class LexicalError(Exception):
    """No lexical path covers the input; ``offset`` is the first point at
    which every path is stuck."""

    def __init__(self, offset, message=None):
        self.offset = offset
        super().__init__(message or f"no token covers input at offset {offset}")


class PatternCompileError(Exception):
    """A pattern failed to compile or names an unregistered matcher."""


@dataclass(frozen=True)
class Token:
    """One candidate token: a typed slice of the input."""

    type_name: str
    lexeme: str
    start: int
    end: int

    def __str__(self):
        return f"{self.type_name}:{self.lexeme}@[{self.start},{self.end})"


class Recognizer:
    """Longest-match recognizer for one terminal symbol.

    Greedy regex matching returns the longest match except under top-level
    alternation; patterns containing ``|`` fall back to an exhaustive
    longest-match scan so that per-recognizer longest match holds exactly.
    """

    def __init__(self, symbol, pattern, matchers=None):
        self.symbol = symbol
        self.pattern = pattern
        if pattern.form == "matcher":
            matchers = matchers or {}
            if pattern.expression not in matchers:
                raise PatternCompileError(f"matcher {pattern.expression!r} is not registered")
            self._matcher = matchers[pattern.expression]
            self._regex = None
        else:
            try:
                self._regex = re.compile(pattern.expression)
            except re.error as exc:
                raise PatternCompileError(f"bad pattern {pattern.expression!r}: {exc}") from exc
            self._matcher = None
            self._exhaustive = "|" in pattern.expression

    def longest_match(self, text, pos):
        """End offset of the longest match at ``pos``, or None. Empty
        matches never produce tokens."""
        if self._matcher is not None:
            end = self._matcher(text, pos)
            return end if end is not None and end > pos else None
        if self._exhaustive:
            for end in range(len(text), pos, -1):
                if self._regex.fullmatch(text, pos, end):
                    return end
            return None
        m = self._regex.match(text, pos)
        return m.end() if m and m.end() > pos else None

@dataclass
class Lexicon:
    """Compiled recognizer set for one model/grammar pair. Immutable in
    use; share freely between concurrent tokenize calls."""

    recognizers: list
    ignore: list
    precedences: dict = field(default_factory=dict)


def compile_lexicon(vmodel, grammar, registry=None) -> Lexicon:
    """Build the lexicon: one recognizer per basic element type, one per
    anonymous delimiter terminal of the grammar, plus ignore patterns."""
    matchers = registry.matchers if registry is not None else {}
    recognizers = []
    precedences = {}
    for el in vmodel.elements.values():
        if el.kind == "basic" and el.name in grammar.terminals:
            recognizers.append(Recognizer(el.name, el.pattern, matchers))
            if el.pattern.precedence is not None:
                precedences[el.name] = el.pattern.precedence
    for sym, pattern in grammar.delimiter_patterns.items():
        recognizers.append(Recognizer(sym, pattern, matchers))
        if pattern.precedence is not None:
            precedences[sym] = pattern.precedence
    ignore = [Recognizer(f"ignore#{i}", pat, matchers)
              for i, pat in enumerate(vmodel.ignore_patterns)]
    return Lexicon(recognizers=recognizers, ignore=ignore, precedences=precedences)


def ignore_spans(lexicon, text):
    """Maximal ignored spans of the input, left to right. Tokens may not
    begin inside one."""
    spans = []
    pos = 0
    n = len(text)
    while pos < n:
        best = pos
        for rec in lexicon.ignore:
            end = rec.longest_match(text, pos)
            if end is not None and end > best:
                best = end
        if best > pos:
            if spans and spans[-1][1] == pos:
                spans[-1] = (spans[-1][0], best)
            else:
                spans.append((pos, best))
            pos = best
        else:
            pos += 1
    return spans


@dataclass
class TokenGraph:
    """All candidate tokens over one input plus their adjacency. An edge
    (a, b) means b starts where a ends, up to ignored characters."""

    text: str
    nodes: list
    edges: dict
    start_nodes: list
    end_nodes: list
    start_offset: int
    end_offset: int
    skip: list

    def __post_init__(self):
        self._by_start = {}
        for tok in self.nodes:
            self._by_start.setdefault(tok.start, []).append(tok)

    def tokens_at(self, offset):
        return self._by_start.get(offset, [])

    def next_offset(self, token):
        """First non-ignored offset after a token."""
        return self.skip[token.end]

    @property
    def is_linear(self):
        return self.linear_path() is not None

    def linear_path(self):
        """The unique token sequence, or None if branching exists."""
        path = []
        cur = self.start_offset
        while cur != self.end_offset:
            here = self.tokens_at(cur)
            if len(here) != 1:
                return None
            path.append(here[0])
            cur = self.skip[here[0].end]
        return path


def _skip_table(text, spans):
    """skip[i] = first non-ignored offset at or after i. Ignored spans are
    maximal and non-adjacent, so one hop suffices."""
    skip = list(range(len(text) + 1))
    for (s, e) in spans:
        for i in range(s, e):
            skip[i] = e
    return skip


def tokenize(lexicon, text, all_lengths=False) -> TokenGraph:
    """Build the token graph of ``text``.

    At every offset outside ignored spans, each recognizer contributes its
    longest match (every match length with ``all_lengths``). Exact-span
    precedence conflicts are then resolved: a token is deleted when a token
    of strictly lower precedence value covers the same span and both
    declare a precedence. Raises LexicalError when no path of tokens and
    ignored spans can cover the input.
    """
    spans = ignore_spans(lexicon, text)
    skip = _skip_table(text, spans)
    n = len(text)

    ignored = [False] * (n + 1)
    for (s, e) in spans:
        for i in range(s, e):
            ignored[i] = True

    nodes = []
    for pos in range(n):
        if ignored[pos]:
            continue
        for rec in lexicon.recognizers:
            if all_lengths and rec._regex is not None:
                ends = [e for e in range(n, pos, -1) if rec._regex.fullmatch(text, pos, e)]
            else:
                end = rec.longest_match(text, pos)
                ends = [end] if end is not None else []
            for end in ends:
                nodes.append(Token(rec.symbol, text[pos:end], pos, end))

    # Exact-span precedence filtering, lower value wins.
    by_span = {}
    for tok in nodes:
        by_span.setdefault((tok.start, tok.end), []).append(tok)
    kept = []
    for span, group in by_span.items():
        ranked = [t for t in group if lexicon.precedences.get(t.type_name) is not None]
        if len(ranked) >= 2:
            best = min(lexicon.precedences[t.type_name] for t in ranked)
            group = [t for t in group
                     if lexicon.precedences.get(t.type_name) in (None, best)]
        kept.extend(group)
    kept.sort(key=lambda t: (t.start, t.end, t.type_name))

    by_start = {}
    for tok in kept:
        by_start.setdefault(tok.start, []).append(tok)

    start_offset = skip[0]
    end_offset = n

    # Reachability from the start along token adjacency, for coverage
    # diagnostics and for trimming dead starts.
    reachable = set()
    frontier = [start_offset]
    while frontier:
        off = frontier.pop()
        if off in reachable or off > n:
            continue
        reachable.add(off)
        for tok in by_start.get(off, []):
            frontier.append(skip[tok.end])

    if end_offset not in reachable and not (start_offset == end_offset):
        stuck = max(o for o in reachable if o <= n)
        raise LexicalError(stuck)

    graph_nodes = [t for t in kept if t.start in reachable]
    edges = {}
    for tok in graph_nodes:
        nxt = skip[tok.end]
        edges[tok] = [t2 for t2 in by_start.get(nxt, []) if t2.start in reachable]
    start_nodes = [t for t in graph_nodes if t.start == start_offset]
    end_nodes = [t for t in graph_nodes if skip[t.end] == end_offset]

    return TokenGraph(text=text, nodes=graph_nodes, edges=edges,
                      start_nodes=start_nodes, end_nodes=end_nodes,
                      start_offset=start_offset, end_offset=end_offset,
                      skip=skip)


def brute_force_matches(lexicon, text):
    """Quadratic reference matcher: every (recognizer, start, end) triple
    with a full match, as Token values. Oracle for tokenize completeness;
    it shares no scanning logic with the production path."""
    out = []
    for rec in lexicon.recognizers:
        for start in range(len(text)):
            best = None
            for end in range(start + 1, len(text) + 1):
                if rec._regex is not None:
                    if rec._regex.fullmatch(text, start, end):
                        best = end
                else:
                    if rec._matcher(text, start) == end:
                        best = end
            if best is not None:
                out.append(Token(rec.symbol, text[start:best], start, best))
    return out


def token_graph_dot(graph) -> str:
    """Render the token graph for graphviz; node labels read
    ``type:lexeme@[start,end)``."""
    lines = ["digraph tokens {", "  rankdir=LR;"]
    ids = {tok: f"t{i}" for i, tok in enumerate(graph.nodes)}
    for tok, nid in ids.items():
        label = str(tok).replace('"', '\\"')
        shape = "doublecircle" if tok in graph.end_nodes else "ellipse"
        lines.append(f'  {nid} [label="{label}", shape={shape}];')
    for tok, succs in graph.edges.items():
        for nxt in succs:
            lines.append(f"  {ids[tok]} -> {ids[nxt]};")
    lines.append("}")
    return "\n".join(lines) + "\n"
