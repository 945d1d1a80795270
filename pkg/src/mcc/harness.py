"""Verification harness: exhaustive parsing oracle, independent
constraint filters, random model/input generation, and a line-oriented
assertion format.

The oracle enumerates every derivation tree by memoized span splitting
over the grammar alone; it shares no code with the chart parser, so
agreement between the two certifies both. Constraint filtering for the
oracle is likewise implemented tree-by-tree, separately from the forest
pruner. Trees are compared in a canonical nested-tuple form.
"""

import random
import re
from dataclasses import dataclass

from . import model as M
from .model import ModelBuilder, mem

ORACLE_BOUND = 12


class OracleBoundExceeded(Exception):
    pass


# Canonical trees: ("tok", type, start, end) leaves and
# (symbol, prod_id, children...) interior nodes.

def canon_tree(tree):
    """Canonical form of an engine ParseTree."""
    if tree.is_leaf:
        t = tree.token
        return ("tok", t.type_name, t.start, t.end)
    return (tree.symbol, tree.prod_id, tuple(canon_tree(c) for c in tree.children))


def is_leaf(canon):
    return canon and canon[0] == "tok" and len(canon) == 4 and isinstance(canon[2], int)


def canon_span(canon):
    """(start, end) over the leaves; zero-width trees report (None, None)."""
    if is_leaf(canon):
        return (canon[2], canon[3])
    spans = [canon_span(c) for c in canon[2]]
    spans = [s for s in spans if s[0] is not None]
    if not spans:
        return (None, None)
    return (spans[0][0], spans[-1][1])


def canon_width(canon):
    start, end = canon_span(canon)
    return 0 if start is None else end - start


def oracle_parse(grammar, tokens, bound=ORACLE_BOUND):
    """Every derivation tree of the start symbol over a linear token
    sequence, by exhaustive splitting. A production cycle over one extent
    contributes nothing, mirroring the documented engine rule."""
    if len(tokens) > bound:
        raise OracleBoundExceeded(f"{len(tokens)} tokens exceed the oracle bound {bound}")
    n = len(tokens)
    nts = grammar.nonterminals

    # store[(sym, i, j)] maps a canonical tree to its same-extent symbol
    # spine, the set used to cut cycles.
    store = {}

    def tilings(rhs, i, j):
        def rec(k, end):
            if k == 0:
                if end == i:
                    yield ()
                return
            sym = rhs[k - 1]
            if sym in nts:
                for m in range(i, end + 1):
                    entry = store.get((sym, m, end))
                    if not entry:
                        continue
                    for head in rec(k - 1, m):
                        for t in entry:
                            yield head + ((t, m, end),)
            else:
                if end > i and tokens[end - 1].type_name == sym:
                    tok = tokens[end - 1]
                    leaf = ("tok", tok.type_name, tok.start, tok.end)
                    for head in rec(k - 1, end - 1):
                        yield head + ((leaf, end - 1, end),)
        yield from rec(len(rhs), j)

    changed = True
    while changed:
        changed = False
        for width in range(n + 1):
            for i in range(n - width + 1):
                j = i + width
                for pid, prod in enumerate(grammar.productions):
                    for annotated in tilings(prod.rhs, i, j):
                        spine = {prod.lhs}
                        cyclic = False
                        for (child, ci, cj) in annotated:
                            if (ci, cj) == (i, j) and not is_leaf(child):
                                child_spine = store[(child[0], ci, cj)][child]
                                if prod.lhs in child_spine:
                                    cyclic = True
                                    break
                                spine |= child_spine
                        if cyclic:
                            continue
                        tree = (prod.lhs, pid, tuple(c for (c, _, _) in annotated))
                        entry = store.setdefault((prod.lhs, i, j), {})
                        if tree not in entry:
                            entry[tree] = frozenset(spine)
                            changed = True

    return sorted(store.get((grammar.start, 0, n), {}), key=repr)


def lexical_paths(graph, bound=ORACLE_BOUND):
    """Every complete token sequence through a token graph. Exponential in
    the ambiguity; meant for oracle work on short inputs."""
    paths = []

    def walk(offset, acc):
        if offset == graph.end_offset:
            paths.append(list(acc))
            return
        for tok in graph.tokens_at(offset):
            if len(acc) >= bound:
                raise OracleBoundExceeded(f"lexical path exceeds {bound} tokens")
            acc.append(tok)
            walk(graph.skip[tok.end], acc)
            acc.pop()

    walk(graph.start_offset, [])
    return paths


def oracle_parse_graph(grammar, graph, bound=ORACLE_BOUND):
    """Union of oracle trees over every lexical path of a token graph."""
    seen = {}
    for path in lexical_paths(graph, bound):
        for tree in oracle_parse(grammar, path, bound):
            seen[tree] = None
    return sorted(seen, key=repr)


# -- independent constraint filtering ----------------------------------------

def _static_profile(vmodel, type_name):
    if type_name not in vmodel.elements:
        return (None, None, M.ASSOC_NONE)
    group, assoc = M.associativity_group(vmodel, type_name)
    return (group, M.static_priority(vmodel, type_name), assoc)


def tree_profile(grammar, vmodel, canon):
    """(group, priority, assoc) of one canonical tree, with composite
    nodes borrowing from their constraint-bearing constituent."""
    if is_leaf(canon):
        return _static_profile(vmodel, canon[1])
    prod = grammar.production(canon[1])
    if prod.origin in ("selection", "start"):
        return tree_profile(grammar, vmodel, canon[2][0])
    if prod.origin not in ("composition", "permutation"):
        return (None, None, M.ASSOC_NONE)
    own = _static_profile(vmodel, prod.element_type)
    bearing = M.bearing_slot(vmodel, vmodel.element(prod.element_type))
    if bearing is None:
        return own
    idx = next((k for k, v in prod.member_bindings.items() if v == bearing.name), None)
    if idx is None or idx >= len(canon[2]):
        return own
    g2, p2, a2 = tree_profile(grammar, vmodel, canon[2][idx])
    prio = own[1] if own[1] is not None else p2
    if own[2] != M.ASSOC_NONE:
        group, assoc = own[0], own[2]
    else:
        group, assoc = g2, a2
    return (group, prio, assoc)


def satisfies_evaluation_order(grammar, vmodel, canon):
    """Tree-level associativity and priority predicate."""
    if is_leaf(canon):
        return True
    prod = grammar.production(canon[1])
    if prod.origin in ("composition", "permutation"):
        group, prio, assoc = tree_profile(grammar, vmodel, canon)
        slots = sorted(prod.member_bindings)
        if assoc != M.ASSOC_NONE and group is not None and slots:
            ends = []
            if assoc in (M.LEFT_TO_RIGHT, M.NON_ASSOCIATIVE):
                ends.append(slots[-1])
            if assoc in (M.RIGHT_TO_LEFT, M.NON_ASSOCIATIVE):
                ends.append(slots[0])
            for idx in ends:
                g2, p2, _ = tree_profile(grammar, vmodel, canon[2][idx])
                if g2 == group and p2 == prio:
                    return False
        if prio is not None:
            bearing = M.bearing_slot(vmodel, vmodel.element(prod.element_type))
            for idx in slots:
                if bearing is not None and prod.member_bindings[idx] == bearing.name:
                    continue
                _, p2, _ = tree_profile(grammar, vmodel, canon[2][idx])
                if p2 is not None and p2 > prio:
                    return False
    return all(satisfies_evaluation_order(grammar, vmodel, c) for c in canon[2])


def _collapses_to(grammar, canon, type_name):
    if is_leaf(canon):
        return canon[1] == type_name
    prod = grammar.production(canon[1])
    if prod.origin in ("selection", "start"):
        return _collapses_to(grammar, canon[2][0], type_name)
    return prod.element_type == type_name


def _attachment_preference(grammar, vmodel, a, b):
    """-1 when tree a is preferred over b by a composition policy at their
    outermost difference, 1 for the converse, 0 when incomparable."""
    if is_leaf(a) or is_leaf(b) or a == b:
        return 0
    if a[0] != b[0] or a[1] != b[1] or len(a[2]) != len(b[2]):
        return 0
    diffs = [k for k, (ca, cb) in enumerate(zip(a[2], b[2])) if ca != cb]
    prod = grammar.production(a[1])
    if len(diffs) == 1:
        return _attachment_preference(grammar, vmodel, a[2][diffs[0]], b[2][diffs[0]])
    if prod.origin not in ("composition", "permutation"):
        return 0
    el = vmodel.elements.get(prod.element_type)
    if el is None or el.constraints.composition == M.COMPOSE_NONE:
        return 0
    slots = sorted(prod.member_bindings)
    if len(slots) < 2 or slots[-1] != slots[-2] + 1:
        return 0
    t_idx, p_idx = slots[-1], slots[-2]
    if sorted(diffs) != [p_idx, t_idx]:
        return 0
    member = el.member(prod.member_bindings[t_idx])
    if not (member.optional or member.multiplicity.is_list):
        return 0
    if not (_collapses_to(grammar, a[2][p_idx], el.name)
            or _collapses_to(grammar, b[2][p_idx], el.name)):
        return 0
    wa = canon_width(a[2][t_idx])
    wb = canon_width(b[2][t_idx])
    if wa == wb:
        return 0
    if el.constraints.composition == M.EAGER:
        return -1 if wa < wb else 1
    return -1 if wa > wb else 1


def filter_by_constraints(grammar, vmodel, trees):
    """The oracle-side equivalent of forest pruning: keep trees passing
    the associativity/priority predicate, then drop trees dominated under
    a composition policy."""
    kept = [t for t in trees if satisfies_evaluation_order(grammar, vmodel, t)]
    out = []
    for t in kept:
        dominated = any(
            _attachment_preference(grammar, vmodel, u, t) == -1
            for u in kept if u is not t)
        if not dominated:
            out.append(t)
    return out


# -- random models and inputs -------------------------------------------------

_LITERAL_CHARS = "xyzuvw"
_OPERATOR_CHARS = "+-*/%<>&!?"
_DELIM_PAIRS = [("(", ")"), ("[", "]"), ("{", "}")]


def random_model(seed):
    """A small well-formed model chosen deterministically from the seed:
    literal basics, usually an operator family with random associativity
    and priorities, and a sprinkling of groups, optional members, lists,
    free-order composites, and composition policies."""
    rng = random.Random(seed)
    b = ModelBuilder(f"Random{seed}", "Expr")
    b.ignore(r"[ \t]+")
    b.abstract("Expr")

    lits = ["Lit"]
    b.basic("Lit", re.escape(_LITERAL_CHARS[0]), "Expr")
    for k in range(rng.randint(0, 2)):
        name = f"Lit{k + 2}"
        b.basic(name, re.escape(_LITERAL_CHARS[k + 1]), "Expr")
        lits.append(name)

    op_chars = rng.sample(_OPERATOR_CHARS, k=3)
    if rng.random() < 0.85:
        assoc = rng.choice([M.ASSOC_NONE, M.LEFT_TO_RIGHT,
                            M.RIGHT_TO_LEFT, M.NON_ASSOCIATIVE])
        b.abstract("Op", assoc=assoc)
        for k in range(rng.randint(1, 2)):
            prio = rng.choice([None, 1, 1, 2])
            b.basic(f"Op{k + 1}", re.escape(op_chars[k]), "Op", priority=prio)
        b.composite("BinExpr", "Expr",
                    [mem("e1", "Expr"), mem("op", "Op"), mem("e2", "Expr")])
        if rng.random() < 0.35:
            b.composite("UnExpr", "Expr", [mem("op", "Op"), mem("e", "Expr")])

    if rng.random() < 0.5:
        open_c, close_c = _DELIM_PAIRS[0]
        b.composite("GroupExpr", "Expr", [mem("e", "Expr")],
                    prefix=re.escape(open_c), suffix=re.escape(close_c))

    if rng.random() < 0.4:
        open_c, close_c = _DELIM_PAIRS[1]
        b.composite("ListExpr", "Expr",
                    [mem("items", rng.choice(lits), many=True,
                         min_count=rng.choice([0, 1]), separator=",",
                         prefix=re.escape(open_c), suffix=re.escape(close_c))])

    if rng.random() < 0.3 and len(lits) >= 2:
        b.composite("PairExpr", "Expr",
                    [mem("a", lits[0]), mem("b", lits[1],
                                            optional=rng.random() < 0.5)],
                    prefix=re.escape("."), free_order=rng.random() < 0.5)

    if rng.random() < 0.3:
        policy = rng.choice([M.EAGER, M.LAZY])
        b.composite("NestExpr", "Expr", composition=policy, prefix="i", members=[
            mem("head", rng.choice(lits)),
            mem("body", "Expr"),
            mem("tail", "Expr", optional=True, prefix="e"),
        ])

    return b.build()


def shortest_lengths(grammar):
    """Minimum derivable token count per symbol (terminals count one)."""
    INF = float("inf")
    best = {t: 1 for t in grammar.terminals}
    for nt in grammar.nonterminals:
        best[nt] = INF
    changed = True
    while changed:
        changed = False
        for p in grammar.productions:
            total = sum(best.get(s, INF) for s in p.rhs)
            if total < best[p.lhs]:
                best[p.lhs] = total
                changed = True
    return best


def random_input(vmodel, grammar, seed, max_tokens=8):
    """A parseable input drawn by a random walk over the grammar, joined
    with spaces. Assumes literal patterns (as random_model guarantees)."""
    rng = random.Random(seed)
    best = shortest_lengths(grammar)

    def lexeme(sym):
        if sym.startswith("'"):
            return sym[1:-1]
        el = vmodel.elements[sym]
        text = el.pattern.literal_text()
        if text is None:
            raise ValueError(f"terminal {sym} has no literal lexeme")
        return text

    out = []

    def expand(sym, budget):
        if sym not in grammar.nonterminals:
            out.append(lexeme(sym))
            return 1
        options = [pid for pid in grammar.alternatives(sym)
                   if sum(best.get(s, 1) for s in grammar.productions[pid].rhs) <= budget]
        if not options:
            options = sorted(grammar.alternatives(sym),
                             key=lambda pid: sum(best.get(s, 1)
                                                 for s in grammar.productions[pid].rhs))[:1]
        prod = grammar.productions[rng.choice(options)]
        used = 0
        remaining = list(prod.rhs)
        for idx, s in enumerate(remaining):
            floor_rest = sum(best.get(x, 1) for x in remaining[idx + 1:])
            used += expand(s, max(best.get(s, 1), budget - used - floor_rest))
        return max(used, sum(best.get(s, 1) for s in prod.rhs))

    expand(grammar.start, rng.randint(1, max_tokens))
    return " ".join(out)


def mutate_input(text, seed):
    """Damage an input string to exercise failure paths."""
    rng = random.Random(seed)
    if not text:
        return "?"
    i = rng.randrange(len(text))
    action = rng.choice(["drop", "dup", "swap"])
    if action == "drop":
        return text[:i] + text[i + 1:]
    if action == "dup":
        return text[:i] + text[i] + text[i:]
    j = rng.randrange(len(text))
    chars = list(text)
    chars[i], chars[j] = chars[j], chars[i]
    return "".join(chars)


# -- assertions ----------------------------------------------------------------

KINDS = ("matches", "notmatches", "matchcount", "evaluates", "resolvesto")


@dataclass
class Assertion:
    kind: str
    model_name: str
    input: str
    expected_count: int | None = None
    expected_value: float | None = None
    tolerance: float = 1e-9
    ref_span: tuple | None = None
    decl_span: tuple | None = None
    line: int = 0

    def describe(self):
        text = self.input if len(self.input) <= 40 else self.input[:37] + "..."
        return f"{self.kind} {self.model_name} {text!r}"


_TOKEN_RE = re.compile(r'"(?:\\.|[^"\\])*"|\S+')

_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", '"': '"', "\\": "\\"}


def _unquote(text):
    out = []
    i = 1
    while i < len(text) - 1:
        c = text[i]
        if c == "\\" and i + 1 < len(text) - 1:
            out.append(_ESCAPES.get(text[i + 1], "\\" + text[i + 1]))
            i += 2
        else:
            out.append(c)
            i += 1
    return "".join(out)


def _span(text):
    m = re.fullmatch(r"(\d+):(\d+)", text)
    if not m:
        raise ValueError(f"expected start:end span, got {text!r}")
    return (int(m.group(1)), int(m.group(2)))


def parse_test_file(text):
    """One assertion per line: ``KIND <model> "<input>" [expected]``.
    Inputs use backslash escapes (\\n and friends); # starts a comment."""
    assertions = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = _TOKEN_RE.findall(line)
        kind = parts[0].lower()
        if kind not in KINDS:
            raise ValueError(f"line {lineno}: unknown assertion kind {parts[0]!r}")
        if len(parts) < 3 or not parts[2].startswith('"'):
            raise ValueError(f"line {lineno}: expected KIND model \"input\"")
        a = Assertion(kind=kind, model_name=parts[1], input=_unquote(parts[2]),
                      line=lineno)
        rest = parts[3:]
        if kind == "matchcount":
            a.expected_count = int(rest[0])
        elif kind == "evaluates":
            a.expected_value = float(rest[0])
            if len(rest) > 1:
                a.tolerance = float(rest[1])
        elif kind == "resolvesto":
            spans = [p for p in rest if p != "->"]
            a.ref_span = _span(spans[0])
            a.decl_span = _span(spans[1])
        assertions.append(a)
    return assertions


def run_assertion(assertion, engines):
    """Execute one assertion against a table of engines. Returns
    (passed, detail); infrastructure failures report as failures with
    their cause, never as crashes."""
    a = assertion
    engine = engines.get(a.model_name)
    if engine is None:
        return False, f"unknown model {a.model_name!r}"
    try:
        if a.kind == "matches":
            ok = engine.matches(a.input)
            return ok, "" if ok else "no parse"
        if a.kind == "notmatches":
            ok = not engine.matches(a.input)
            return ok, "" if ok else "unexpectedly parsed"
        if a.kind == "matchcount":
            cap = max(64, a.expected_count + 1)
            got = engine.match_count(a.input, cap)
            return got == a.expected_count, f"count {got} != {a.expected_count}" \
                if got != a.expected_count else ""
        if a.kind == "evaluates":
            value = engine.evaluate(a.input)
            ok = abs(value - a.expected_value) <= a.tolerance
            return ok, "" if ok else f"value {value!r} != {a.expected_value!r}"
        if a.kind == "resolvesto":
            graph = engine.asgs(a.input)[0]
            for (src, member, dst) in graph.reference_edges:
                ref = graph.nodes[src].members[member]
                refs = ref if isinstance(ref, list) else [ref]
                for r in refs:
                    if getattr(r, "span", None) != tuple(a.ref_span):
                        continue
                    target = graph.nodes[dst]
                    id_node = next((v for v in target.members.values()
                                    if getattr(v, "lexeme", None) is not None), None)
                    if id_node is not None and tuple(id_node.span) == tuple(a.decl_span):
                        return True, ""
            return False, "no matching reference edge"
    except Exception as exc:  # report, never crash the runner
        return False, f"{type(exc).__name__}: {exc}"
    return False, f"unhandled kind {a.kind!r}"


def run_test_file(text, engines):
    """TAP output for a whole assertion file; True iff everything passed."""
    assertions = parse_test_file(text)
    lines = [f"1..{len(assertions)}"]
    if not assertions:
        lines.append("# 0 assertions")
        return lines, True
    all_ok = True
    for i, a in enumerate(assertions, start=1):
        ok, detail = run_assertion(a, engines)
        if ok:
            lines.append(f"ok {i} - {a.describe()}")
        else:
            all_ok = False
            suffix = f" # {detail}" if detail else ""
            lines.append(f"not ok {i} - {a.describe()}{suffix}")
    return lines, all_ok
