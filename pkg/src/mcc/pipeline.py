"""End-to-end language processing for one model.

An Engine owns the artifacts compiled from a model (grammar, lexicon) and
runs the pipeline: tokenize, parse, prune, instantiate, filter by custom
constraints, resolve references, evaluate. Engines are immutable after
construction; independent inputs may be processed concurrently.
"""

import itertools

from . import asg as A
from .earley import parse as earley_parse
from .forest import count_trees, enumerate_trees
from .grammar import generate_grammar
from .lexer import compile_lexicon, tokenize
from .model import Registry, validate_model
from .pruning import prune_constraints

DEFAULT_TREE_LIMIT = 64


class NoValidParse(Exception):
    """Constraints eliminated every candidate interpretation."""


class Engine:
    def __init__(self, model, registry=None, predefined_factory=None):
        self.registry = registry if registry is not None else Registry()
        self.model = validate_model(model, self.registry)
        self.grammar = generate_grammar(self.model)
        self.lexicon = compile_lexicon(self.model, self.grammar, self.registry)
        self.predefined_factory = predefined_factory

    def tokenize(self, text):
        return tokenize(self.lexicon, text)

    def raw_forest(self, text):
        return earley_parse(self.grammar, self.tokenize(text))

    def forest(self, text):
        return prune_constraints(self.raw_forest(text), self.model)

    def matches(self, text):
        from .earley import ParseError
        from .lexer import LexicalError
        try:
            return not self.forest(text).is_empty
        except (ParseError, LexicalError):
            return False

    def match_count(self, text, cap=DEFAULT_TREE_LIMIT):
        from .earley import ParseError
        from .lexer import LexicalError
        try:
            return count_trees(self.forest(text), cap)
        except (ParseError, LexicalError):
            return 0

    def trees(self, text, limit=DEFAULT_TREE_LIMIT):
        return enumerate_trees(self.forest(text), limit)

    def asgs(self, text, all_parses=False, limit=DEFAULT_TREE_LIMIT):
        """Instantiate every surviving interpretation, filter by custom
        constraints, and resolve references. Candidates whose references
        cannot be resolved are discarded, so resolution disambiguates
        (keyword lexemes also lex as identifiers, for instance). Under the
        default policy more than one survivor is an error; ``all_parses``
        returns them all."""
        candidates = []
        for tree in self.trees(text, limit):
            ids = itertools.count(1)
            root = A.instantiate(tree, self.model, self.grammar, ids)
            if A.apply_custom_constraints(root, self.model, self.registry):
                continue
            candidates.append((tree, root, ids))
        if not candidates:
            raise NoValidParse("every parse candidate was rejected by constraints")

        survivors = []
        failures = []
        for tree, root, ids in candidates:
            predefined = self.predefined_factory(ids) if self.predefined_factory else ()
            try:
                survivors.append((tree, A.resolve_references(root, self.model,
                                                             predefined, ids)))
            except (A.UnresolvedReference, A.DuplicateDeclaration) as exc:
                failures.append(exc)
        if not survivors:
            raise failures[0] if failures else NoValidParse(
                "every parse candidate was rejected by constraints")
        if len(survivors) > 1 and not all_parses:
            spans = _first_difference(survivors[0][0], survivors[1][0])
            raise A.AmbiguousParse(len(survivors), spans)
        return [graph for _, graph in survivors]

    def evaluate(self, text, state=None):
        """Parse to a single graph and evaluate it with the engine's
        registered callbacks."""
        graph = self.asgs(text)[0]
        return A.evaluate(graph, self.model, self.registry, state)


def _first_difference(t1, t2):
    """Spans of the outermost subtrees where two parse trees disagree."""
    if t1.prod_id != t2.prod_id or t1.symbol != t2.symbol \
            or len(t1.children) != len(t2.children):
        return [(t1.start, t1.end), (t2.start, t2.end)]
    for c1, c2 in zip(t1.children, t2.children):
        if c1 != c2:
            return _first_difference(c1, c2)
    return [(t1.start, t1.end), (t2.start, t2.end)]
