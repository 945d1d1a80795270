"""Model-based parser generation.

Define a language as a model of element types with declarative
constraints; the toolkit derives the grammar, tokenizes with lexical
ambiguity support, parses with an Earley-style chart parser, prunes the
parse forest by the declared constraints, instantiates typed objects, and
resolves identifier references into an abstract syntax graph.
"""

from .asg import (AmbiguousParse, Asg, AsgNode, DuplicateDeclaration, Ref,
                  RefPlaceholder, Scope, UnresolvedReference,
                  apply_custom_constraints, asg_dot, asg_json, asg_to_text,
                  evaluate, format_number, instantiate, resolve_references)
from .earley import ParseError, parse
from .forest import ParseForest, ParseTree, count_trees, enumerate_trees, forest_dot
from .grammar import Grammar, Production, generate_grammar, grammar_text
from .harness import (Assertion, oracle_parse, random_input, random_model,
                      run_assertion, run_test_file)
from .lexer import (LexicalError, Lexicon, PatternCompileError, Token,
                    TokenGraph, compile_lexicon, ignore_spans, token_graph_dot,
                    tokenize)
from .model import (ConstraintSet, ElementType, Member, Model, ModelBuilder,
                    ModelError, ModelValidationError, Multiplicity,
                    PatternSpec, Registry, ValidatedModel, effective_priority,
                    mem, subtypes_of, validate_model)
from .modelfile import FormatError, load_model_file, model_text, parse_model_text
from .pipeline import Engine, NoValidParse
from .pruning import prune_constraints

__version__ = "0.1.0"

__all__ = [
    "AmbiguousParse", "Asg", "AsgNode", "Assertion", "ConstraintSet",
    "DuplicateDeclaration", "ElementType", "Engine", "FormatError", "Grammar",
    "LexicalError", "Lexicon", "Member", "Model", "ModelBuilder", "ModelError",
    "ModelValidationError", "Multiplicity", "NoValidParse", "ParseError",
    "ParseForest", "ParseTree", "PatternCompileError", "PatternSpec",
    "Production", "Ref", "RefPlaceholder", "Registry", "Scope", "Token",
    "TokenGraph", "UnresolvedReference", "ValidatedModel",
    "apply_custom_constraints", "asg_dot", "asg_json", "asg_to_text",
    "compile_lexicon", "count_trees", "effective_priority", "enumerate_trees",
    "evaluate", "forest_dot", "format_number", "generate_grammar",
    "grammar_text", "ignore_spans", "instantiate", "load_model_file", "mem",
    "model_text", "oracle_parse", "parse", "parse_model_text",
    "prune_constraints", "random_input", "random_model", "resolve_references",
    "run_assertion", "run_test_file", "subtypes_of", "token_graph_dot",
    "tokenize", "validate_model",
]
