"""The two built-in languages: infix arithmetic and a small imperative
language on top of it.

Both are ordinary models built through the public builder API; textual
copies ship under models/ and compile to the same models. Their semantic
callbacks register under each element type's tag, and the imperative
runtime adds predefined functions and variables to the global scope
before reference resolution.
"""

import math
import operator
from functools import lru_cache

from . import model as M
from .asg import (RuntimeEvalError, builtin_node, evaluate, format_number,
                  ieee_div)
from .model import ModelBuilder, Registry, mem
from .pipeline import Engine


def _expression_types(b, supertype_root="Expression"):
    """The arithmetic expression family shared by both languages."""
    b.composite("GroupExpression", supertype_root, [mem("e", "Expression")],
                prefix=r"\(", suffix=r"\)")
    b.composite("BinaryExpression", supertype_root,
                [mem("e1", "Expression"), mem("op", "BinaryOperator"),
                 mem("e2", "Expression")])
    b.composite("UnaryExpression", supertype_root,
                [mem("op", "UnaryOperator"), mem("e", "Expression")])
    b.abstract("LiteralExpression", supertype_root)
    b.basic("RealLiteral", r"[0-9]+\.[0-9]*", "LiteralExpression", value="float")
    b.basic("IntegerLiteral", r"[0-9]+", "LiteralExpression", value="int")
    b.abstract("UnaryOperator")
    b.basic("PlusOperator", r"\+", "UnaryOperator")
    b.basic("MinusOperator", r"-", "UnaryOperator")
    b.abstract("BinaryOperator", assoc=M.LEFT_TO_RIGHT)
    b.basic("AdditionOperator", r"\+", "BinaryOperator", priority=2)
    b.basic("SubtractionOperator", r"-", "BinaryOperator", priority=2)
    b.basic("MultiplicationOperator", r"\*", "BinaryOperator", priority=1)
    b.basic("DivisionOperator", r"\/", "BinaryOperator", priority=1)


def calc_model():
    b = ModelBuilder("Calculator", "Expression")
    b.ignore(r"[ \t\r\n]+")
    b.abstract("Expression")
    _expression_types(b)
    return b.build()


def imp_model():
    b = ModelBuilder("Imperative", "Program")
    b.ignore(r"[ \t\r\n]+")

    b.composite("Program", members=[mem("main", "Function")])
    b.composite("Function", scope=True, prefix="function", members=[
        mem("identifier", "Identifier", id=True),
        mem("params", "Variable", many=True, min_count=0, separator=",",
            prefix=r"\(", suffix=r"\)"),
        mem("declarations", "VariableDeclaration", optional=True),
        mem("functions", "Function", many=True, min_count=0),
        mem("body", "Statement"),
    ])
    b.composite("Variable", members=[mem("identifier", "Identifier", id=True)])
    b.composite("VariableDeclaration", prefix="variables", suffix=";",
                members=[mem("vars", "Variable", many=True, separator=",")])

    b.abstract("Statement")
    b.composite("BlockStatement", "Statement", prefix="begin", suffix="end",
                members=[mem("statements", "Statement", many=True, min_count=0)])
    b.composite("AssignmentStatement", "Statement", suffix=";", members=[
        mem("target", "Variable", ref=True),
        mem("value", "Expression", prefix="="),
    ])
    b.composite("ConditionalStatement", "Statement", prefix="if",
                composition=M.EAGER, members=[
                    mem("condition", "Expression", prefix=r"\(", suffix=r"\)"),
                    mem("thenBranch", "Statement"),
                    mem("elseBranch", "Statement", optional=True, prefix="else"),
                ])
    b.composite("WhileStatement", "Statement", prefix="while", members=[
        mem("condition", "Expression", prefix=r"\(", suffix=r"\)"),
        mem("body", "Statement"),
    ])
    b.composite("ReturnStatement", "Statement", prefix="return", suffix=";",
                members=[mem("value", "Expression")])
    b.composite("ExpressionStatement", "Statement", suffix=";",
                members=[mem("expr", "Expression")])

    b.abstract("Expression")
    b.composite("VariableExpression", "Expression",
                members=[mem("variable", "Variable", ref=True)])
    b.composite("FunctionCallExpression", "Expression", members=[
        mem("function", "Function", ref=True),
        mem("args", "Expression", many=True, min_count=0, separator=",",
            prefix=r"\(", suffix=r"\)"),
    ])
    _expression_types(b)
    b.basic("LessOrEqualOperator", r"<=", "BinaryOperator", priority=3)
    b.basic("LessThanOperator", r"<", "BinaryOperator", priority=3)
    b.basic("GreaterOrEqualOperator", r">=", "BinaryOperator", priority=3)
    b.basic("GreaterThanOperator", r">", "BinaryOperator", priority=3)
    b.basic("EqualsOperator", r"==", "BinaryOperator", priority=4)
    b.basic("NotEqualsOperator", r"!=", "BinaryOperator", priority=4)
    b.basic("AndOperator", r"&&", "BinaryOperator", priority=5)
    b.basic("OrOperator", r"\|\|", "BinaryOperator", priority=6)
    b.basic("Identifier", r"[a-zA-Z_][a-zA-Z0-9_]*", value="string")
    return b.build()


# -- arithmetic evaluation ----------------------------------------------------

def _bool(x):
    return 1.0 if x else 0.0


_BINARY_OPS = {
    "AdditionOperator": operator.add,
    "SubtractionOperator": operator.sub,
    "MultiplicationOperator": operator.mul,
    "DivisionOperator": ieee_div,
    "LessThanOperator": lambda a, b: _bool(a < b),
    "LessOrEqualOperator": lambda a, b: _bool(a <= b),
    "GreaterThanOperator": lambda a, b: _bool(a > b),
    "GreaterOrEqualOperator": lambda a, b: _bool(a >= b),
    "EqualsOperator": lambda a, b: _bool(a == b),
    "NotEqualsOperator": lambda a, b: _bool(a != b),
}


def _eval_binary(ctx):
    op = ctx.member_node("op").type_name
    if op == "AndOperator":
        return _bool(ctx.member("e1") != 0 and ctx.member("e2") != 0)
    if op == "OrOperator":
        return _bool(ctx.member("e1") != 0 or ctx.member("e2") != 0)
    return _BINARY_OPS[op](ctx.member("e1"), ctx.member("e2"))


def _eval_unary(ctx):
    op = ctx.member_node("op").type_name
    e = ctx.member("e")
    return -e if op == "MinusOperator" else e


def register_expression_callbacks(reg):
    reg.register_callback("IntegerLiteral", lambda ctx: float(ctx.value))
    reg.register_callback("RealLiteral", lambda ctx: ctx.value)
    reg.register_callback("GroupExpression", lambda ctx: ctx.member("e"))
    reg.register_callback("UnaryExpression", _eval_unary)
    reg.register_callback("BinaryExpression", _eval_binary)
    return reg


# -- imperative runtime -------------------------------------------------------

class _Return(Exception):
    def __init__(self, value):
        self.value = value


PREDEFINED_FUNCTIONS = {
    "read": None,
    "print": None,
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "arcsin": math.asin,
    "arccos": math.acos,
    "arctan": math.atan,
    "floor": lambda x: float(math.floor(x)),
    "ceil": lambda x: float(math.ceil(x)),
    "round": lambda x: float(round(x)),
    "power": lambda x, y: x ** y,
    "root": lambda x, y: x ** (1.0 / y),
    "log": math.log,
}

PREDEFINED_VARIABLES = {"pi": math.pi, "e": math.e}


def imp_predefined(ids):
    """Fresh predefined declarations for one resolution pass."""
    nodes = []
    for name in PREDEFINED_FUNCTIONS:
        nodes.append(builtin_node("Function", name, ids))
    for name in PREDEFINED_VARIABLES:
        nodes.append(builtin_node("Variable", name, ids))
    return nodes


def _call_function(ctx, fn, args):
    state = ctx.state
    if fn.builtin:
        name = fn.members["identifier"].lexeme
        if name == "read":
            try:
                return float(next(state["stdin"]))
            except StopIteration:
                raise RuntimeEvalError("read(): input exhausted") from None
            except ValueError as exc:
                raise RuntimeEvalError(f"read(): {exc}") from None
        if name == "print":
            for value in args:
                state["output"].append(format_number(value))
            return 0.0
        impl = PREDEFINED_FUNCTIONS[name]
        try:
            return float(impl(*args))
        except TypeError:
            raise RuntimeEvalError(
                f"{name}() takes a different number of arguments") from None

    params = fn.members.get("params") or []
    if len(args) != len(params):
        raise RuntimeEvalError(
            f"call of {fn.members['identifier'].lexeme}() with {len(args)} "
            f"arguments, expected {len(params)}")
    env = state["env"]
    pushed = []
    for param, value in zip(params, args):
        env.setdefault(param.id, []).append(value)
        pushed.append(param.id)
    decls = fn.members.get("declarations")
    if decls is not None:
        for var in decls.members["vars"]:
            env.setdefault(var.id, []).append(0.0)
            pushed.append(var.id)
    try:
        ctx.eval_node(fn.members["body"])
        return 0.0  # falling off the end of a function yields zero
    except _Return as ret:
        return ret.value
    finally:
        for nid in reversed(pushed):
            env[nid].pop()


def _variable_value(ctx, decl):
    state = ctx.state
    if decl.builtin:
        name = decl.members["identifier"].lexeme
        return state["globals"][name]
    stack = state["env"].get(decl.id)
    if not stack:
        raise RuntimeEvalError(
            f"variable {decl.members['identifier'].lexeme!r} is not live here")
    return stack[-1]


def _assign(ctx):
    decl = ctx.ref("target")
    value = ctx.member("value")
    if decl.builtin:
        ctx.state["globals"][decl.members["identifier"].lexeme] = value
        return None
    stack = ctx.state["env"].get(decl.id)
    if not stack:
        raise RuntimeEvalError(
            f"assignment to {decl.members['identifier'].lexeme!r} "
            "outside its activation")
    stack[-1] = value
    return None


def _run_block(ctx):
    for stmt in ctx.node.members["statements"]:
        ctx.eval_node(stmt)
    return None


def _run_conditional(ctx):
    if ctx.member("condition") != 0:
        ctx.eval_node(ctx.member_node("thenBranch"))
    elif ctx.member_node("elseBranch") is not None:
        ctx.eval_node(ctx.member_node("elseBranch"))
    return None


def _run_while(ctx):
    while ctx.member("condition") != 0:
        ctx.eval_node(ctx.member_node("body"))
    return None


def _do_return(ctx):
    raise _Return(ctx.member("value"))


def register_imp_callbacks(reg):
    register_expression_callbacks(reg)
    reg.register_callback("Program",
                          lambda ctx: _call_function(ctx, ctx.member_node("main"), []))
    reg.register_callback("VariableExpression",
                          lambda ctx: _variable_value(ctx, ctx.ref("variable")))
    reg.register_callback("FunctionCallExpression",
                          lambda ctx: _call_function(ctx, ctx.ref("function"),
                                                     ctx.member("args") or []))
    reg.register_callback("AssignmentStatement", _assign)
    reg.register_callback("BlockStatement", _run_block)
    reg.register_callback("ConditionalStatement", _run_conditional)
    reg.register_callback("WhileStatement", _run_while)
    reg.register_callback("ReturnStatement", _do_return)
    reg.register_callback("ExpressionStatement", lambda ctx: ctx.member("expr"))
    return reg


@lru_cache(maxsize=None)
def calc_engine():
    return Engine(calc_model(), register_expression_callbacks(Registry()))


@lru_cache(maxsize=None)
def calc_unconstrained_engine():
    return Engine(M.strip_evaluation_order(calc_model()),
                  register_expression_callbacks(Registry()))


@lru_cache(maxsize=None)
def imp_engine():
    return Engine(imp_model(), register_imp_callbacks(Registry()),
                  predefined_factory=imp_predefined)


def eval_calc_line(text):
    """Evaluate one arithmetic expression to a float."""
    return calc_engine().evaluate(text)


def run_calc(source):
    """Evaluate each nonblank line; returns the printed lines."""
    out = []
    for line in source.splitlines():
        if line.strip():
            out.append(format_number(eval_calc_line(line)))
    return out


def run_imp(source, stdin_text=""):
    """Parse and execute a program. Returns (printed lines, exit value);
    the exit value is the number returned from the main function, or None
    when main falls off its end."""
    engine = imp_engine()
    graph = engine.asgs(source)[0]
    state = {
        "env": {},
        "globals": dict(PREDEFINED_VARIABLES),
        "stdin": iter(stdin_text.splitlines()),
        "output": [],
    }
    exit_value = evaluate(graph, engine.model, engine.registry, state)
    return state["output"], exit_value
