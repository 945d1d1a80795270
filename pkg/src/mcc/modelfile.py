"""Textual model files (.mcc): a host-neutral surface for language models.

The format is line oriented with brace-delimited blocks::

    language <Name> start <Type>
    ignore "<pattern>"
    abstract <Name> [: <Super>] [{ ... }]
    basic <Name> [: <Super>] pattern "<regex>" [value int|float|string]
          [priority <n>] [precedence <n>] [{ ... }]
    basic <Name> [: <Super>] matcher <id> ...
    element <Name> [: <Super>] [scope] { <entry>* }

Block entries, one per line (or ';'-separated):

    assoc left|right|non        priority <n>       composition eager|lazy
    freeorder                   prefix "<p>"       suffix "<p>"
    constraint <id>             tag <id>
    member <name> : <Type> [optional] [ref] [id] [position <n>]
           [prefix "<p>"] [suffix "<p>"]
           [list [separator "<p>"] [min <n>] [max <n>|*]]

Inside quoted strings the only escape is ``\\"``; every other backslash is
kept verbatim, so regular expressions read naturally. ``#`` starts a
comment.
"""

from dataclasses import dataclass

from . import model as M
from .model import (ConstraintSet, ElementType, Member, Model, Multiplicity,
                    PatternSpec, validate_model)


class FormatError(Exception):
    def __init__(self, line, col, message):
        self.line = line
        self.col = col
        super().__init__(f"line {line}, column {col}: {message}")


@dataclass(frozen=True)
class _Tok:
    kind: str  # ident, string, int, punct, newline
    text: str
    line: int
    col: int


_PUNCT = "{}:;*"


def _lex(text):
    toks = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            toks.append(_Tok("newline", "\n", line, col))
            line += 1
            col = 1
            i += 1
        elif c in " \t\r":
            i += 1
            col += 1
        elif c == "#":
            while i < n and text[i] != "\n":
                i += 1
        elif c == '"':
            start_line, start_col = line, col
            i += 1
            col += 1
            out = []
            while i < n and text[i] != '"':
                if text[i] == "\\" and i + 1 < n and text[i + 1] == '"':
                    out.append('"')
                    i += 2
                    col += 2
                elif text[i] == "\n":
                    raise FormatError(start_line, start_col,
                                      "unterminated string")
                else:
                    out.append(text[i])
                    i += 1
                    col += 1
            if i >= n:
                raise FormatError(start_line, start_col, "unterminated string")
            i += 1
            col += 1
            toks.append(_Tok("string", "".join(out), start_line, start_col))
        elif c in _PUNCT:
            toks.append(_Tok("punct", c, line, col))
            i += 1
            col += 1
        elif c.isdigit():
            start = i
            start_col = col
            while i < n and text[i].isdigit():
                i += 1
                col += 1
            toks.append(_Tok("int", text[start:i], line, start_col))
        elif c.isalpha() or c == "_":
            start = i
            start_col = col
            while i < n and (text[i].isalnum() or text[i] == "_"):
                i += 1
                col += 1
            toks.append(_Tok("ident", text[start:i], line, start_col))
        else:
            raise FormatError(line, col, f"unexpected character {c!r}")
    toks.append(_Tok("newline", "\n", line, col))
    return toks


class _Parser:
    def __init__(self, toks):
        self.toks = toks
        self.pos = 0

    def peek(self):
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def at_end(self):
        return self.pos >= len(self.toks)

    def skip_newlines(self):
        while not self.at_end() and self.peek().kind == "newline":
            self.pos += 1

    def skip_separators(self):
        while not self.at_end() and (
                self.peek().kind == "newline"
                or (self.peek().kind == "punct" and self.peek().text == ";")):
            self.pos += 1

    def take(self, kind, text=None):
        tok = self.peek()
        if tok is None or tok.kind != kind or (text is not None and tok.text != text):
            want = text or kind
            got = f"{tok.kind} {tok.text!r}" if tok else "end of file"
            where = tok or self.toks[-1]
            raise FormatError(where.line, where.col, f"expected {want}, got {got}")
        self.pos += 1
        return tok

    def accept(self, kind, text=None):
        tok = self.peek()
        if tok is not None and tok.kind == kind and (text is None or tok.text == text):
            self.pos += 1
            return tok
        return None

    def error(self, message):
        tok = self.peek() or self.toks[-1]
        raise FormatError(tok.line, tok.col, message)

    # -- grammar -------------------------------------------------------------

    def model(self):
        self.skip_separators()
        self.take("ident", "language")
        name = self.take("ident").text
        self.take("ident", "start")
        start = self.take("ident").text
        model = Model(name=name, start_type=start)
        self.skip_separators()
        while not self.at_end():
            head = self.peek()
            if head.kind != "ident":
                self.error(f"expected a declaration, got {head.text!r}")
            if head.text == "ignore":
                self.pos += 1
                model.ignore_patterns.append(PatternSpec.regex(self.take("string").text))
            elif head.text == "abstract":
                self.pos += 1
                self.declaration(model, M.ABSTRACT)
            elif head.text == "basic":
                self.pos += 1
                self.declaration(model, M.BASIC)
            elif head.text == "element":
                self.pos += 1
                self.declaration(model, M.COMPOSITE)
            else:
                self.error(f"unknown keyword {head.text!r}")
            self.skip_separators()
        return model

    def declaration(self, model, kind):
        name_tok = self.take("ident")
        name = name_tok.text
        el = ElementType(name=name, kind=kind, constraints=ConstraintSet())
        if self.accept("punct", ":"):
            el.supertype = self.take("ident").text
        if kind == M.BASIC:
            self.basic_head(el)
        if kind == M.COMPOSITE and self.accept("ident", "scope"):
            el.scope_defining = True
        if self.accept("punct", "{"):
            self.block(el)
        if el.semantic_tag is None:
            el.semantic_tag = name
        if name in model.elements:
            raise FormatError(name_tok.line, name_tok.col,
                              f"duplicate element type {name!r}")
        model.elements[name] = el

    def basic_head(self, el):
        precedence = None
        pattern = None
        form = "regex"
        while True:
            if self.accept("ident", "pattern"):
                pattern = self.take("string").text
            elif self.accept("ident", "matcher"):
                pattern = self.take("ident").text
                form = "matcher"
            elif self.accept("ident", "value"):
                kind = self.take("ident").text
                el.members.append(Member(name="value", type_name=kind,
                                         is_value_binding=True))
            elif self.accept("ident", "priority"):
                el.constraints.priority = int(self.take("int").text)
            elif self.accept("ident", "precedence"):
                precedence = int(self.take("int").text)
            else:
                break
        if pattern is None:
            self.error("basic type requires pattern or matcher")
        el.pattern = PatternSpec(form=form, expression=pattern,
                                 precedence=precedence)

    def block(self, el):
        self.skip_separators()
        while not self.accept("punct", "}"):
            if self.at_end():
                self.error("unterminated block")
            self.entry(el)
            self.skip_separators()

    def entry(self, el):
        tok = self.take("ident")
        kw = tok.text
        if kw == "assoc":
            word = self.take("ident").text
            table = {"left": M.LEFT_TO_RIGHT, "right": M.RIGHT_TO_LEFT,
                     "non": M.NON_ASSOCIATIVE}
            if word not in table:
                raise FormatError(tok.line, tok.col,
                                  f"assoc must be left, right or non, got {word!r}")
            el.constraints.associativity = table[word]
        elif kw == "priority":
            el.constraints.priority = int(self.take("int").text)
        elif kw == "composition":
            word = self.take("ident").text
            if word not in (M.EAGER, M.LAZY):
                raise FormatError(tok.line, tok.col,
                                  f"composition must be eager or lazy, got {word!r}")
            el.constraints.composition = word
        elif kw == "freeorder":
            el.constraints.free_order = True
        elif kw == "prefix":
            el.prefix.append(PatternSpec.regex(self.take("string").text))
        elif kw == "suffix":
            el.suffix.append(PatternSpec.regex(self.take("string").text))
        elif kw == "constraint":
            el.constraints.custom_constraints.append(self.take("ident").text)
        elif kw == "tag":
            el.semantic_tag = self.take("ident").text
        elif kw == "member":
            self.member_entry(el)
        else:
            raise FormatError(tok.line, tok.col, f"unknown entry {kw!r}")

    def member_entry(self, el):
        name = self.take("ident").text
        self.take("punct", ":")
        type_name = self.take("ident").text
        m = Member(name=name, type_name=type_name)
        while True:
            if self.accept("ident", "optional"):
                m.optional = True
            elif self.accept("ident", "ref"):
                m.is_reference = True
            elif self.accept("ident", "id"):
                el.id_member = m.name
            elif self.accept("ident", "position"):
                m.position = int(self.take("int").text)
            elif self.accept("ident", "prefix"):
                m.prefix.append(PatternSpec.regex(self.take("string").text))
            elif self.accept("ident", "suffix"):
                m.suffix.append(PatternSpec.regex(self.take("string").text))
            elif self.accept("ident", "list"):
                self.list_options(m)
            else:
                break
        el.members.append(m)

    def list_options(self, m):
        lo, hi = 1, None
        while True:
            if self.accept("ident", "separator"):
                m.separator = PatternSpec.regex(self.take("string").text)
            elif self.accept("ident", "min"):
                lo = int(self.take("int").text)
            elif self.accept("ident", "max"):
                if self.accept("punct", "*"):
                    hi = None
                else:
                    hi = int(self.take("int").text)
            else:
                break
        m.multiplicity = Multiplicity(lo, hi)


def parse_model_text(text) -> Model:
    return _Parser(_lex(text)).model()


def load_model_file(path, registry=None):
    """Read, compile and validate a model file."""
    with open(path, encoding="utf-8") as fh:
        model = parse_model_text(fh.read())
    return validate_model(model, registry)


def _quote(s):
    return '"' + s.replace('"', '\\"') + '"'


def model_text(model) -> str:
    """Canonical text for a model; reloading it compiles to an equal
    model."""
    src = model.model if isinstance(model, M.ValidatedModel) else model
    lines = [f"language {src.name} start {src.start_type}"]
    for pat in src.ignore_patterns:
        lines.append(f"ignore {_quote(pat.expression)}")
    lines.append("")
    for el in src.elements.values():
        lines.extend(_element_text(el))
    return "\n".join(lines) + "\n"


def _head_options(el):
    out = []
    if el.kind == M.BASIC:
        if el.pattern.form == "matcher":
            out.append(f"matcher {el.pattern.expression}")
        else:
            out.append(f"pattern {_quote(el.pattern.expression)}")
        vm = el.value_member
        if vm is not None:
            out.append(f"value {vm.type_name}")
        if el.constraints.priority is not None:
            out.append(f"priority {el.constraints.priority}")
        if el.pattern.precedence is not None:
            out.append(f"precedence {el.pattern.precedence}")
    return out


def _element_text(el):
    kw = {M.BASIC: "basic", M.COMPOSITE: "element", M.ABSTRACT: "abstract"}[el.kind]
    head = f"{kw} {el.name}"
    if el.supertype:
        head += f" : {el.supertype}"
    for opt in _head_options(el):
        head += " " + opt
    if el.kind == M.COMPOSITE and el.scope_defining:
        head += " scope"

    body = []
    cs = el.constraints
    if cs.associativity != M.ASSOC_NONE:
        word = {M.LEFT_TO_RIGHT: "left", M.RIGHT_TO_LEFT: "right",
                M.NON_ASSOCIATIVE: "non"}[cs.associativity]
        body.append(f"assoc {word}")
    if cs.priority is not None and el.kind != M.BASIC:
        body.append(f"priority {cs.priority}")
    if cs.composition != M.COMPOSE_NONE:
        body.append(f"composition {cs.composition}")
    if cs.free_order:
        body.append("freeorder")
    for pat in el.prefix:
        body.append(f"prefix {_quote(pat.expression)}")
    for pat in el.suffix:
        body.append(f"suffix {_quote(pat.expression)}")
    for pred in cs.custom_constraints:
        body.append(f"constraint {pred}")
    if el.semantic_tag and el.semantic_tag != el.name:
        body.append(f"tag {el.semantic_tag}")
    for m in el.members:
        if not m.is_value_binding:
            body.append(_member_text(el, m))

    if not body:
        return [head]
    lines = [head + " {"]
    lines.extend(f"  {entry}" for entry in body)
    lines.append("}")
    return lines


def _member_text(el, m):
    parts = [f"member {m.name} : {m.type_name}"]
    if m.optional:
        parts.append("optional")
    if m.multiplicity.is_list:
        opts = ["list"]
        if m.separator is not None:
            opts.append(f"separator {_quote(m.separator.expression)}")
        if m.multiplicity.min != 1:
            opts.append(f"min {m.multiplicity.min}")
        if m.multiplicity.max is not None:
            opts.append(f"max {m.multiplicity.max}")
        parts.append(" ".join(opts))
    if m.is_reference:
        parts.append("ref")
    if el.id_member == m.name:
        parts.append("id")
    if m.position is not None:
        parts.append(f"position {m.position}")
    for pat in m.prefix:
        parts.append(f"prefix {_quote(pat.expression)}")
    for pat in m.suffix:
        parts.append(f"suffix {_quote(pat.expression)}")
    return " ".join(parts)
