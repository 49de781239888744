"""Recursive-descent parser for ``.pafas`` programs.

Grammar (lowest to highest precedence)::

    program    := { definition | "main" expr [";"] }
    definition := IDENT "=" expr ";"
    expr       := choice { ("||" | "|[" [actions] "]|") choice }
    choice     := postfix { "+" postfix }
    postfix    := prefix { "[" [maps] "]" | "/" "{" [actions] "}" }
    prefix     := ["_"] action "." prefix | atom
    atom       := "0" | IDENT | "(" expr ")" | "rec" IDENT "." expr
    action     := IDENT | "tau"
    maps       := IDENT "->" action { "," IDENT "->" action }
    actions    := IDENT { "," IDENT }

``#`` starts a comment that runs to the end of the line.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .syntax import (
    ALL_BUT_OMEGA,
    NIL,
    RESERVED,
    TAU,
    Choice,
    Parallel,
    Prefix,
    ProgramEnv,
    Rec,
    Relabel,
    RelabelFn,
    Var,
    render_term,
)


class ParseError(Exception):
    def __init__(self, message, line, col, filename="<string>"):
        self.line = line
        self.col = col
        self.filename = filename
        super().__init__(f"{filename}:{line}:{col}: {message}")


class LexError(ParseError):
    pass


class SyntaxError_(ParseError):
    """Unexpected token; ``expected`` lists what would have been accepted."""

    def __init__(self, found, expected, line, col, filename="<string>"):
        self.found = found
        self.expected = tuple(sorted(expected))
        super().__init__(
            f"unexpected {found!r}, expected one of {', '.join(self.expected)}", line, col, filename
        )


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT, NUM0, PUNCT, EOF
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<ident>[A-Za-z][A-Za-z0-9_]*)
  | (?P<zero>0)
  | (?P<punct>\|\[|\]\||\|\||->|[().+_\[\]/{},;=])
    """,
    re.VERBOSE,
)


def tokenize(text: str, filename: str = "<string>") -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise LexError(f"unexpected character {text[pos]!r}", line, col, filename)
        kind = m.lastgroup
        chunk = m.group()
        if kind == "ident":
            tokens.append(Token("IDENT", chunk, line, col))
        elif kind == "zero":
            tokens.append(Token("ZERO", chunk, line, col))
        elif kind == "punct":
            tokens.append(Token("PUNCT", chunk, line, col))
        nl = chunk.count("\n")
        if nl:
            line += nl
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("EOF", "<eof>", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text, filename):
        self.filename = filename
        self.toks = tokenize(text, filename)
        self.i = 0

    @property
    def tok(self):
        return self.toks[self.i]

    def peek(self, k=1):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def is_punct(self, text, tok=None):
        tok = tok or self.tok
        return tok.kind == "PUNCT" and tok.text == text

    def error(self, expected):
        t = self.tok
        raise SyntaxError_(t.text, expected, t.line, t.col, self.filename)

    def expect(self, text):
        if not self.is_punct(text):
            self.error({repr(text)})
        self.i += 1

    def ident(self, allow_tau=False, what="identifier"):
        t = self.tok
        if t.kind != "IDENT" or (t.text in RESERVED and not (allow_tau and t.text == TAU)):
            self.error({what})
        self.i += 1
        return t.text

    # -- program level

    def program(self) -> ProgramEnv:
        defs = {}
        main = None
        while self.tok.kind != "EOF":
            t = self.tok
            if t.kind == "IDENT" and t.text == "main":
                if main is not None:
                    raise ParseError("duplicate main", t.line, t.col, self.filename)
                self.i += 1
                main = self.expr()
                if self.is_punct(";"):
                    self.i += 1
            elif t.kind == "IDENT" and t.text not in RESERVED:
                name = self.ident()
                self.expect("=")
                if name in defs:
                    raise ParseError(f"duplicate definition {name!r}", t.line, t.col, self.filename)
                defs[name] = self.expr()
                self.expect(";")
            else:
                self.error({"definition", "'main'"})
        if main is None:
            if not defs:
                t = self.tok
                raise ParseError("empty program", t.line, t.col, self.filename)
            main = Var(next(iter(defs)))
        return ProgramEnv(defs, main)

    # -- expressions

    def expr(self):
        left = self.choice()
        while True:
            if self.is_punct("||"):
                self.i += 1
                left = Parallel(left, self.choice(), ALL_BUT_OMEGA)
            elif self.is_punct("|["):
                self.i += 1
                acts = self.action_list("]|")
                self.expect("]|")
                left = Parallel(left, self.choice(), frozenset(acts))
            else:
                return left

    def choice(self):
        left = self.postfix()
        while self.is_punct("+"):
            self.i += 1
            left = Choice(left, self.postfix())
        return left

    def postfix(self):
        t = self.prefix()
        while True:
            if self.is_punct("["):
                self.i += 1
                pairs = []
                if not self.is_punct("]"):
                    while True:
                        src = self.ident(what="action")
                        self.expect("->")
                        dst = self.ident(allow_tau=True, what="action")
                        pairs.append((src, dst))
                        if not self.is_punct(","):
                            break
                        self.i += 1
                self.expect("]")
                t = Relabel(t, RelabelFn(tuple(pairs)))
            elif self.is_punct("/"):
                self.i += 1
                self.expect("{")
                acts = self.action_list("}")
                self.expect("}")
                t = Relabel(t, RelabelFn.hiding(acts))
            else:
                return t

    def action_list(self, closer):
        acts = []
        if self.is_punct(closer):
            return acts
        while True:
            acts.append(self.ident(what="action"))
            if not self.is_punct(","):
                return acts
            self.i += 1

    def prefix(self):
        urgent = False
        if self.is_punct("_"):
            self.i += 1
            urgent = True
            action = self.ident(allow_tau=True, what="action")
            self.expect(".")
            return Prefix(action, self.prefix(), True)
        t = self.tok
        if t.kind == "IDENT" and self.is_punct(".", self.peek()) and (t.text not in RESERVED or t.text == TAU):
            self.i += 2
            return Prefix(t.text, self.prefix(), urgent)
        return self.atom()

    def atom(self):
        t = self.tok
        if t.kind == "ZERO":
            self.i += 1
            return NIL
        if self.is_punct("("):
            self.i += 1
            e = self.expr()
            self.expect(")")
            return e
        if t.kind == "IDENT" and t.text == "rec":
            self.i += 1
            name = self.ident()
            self.expect(".")
            return Rec(name, self.expr())
        if t.kind == "IDENT" and t.text not in RESERVED:
            self.i += 1
            return Var(t.text)
        self.error({"'0'", "'('", "'rec'", "'_'", "identifier"})


def parse(text: str, filename: str = "<string>") -> ProgramEnv:
    """Parse program text into definitions plus a main term."""
    return _Parser(text, filename).program()


def parse_term(text: str) -> object:
    p = _Parser(text, "<term>")
    t = p.expr()
    if p.tok.kind != "EOF":
        p.error({"end of input"})
    return t


def parse_file(path) -> ProgramEnv:
    with open(path, encoding="utf-8") as f:
        return parse(f.read(), str(path))


def render(env: ProgramEnv) -> str:
    lines = [f"{name} = {render_term(body)};" for name, body in env.definitions.items()]
    lines.append(f"main {render_term(env.main)}")
    return "\n".join(lines) + "\n"
