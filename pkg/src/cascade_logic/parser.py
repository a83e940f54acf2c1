"""Boolean expression language.

Grammar, loosest binding first:

    expr    := xorterm  (("|" | "@|") xorterm)*     OR / NOR
    xorterm := andterm ("^" andterm)*               XOR (binary, left-assoc)
    andterm := unary   (("&" | "@&") unary)*        AND / NAND
    unary   := "!" unary | IDENT | "(" expr ")"     NOT, variables, grouping

Runs of the same binary operator fold into one k-ary node ("a & b & c" is a
single 3-input AND); a change of operator at the same precedence level, or
parentheses, start a fresh node.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

Expr = Union["Var", "Not", "And", "Or", "Nand", "Nor", "Xor"]


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Not:
    arg: Expr


def _require_fan_in(args):
    if len(args) < 2:
        raise ValueError("k-ary gate nodes need at least 2 operands")


@dataclass(frozen=True)
class And:
    args: tuple[Expr, ...]

    def __post_init__(self):
        _require_fan_in(self.args)


@dataclass(frozen=True)
class Or:
    args: tuple[Expr, ...]

    def __post_init__(self):
        _require_fan_in(self.args)


@dataclass(frozen=True)
class Nand:
    args: tuple[Expr, ...]

    def __post_init__(self):
        _require_fan_in(self.args)


@dataclass(frozen=True)
class Nor:
    args: tuple[Expr, ...]

    def __post_init__(self):
        _require_fan_in(self.args)


@dataclass(frozen=True)
class Xor:
    left: Expr
    right: Expr


class ParseError(ValueError):
    """Syntax error; `position` is the 0-based character offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


_TOKEN_RE = re.compile(r"\s*(?:(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>@&|@\||[!&^|()]))")


@dataclass(frozen=True)
class _Token:
    text: str
    is_ident: bool
    position: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            at = len(text) - len(stripped)
            raise ParseError(f"unexpected character {stripped[0]!r}", at)
        if m.group("ident"):
            tokens.append(_Token(m.group("ident"), True, m.start("ident")))
        else:
            tokens.append(_Token(m.group("op"), False, m.start("op")))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def advance(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def parse(self) -> Expr:
        if not self.tokens:
            raise ParseError("empty expression", 0)
        node = self.expr()
        if (tok := self.peek()) is not None:
            raise ParseError(f"unexpected {tok.text!r}", tok.position)
        return node

    def chain(self, sub, ops: dict):
        # one k-ary node per uninterrupted run of the same operator
        node = sub()
        while (tok := self.peek()) is not None and tok.text in ops:
            args = [node]
            while (t := self.peek()) is not None and t.text == tok.text:
                self.advance()
                args.append(sub())
            node = ops[tok.text](tuple(args))
        return node

    def expr(self) -> Expr:
        return self.chain(self.xorterm, {"|": Or, "@|": Nor})

    def xorterm(self) -> Expr:
        node = self.andterm()
        while (tok := self.peek()) is not None and tok.text == "^":
            self.advance()
            node = Xor(node, self.andterm())
        return node

    def andterm(self) -> Expr:
        return self.chain(self.unary, {"&": And, "@&": Nand})

    def unary(self) -> Expr:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input", len(self.text))
        if tok.text == "!":
            self.advance()
            return Not(self.unary())
        if tok.is_ident:
            self.advance()
            return Var(tok.text)
        if tok.text == "(":
            self.advance()
            node = self.expr()
            closing = self.peek()
            if closing is None or closing.text != ")":
                raise ParseError("expected ')'",
                                 closing.position if closing else len(self.text))
            self.advance()
            return node
        raise ParseError(f"unexpected {tok.text!r}", tok.position)


def parse_expr(text: str) -> Expr:
    """Parse the expression language into an AST."""
    return _Parser(text).parse()


def variables(expr: Expr) -> list[str]:
    """Variable names in first-appearance order."""
    seen: dict[str, None] = {}

    def walk(e: Expr) -> None:
        if isinstance(e, Var):
            seen.setdefault(e.name)
        elif isinstance(e, Not):
            walk(e.arg)
        elif isinstance(e, Xor):
            walk(e.left)
            walk(e.right)
        else:
            for a in e.args:
                walk(a)

    walk(expr)
    return list(seen)
