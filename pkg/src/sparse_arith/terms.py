"""Term syntax shared by the integer and p-adic dialects.

Grammar (``*``, ``inv`` and ``pi`` only in the p-adic dialect)::

    term    := product (("+" | "-") product)*
    product := atom ("*" atom)*
    atom    := int | "-" int | ident | ident "[" int "]"
             | ("L" | "S" | "Sinv" | "inv" | "pi") "(" term ")" | "(" term ")"

``ident[k]`` is a parameter: the variable ``ident`` evaluated at index ``k``
of a cut sequence.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .errors import TermSyntaxError, UnboundVariable, UnknownIdentifier

MAX_TERM_LENGTH = 20000


@dataclass(frozen=True)
class Const:
    value: Union[int, Fraction]


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Param:
    name: str
    index: int


@dataclass(frozen=True)
class Add:
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class Sub:
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class Mul:
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class Lam:
    arg: "Term"


@dataclass(frozen=True)
class Succ:
    arg: "Term"


@dataclass(frozen=True)
class Pred:
    arg: "Term"


@dataclass(frozen=True)
class Inv:
    arg: "Term"


@dataclass(frozen=True)
class Pi:
    arg: "Term"


Term = Union[Const, Var, Param, Add, Sub, Mul, Lam, Succ, Pred, Inv, Pi]

ZERO = Const(0)
ONE = Const(1)

UNARY = {"L": Lam, "S": Succ, "Sinv": Pred, "inv": Inv, "pi": Pi}
UNARY_NAME = {cls: name for name, cls in UNARY.items()}
DIALECT_FUNCS = {"Z": {"L", "S", "Sinv"}, "Padic": {"L", "S", "Sinv", "inv", "pi"}}


# --------------------------------------------------------------------------
# parsing
# --------------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(.))")


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m.end() == pos:
            break
        if m.group(1) is not None:
            tokens.append(("int", m.group(1), m.start(1)))
        elif m.group(2) is not None:
            tokens.append(("ident", m.group(2), m.start(2)))
        elif m.group(3) is not None:
            tokens.append(("op", m.group(3), m.start(3)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text, dialect, variables):
        self.tokens = _tokenize(text)
        self.i = 0
        self.funcs = DIALECT_FUNCS[dialect]
        self.allow_mul = dialect == "Padic"
        self.variables = variables

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        tok = self.take()
        if tok[0] != "op" or tok[1] != value:
            raise TermSyntaxError(f"expected {value!r}", tok[2])
        return tok

    def term(self):
        node = self.product()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            rhs = self.product()
            node = Add(node, rhs) if op == "+" else Sub(node, rhs)
        return node

    def product(self):
        node = self.atom()
        while self.peek()[0] == "op" and self.peek()[1] == "*":
            tok = self.take()
            if not self.allow_mul:
                raise TermSyntaxError("'*' is not part of the Z dialect", tok[2])
            node = Mul(node, self.atom())
        return node

    def integer(self):
        tok = self.take()
        if tok[0] == "op" and tok[1] == "-":
            nxt = self.take()
            if nxt[0] != "int":
                raise TermSyntaxError("expected integer after unary '-'", nxt[2])
            return -int(nxt[1])
        if tok[0] != "int":
            raise TermSyntaxError("expected integer", tok[2])
        return int(tok[1])

    def atom(self):
        kind, value, pos = self.peek()
        if kind == "int" or (kind == "op" and value == "-"):
            return Const(self.integer())
        if kind == "op" and value == "(":
            self.take()
            node = self.term()
            self.expect(")")
            return node
        if kind == "ident":
            self.take()
            nxt = self.peek()
            if nxt[0] == "op" and nxt[1] == "(":
                if value not in self.funcs:
                    raise UnknownIdentifier(value, pos)
                self.take()
                arg = self.term()
                self.expect(")")
                return UNARY[value](arg)
            if value in UNARY:
                raise TermSyntaxError(f"expected '(' after {value!r}", nxt[2])
            if self.variables is not None and value not in self.variables:
                raise UnknownIdentifier(value, pos)
            if nxt[0] == "op" and nxt[1] == "[":
                self.take()
                idx = self.integer()
                self.expect("]")
                return Param(value, idx)
            return Var(value)
        if kind == "end":
            raise TermSyntaxError("unexpected end of input", pos)
        raise TermSyntaxError(f"unexpected {value!r}", pos)


def parse_term(text: str, dialect: str = "Z", variables=None) -> Term:
    """Parse ``text`` in the ``"Z"`` or ``"Padic"`` dialect.

    If ``variables`` is given, any other identifier raises
    :class:`UnknownIdentifier`.
    """
    if dialect not in DIALECT_FUNCS:
        raise ValueError(f"unknown dialect {dialect!r}")
    if len(text) > MAX_TERM_LENGTH:
        raise TermSyntaxError(f"input longer than {MAX_TERM_LENGTH} characters", MAX_TERM_LENGTH)
    parser = _Parser(text, dialect, None if variables is None else set(variables))
    node = parser.term()
    tok = parser.peek()
    if tok[0] != "end":
        raise TermSyntaxError(f"unexpected {tok[1]!r}", tok[2])
    return node


# --------------------------------------------------------------------------
# rendering and traversal
# --------------------------------------------------------------------------

def _prec(t) -> int:
    if isinstance(t, (Add, Sub)):
        return 1
    if isinstance(t, Mul):
        return 2
    return 3


def render(t: Term) -> str:
    if isinstance(t, Const):
        v = t.value
        if isinstance(v, Fraction) and v.denominator != 1:
            return f"({render(Const(v.numerator))}*inv({v.denominator}))"
        v = int(v)
        return str(v) if v >= 0 else f"({v})"
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Param):
        return f"{t.name}[{t.index}]"
    if isinstance(t, (Add, Sub)):
        op = "+" if isinstance(t, Add) else "-"
        return f"{_wrap(t.left, 1)} {op} {_wrap(t.right, 2)}"
    if isinstance(t, Mul):
        return f"{_wrap(t.left, 2)}*{_wrap(t.right, 3)}"
    return f"{UNARY_NAME[type(t)]}({render(t.arg)})"


def _wrap(t, min_prec):
    s = render(t)
    return s if _prec(t) >= min_prec else f"({s})"


def children(t: Term):
    if isinstance(t, (Add, Sub, Mul)):
        return (t.left, t.right)
    if isinstance(t, (Lam, Succ, Pred, Inv, Pi)):
        return (t.arg,)
    return ()


def depth(t: Term) -> int:
    kids = children(t)
    return 0 if not kids else 1 + max(depth(k) for k in kids)


def variables(t: Term) -> set[str]:
    if isinstance(t, Var):
        return {t.name}
    out = set()
    for k in children(t):
        out |= variables(k)
    return out


def params(t: Term) -> set[tuple[str, int]]:
    if isinstance(t, Param):
        return {(t.name, t.index)}
    out = set()
    for k in children(t):
        out |= params(k)
    return out


def rebuild(t: Term, kids) -> Term:
    if isinstance(t, (Add, Sub, Mul)):
        return type(t)(*kids)
    if isinstance(t, (Lam, Succ, Pred, Inv, Pi)):
        return type(t)(kids[0])
    return t


def at_index(t: Term, index: int, names) -> Term:
    """Replace every free variable in ``names`` by its parameter at ``index``."""
    if isinstance(t, Var) and t.name in names:
        return Param(t.name, index)
    kids = children(t)
    if not kids:
        return t
    return rebuild(t, [at_index(k, index, names) for k in kids])


def lookup(env, t):
    key = t.name if isinstance(t, Var) else (t.name, t.index)
    try:
        return env[key]
    except KeyError:
        label = key if isinstance(key, str) else f"{key[0]}[{key[1]}]"
        raise UnboundVariable(f"unbound variable {label}") from None
