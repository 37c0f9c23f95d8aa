"""The one-generator extension ``{A(b) + a}`` over the standard integers.

``b`` is a formal element of R lying above every standard integer.  An
element ``A(b) + a`` is stored as the pair (operator, standard offset); all
order-theoretic questions reduce to eventual comparisons of operators on the
ambient sequence.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

from .errors import AmbientMismatch, UndecidableOnWindow
from .sequences import (
    BoundKind,
    Operator,
    Order,
    SparseSequence,
    op_bound,
    op_compare_ae,
    op_eval,
)
from .zline import lambda_z, pred_z, succ_z


@dataclass(frozen=True)
class ExtElement:
    op: Operator
    offset: int
    seq: SparseSequence

    @classmethod
    def standard(cls, a: int, seq: SparseSequence) -> "ExtElement":
        return cls(Operator.zero(), a, seq)

    @classmethod
    def generator(cls, seq: SparseSequence, z: int = 0) -> "ExtElement":
        """``S^z(b)``."""
        return cls(Operator.shift(z), 0, seq)

    def __add__(self, other):
        return ext_add(self, other)

    def __neg__(self):
        return ext_neg(self)

    def __sub__(self, other):
        return ext_add(self, ext_neg(other))

    def instantiate(self, N: int) -> int:
        """Integer obtained by substituting ``b := r_N``."""
        return op_eval(self.op, self.seq, N) + self.offset

    def to_dict(self):
        return {"operator": self.op.to_pairs(), "offset": self.offset, "seq": self.seq.name}

    def __str__(self):
        if self.op.is_zero():
            return str(self.offset)
        body = f"({self.op})(b)"
        if self.offset:
            body += f" {'+' if self.offset > 0 else '-'} {abs(self.offset)}"
        return body


def _check_ambient(e1: ExtElement, e2: ExtElement):
    if e1.seq != e2.seq:
        raise AmbientMismatch(f"{e1.seq.name} vs {e2.seq.name}")


def ext_add(e1: ExtElement, e2: ExtElement) -> ExtElement:
    _check_ambient(e1, e2)
    return ExtElement(e1.op + e2.op, e1.offset + e2.offset, e1.seq)


def ext_neg(e: ExtElement) -> ExtElement:
    return ExtElement(-e.op, -e.offset, e.seq)


class Sign(enum.Enum):
    POSITIVE = "Positive"
    ZERO = "Zero"
    NEGATIVE = "Negative"


def _op_order(A: Operator, seq: SparseSequence) -> Order:
    if A.is_zero():
        return Order.EQ
    verdict = op_compare_ae(A, Operator.zero(), seq).verdict
    if verdict is Order.UNKNOWN:
        raise UndecidableOnWindow(f"sign of {A} does not stabilise on {seq.name}")
    return verdict


def ext_sign(e: ExtElement) -> Sign:
    # standard offsets are infinitesimal next to b, so they only matter when A =_ae 0
    order = _op_order(e.op, e.seq)
    if order is Order.GT:
        return Sign.POSITIVE
    if order is Order.LT:
        return Sign.NEGATIVE
    if e.offset > 0:
        return Sign.POSITIVE
    return Sign.ZERO if e.offset == 0 else Sign.NEGATIVE


def ext_compare(e1: ExtElement, e2: ExtElement) -> Order:
    """Order of ``e1`` relative to ``e2`` (GT, LT or EQ)."""
    s = ext_sign(ext_add(e1, ext_neg(e2)))
    return {Sign.POSITIVE: Order.GT, Sign.NEGATIVE: Order.LT, Sign.ZERO: Order.EQ}[s]


def ext_equal(e1: ExtElement, e2: ExtElement) -> bool:
    """Equality of values: ``A(b) + a = B(b) + c`` iff ``A =_ae B`` and ``a = c``."""
    return ext_compare(e1, e2) is Order.EQ


class Approx(enum.Enum):
    APPROX = "Approx"
    LL = "LL"
    GG = "GG"
    NONPOSITIVE = "Incomparable-nonpositive"


def is_standard(e: ExtElement) -> bool:
    """True when the value of ``e`` is the standard integer ``e.offset``."""
    return _op_order(e.op, e.seq) is Order.EQ


def ext_approx(e1: ExtElement, e2: ExtElement) -> Approx:
    """Archimedean comparison of two positive elements.

    Every positive nonstandard element is ``~ b`` and all standard elements
    are mutually ``~``, so only the standard/nonstandard split matters.
    """
    _check_ambient(e1, e2)
    if ext_sign(e1) is not Sign.POSITIVE or ext_sign(e2) is not Sign.POSITIVE:
        return Approx.NONPOSITIVE
    s1, s2 = is_standard(e1), is_standard(e2)
    if s1 == s2:
        return Approx.APPROX
    return Approx.LL if s1 else Approx.GG


def _shift_floor(e: ExtElement) -> int:
    """For a positive nonstandard ``e``: the z with ``S^z(b) <= e < S^{z+1}(b)``."""
    bound = op_bound(e.op, e.seq)
    if bound.kind is BoundKind.EXACT and e.offset < 0:
        return bound.m - 1
    return bound.m


def ext_lambda(e: ExtElement) -> ExtElement:
    seq = e.seq
    if ext_sign(e) is not Sign.POSITIVE:
        return ExtElement.standard(seq.values[0], seq)
    if is_standard(e):
        return ExtElement.standard(lambda_z(e.offset, seq), seq)
    return ExtElement.generator(seq, _shift_floor(e))


def ext_succ(e: ExtElement) -> ExtElement:
    lam = ext_lambda(e)
    if lam.op.is_zero():
        return ExtElement.standard(succ_z(lam.offset, e.seq), e.seq)
    (z, _), = lam.op.items()
    return ExtElement.generator(e.seq, z + 1)


def ext_pred(e: ExtElement) -> ExtElement:
    lam = ext_lambda(e)
    if lam.op.is_zero():
        return ExtElement.standard(pred_z(lam.offset, e.seq), e.seq)
    (z, _), = lam.op.items()
    return ExtElement.generator(e.seq, z - 1)


@dataclass(frozen=True)
class Membership:
    kind: str  # "InBase" | "IsShift" | "NotInR"
    value: int | None = None

    def to_dict(self):
        return {"kind": self.kind, "value": self.value}


def ext_in_R(e: ExtElement) -> Membership:
    seq = e.seq
    sign = ext_sign(e)
    if is_standard(e):
        a = e.offset
        if a < seq.values[0]:
            return Membership("NotInR")
        return Membership("InBase", a) if lambda_z(a, seq) == a else Membership("NotInR")
    if sign is not Sign.POSITIVE:
        return Membership("NotInR")
    bound = op_bound(e.op, seq)
    if bound.kind is BoundKind.EXACT and e.offset == 0:
        return Membership("IsShift", bound.m)
    return Membership("NotInR")


def operator_reach(e: ExtElement) -> int:
    return e.op.reach


def default_instantiation_index(e: ExtElement) -> int:
    """Deepest index keeping every shift of ``e`` inside the window."""
    return e.seq.horizon - operator_reach(e)
