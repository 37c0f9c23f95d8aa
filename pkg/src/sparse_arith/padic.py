"""Exact p-adic arithmetic on rationals.

Covers valuations, the projection ``pi(x) = p^{v_p(x)}``, cosets of the
n-th power subgroup ``P_n`` and the maps lambda, S and S^{-1} transported to
``p^Z``.  Rationals are dense in Q_p and every quantity computed here is
determined exactly by a rational input.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import sympy

from .errors import DivisionByZero, UniqueMinimum, ZeroHasNoCoset
from .sequences import SparseSequence
from .terms import Add, Const, Inv, Lam, Mul, Param, Pi, Pred, Sub, Succ, Term, Var, lookup
from .zline import lambda_z, pred_z, succ_z

INF = math.inf


def _check_prime(p: int):
    if not (isinstance(p, int) and sympy.isprime(p)):
        raise ValueError(f"{p!r} is not a prime")


def vp_int(n: int, p: int) -> float | int:
    """Valuation of an integer; repeated squaring keeps huge powers cheap."""
    n = abs(n)
    if n == 0:
        return INF
    v = 0
    while n % p == 0:
        q, k = p, 1
        while n % (q * q) == 0:
            q, k = q * q, 2 * k
        n //= q
        v += k
    return v


def vp_frac(x, p: int) -> float | int:
    x = Fraction(x)
    if x == 0:
        return INF
    return vp_int(x.numerator, p) - vp_int(x.denominator, p)


def p_power(p: int, k: int) -> Fraction:
    return Fraction(p) ** k


@dataclass(frozen=True)
class PadicNumber:
    p: int
    value: Fraction

    def __post_init__(self):
        _check_prime(self.p)
        object.__setattr__(self, "value", Fraction(self.value))

    def _coerce(self, other) -> Fraction:
        if isinstance(other, PadicNumber):
            if other.p != self.p:
                raise ValueError(f"mixing p={self.p} and p={other.p}")
            return other.value
        return Fraction(other)

    def __add__(self, other):
        return PadicNumber(self.p, self.value + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return PadicNumber(self.p, self.value - self._coerce(other))

    def __rsub__(self, other):
        return PadicNumber(self.p, self._coerce(other) - self.value)

    def __mul__(self, other):
        return PadicNumber(self.p, self.value * self._coerce(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        d = self._coerce(other)
        if d == 0:
            raise ZeroDivisionError("division by zero")
        return PadicNumber(self.p, self.value / d)

    def __neg__(self):
        return PadicNumber(self.p, -self.value)

    def __pow__(self, k: int):
        return PadicNumber(self.p, self.value ** k)

    def is_zero(self) -> bool:
        return self.value == 0

    def to_dict(self):
        return {"p": self.p, "num": self.value.numerator, "den": self.value.denominator}

    @classmethod
    def from_dict(cls, d):
        return cls(int(d["p"]), Fraction(int(d["num"]), int(d["den"])))


def vp(x: PadicNumber) -> float | int:
    """``v_p(x)``, with ``math.inf`` for zero."""
    return vp_frac(x.value, x.p)


def pi(x: PadicNumber) -> PadicNumber:
    """``p^{v_p(x)}``, and ``1`` at zero."""
    if x.is_zero():
        return PadicNumber(x.p, Fraction(1))
    return PadicNumber(x.p, p_power(x.p, vp(x)))


def unit_part(x: PadicNumber) -> Fraction:
    return x.value / p_power(x.p, vp(x))


# --------------------------------------------------------------------------
# cosets of P_n
# --------------------------------------------------------------------------

def residue_precision(p: int, n: int) -> int:
    """Exponent ``e`` such that a unit is an n-th power iff it is one mod ``p^e``.

    Hensel: ``f(x) = x^n - u`` has ``v(f'(x)) = v_p(n)`` on units, so a root
    mod ``p^{2 v_p(n) + 1}`` lifts.
    """
    return 2 * vp_int(n, p) + 1


@lru_cache(maxsize=None)
def _power_residues(p: int, n: int, e: int) -> frozenset[int]:
    mod = p ** e
    return frozenset(pow(x, n, mod) for x in range(1, mod) if x % p)


def _unit_mod(u: Fraction, p: int, e: int) -> int:
    mod = p ** e
    return u.numerator * pow(u.denominator, -1, mod) % mod


@dataclass(frozen=True)
class CosetTable:
    p: int
    n: int
    reps: tuple[int, ...]
    threshold: int
    precision: int
    _unit_reps: tuple[int, ...] = field(repr=False, compare=False, default=())

    def to_dict(self):
        return {"p": self.p, "n": self.n, "reps": list(self.reps), "threshold": self.threshold}

    def __len__(self):
        return len(self.reps)


def _is_power_residue(u: int, p: int, n: int, e: int) -> bool:
    return u % (p ** e) in _power_residues(p, n, e)


def _same_unit_class(u: int, w: int, p: int, n: int, e: int) -> bool:
    mod = p ** e
    return _is_power_residue(u * pow(w, -1, mod) % mod, p, n, e)


@lru_cache(maxsize=None)
def pn_cosets(p: int, n: int) -> CosetTable:
    """Brute-force coset representatives of ``Q_p^x / P_n`` and the threshold m.

    Representatives are ``p^k * u`` for ``0 <= k < n`` and ``u`` the least
    positive integer in each class of units modulo n-th powers.
    """
    _check_prime(p)
    if n < 2:
        raise ValueError("n must be at least 2")
    e = residue_precision(p, n)
    mod = p ** e
    unit_reps: list[int] = []
    for u in range(1, mod):
        if u % p and not any(_same_unit_class(u, w, p, n, e) for w in unit_reps):
            unit_reps.append(u)
    reps = tuple(sorted(p ** k * u for k in range(n) for u in unit_reps))
    threshold = next(
        m for m in range(1, e + 1)
        if all(_is_power_residue(1 + p ** m * t, p, n, e) for t in range(p ** (e - m)))
    )
    return CosetTable(p, n, reps, threshold, e, tuple(unit_reps))


def pn_class(x: PadicNumber, table: CosetTable) -> int:
    """The representative ``r`` of ``table`` with ``x / r`` an n-th power."""
    if x.p != table.p:
        raise ValueError(f"table is for p={table.p}, number has p={x.p}")
    if x.is_zero():
        raise ZeroHasNoCoset("0 lies in no coset of P_n")
    p, n, e = table.p, table.n, table.precision
    k = vp(x) % n
    u = _unit_mod(unit_part(x), p, e)
    for w in table._unit_reps:
        if _same_unit_class(u, w, p, n, e):
            return p ** k * w
    raise AssertionError("unit classes do not cover the residue")  # pragma: no cover


# --------------------------------------------------------------------------
# algebraic value witness
# --------------------------------------------------------------------------

def algebraic_value_witness(valuations, v_a) -> tuple[int, tuple[int, int]]:
    """For a root ``a`` of ``sum c_i X^i``: indices ``i < j`` with equal
    ``v(c_i) + i v(a)`` minimal, so ``(j - i) v(a) = v(c_i / c_j)``.

    ``valuations`` lists ``(i, v_p(c_i))``; zero coefficients (infinite
    valuation) are ignored.
    """
    v_a = Fraction(v_a)
    weights = [(Fraction(v) + i * v_a, i) for i, v in valuations if v != INF]
    if not weights:
        raise ValueError("no nonzero coefficients")
    low = min(w for w, _ in weights)
    idx = sorted(i for w, i in weights if w == low)
    if len(idx) < 2:
        raise UniqueMinimum(f"minimum {low} attained only at index {idx[0]}")
    i, j = idx[0], idx[1]
    return j - i, (i, j)


# --------------------------------------------------------------------------
# lambda, S, S^{-1} on p^Z
# --------------------------------------------------------------------------

def _transport(fn, x: PadicNumber, seq: SparseSequence) -> PadicNumber:
    # lambda(x) = lambda(pi(x)); pi(0) = 1 gives the value at zero
    v = vp(pi(x))
    return PadicNumber(x.p, p_power(x.p, fn(v, seq)))


def padic_lambda(x: PadicNumber, seq: SparseSequence) -> PadicNumber:
    return _transport(lambda_z, x, seq)


def padic_succ(x: PadicNumber, seq: SparseSequence) -> PadicNumber:
    return _transport(succ_z, x, seq)


def padic_pred(x: PadicNumber, seq: SparseSequence) -> PadicNumber:
    return _transport(pred_z, x, seq)


_UNARY_P = {Lam: padic_lambda, Succ: padic_succ, Pred: padic_pred}


def eval_term_padic(t: Term, env, p: int, seq: SparseSequence | None = None) -> Fraction:
    """Evaluate a p-adic dialect term to an exact rational."""
    if isinstance(t, Const):
        return Fraction(t.value)
    if isinstance(t, (Var, Param)):
        v = lookup(env, t)
        return v.value if isinstance(v, PadicNumber) else Fraction(v)
    if isinstance(t, (Add, Sub, Mul)):
        a = eval_term_padic(t.left, env, p, seq)
        b = eval_term_padic(t.right, env, p, seq)
        return a + b if isinstance(t, Add) else a - b if isinstance(t, Sub) else a * b
    arg = eval_term_padic(t.arg, env, p, seq)
    if isinstance(t, Inv):
        if arg == 0:
            raise DivisionByZero("inv(0)")
        return 1 / arg
    if isinstance(t, Pi):
        return pi(PadicNumber(p, arg)).value
    if seq is None:
        raise ValueError("a sequence is required to evaluate L/S/Sinv")
    return _UNARY_P[type(t)](PadicNumber(p, arg), seq).value
