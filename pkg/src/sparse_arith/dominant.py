"""Polynomials in ``b_i = S^i(b)`` with their dominant terms.

The generator is ``b = p^{r_N}`` for a formally nonstandard index, so
``v_p(b_i) = r_{N+i}`` and a monomial ``c * prod b_i^{m_i}`` has valuation
``v_p(c) + sum m_i r_{N+i}``.  Two monomials are compared through the
operator ``sum (m_i - n_i) S^i``; the rational offsets only break ties that
cannot occur when ``d`` does not exceed the degree of the sequence.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

import sympy

from .errors import IndexBeyondHorizon, NoDominant, SizeBudgetExceeded, UndecidableOnWindow
from .padic import CosetTable, PadicNumber, p_power, pn_class, vp_frac
from .sequences import Operator, Order, SparseSequence, op_compare_ae

DEFAULT_SIZE_BUDGET = 1 << 16   # largest total exponent of p accepted by instantiate

Exps = tuple[int, ...]


@dataclass(frozen=True)
class FormalValuation:
    offset: int
    exps: Exps

    def at(self, seq: SparseSequence, N: int) -> int:
        """The valuation once ``b := p^{r_N}``."""
        return self.offset + sum(m * seq.term(N + i) for i, m in enumerate(self.exps))

    def to_dict(self):
        return {"offset": self.offset, "exps": list(self.exps)}


@dataclass(frozen=True)
class SparsePoly:
    p: int
    seq: SparseSequence
    d: int
    terms: Mapping[Exps, Fraction]

    def __post_init__(self):
        clean = {}
        for exps, c in dict(self.terms).items():
            exps = tuple(int(m) for m in exps)
            if len(exps) != self.d or any(m < 0 for m in exps):
                raise ValueError(f"bad exponent vector {exps} for d={self.d}")
            c = Fraction(c)
            if c:
                clean[exps] = clean.get(exps, Fraction(0)) + c
        object.__setattr__(self, "terms", {e: c for e, c in sorted(clean.items()) if c})

    def __hash__(self):
        return hash((self.p, self.seq, self.d, tuple(self.terms.items())))

    def is_zero(self) -> bool:
        return not self.terms

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    @classmethod
    def parse(cls, text: str, p: int, seq: SparseSequence, d: int) -> "SparsePoly":
        """Parse a polynomial in ``X0 .. X{d-1}`` (sympy syntax, ``^`` allowed)."""
        gens = sympy.symbols(f"X0:{d}")
        local = {str(g): g for g in gens}
        expr = sympy.sympify(text.replace("^", "**"), locals=local)
        stray = expr.free_symbols - set(gens)
        if stray:
            raise ValueError(f"unknown symbols {sorted(map(str, stray))}")
        poly = sympy.Poly(expr, *gens, domain="QQ")
        terms = {m: Fraction(int(c.numerator), int(c.denominator)) for m, c in poly.terms()}
        return cls(p, seq, d, terms)

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for exps, c in sorted(self.terms.items(), reverse=True):
            mono = "*".join(f"X{i}" if m == 1 else f"X{i}^{m}"
                            for i, m in enumerate(exps) if m)
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            else:
                parts.append(f"{c}*{mono}" if c.denominator == 1 else f"({c})*{mono}")
        return " + ".join(parts).replace("+ -", "- ")

    def to_dict(self):
        return {
            "p": self.p,
            "seq": self.seq.name,
            "d": self.d,
            "terms": [[list(e), c.numerator, c.denominator] for e, c in self.terms.items()],
        }


@dataclass(frozen=True)
class Monomial:
    coeff: Fraction
    exps: Exps


def monomial_val(mono: Monomial, p: int) -> FormalValuation:
    if mono.coeff == 0:
        raise ValueError("zero monomial has no valuation")
    return FormalValuation(int(vp_frac(mono.coeff, p)), tuple(mono.exps))


def _exponent_operator(m: Exps, n: Exps) -> Operator:
    return Operator({i: a - b for i, (a, b) in enumerate(zip(m, n))})


@functools.lru_cache(maxsize=65536)
def _exps_order(m: Exps, n: Exps, seq: SparseSequence) -> Order:
    D = _exponent_operator(m, n)
    if D.is_zero():
        return Order.EQ
    return op_compare_ae(D, Operator.zero(), seq).verdict


def dominant_term(P: SparsePoly) -> Monomial:
    """The monomial of strictly least valuation, with an unbounded gap."""
    if P.is_zero():
        raise ValueError("the zero polynomial has no dominant term")
    items = list(P.terms.items())
    best_e, best_c = items[0]
    for e, c in items[1:]:
        order = _exps_order(e, best_e, P.seq)
        if order is Order.UNKNOWN:
            raise UndecidableOnWindow(f"cannot order exponents {e} and {best_e} on {P.seq.name}")
        if order is Order.EQ:
            raise NoDominant(
                f"exponents {best_e} and {e} induce the same operator on {P.seq.name}",
                pair=(best_e, e),
            )
        if order is Order.LT:
            best_e, best_c = e, c
    return Monomial(best_c, best_e)


def poly_vp(P: SparsePoly) -> FormalValuation:
    return monomial_val(dominant_term(P), P.p)


def poly_pi(P: SparsePoly) -> SparsePoly:
    """``pi`` of the value, as the monomial ``pi(c) * prod b_i^{m_i}``."""
    mono = dominant_term(P)
    return SparsePoly(P.p, P.seq, P.d, {mono.exps: p_power(P.p, vp_frac(mono.coeff, P.p))})


def poly_pn_class(P: SparsePoly, table: CosetTable, N: int) -> int:
    """Coset of the value at ``b := p^{r_N}``; only ``sum m_i r_{N+i} mod n`` matters."""
    if table.p != P.p:
        raise ValueError(f"table is for p={table.p}, polynomial has p={P.p}")
    mono = dominant_term(P)
    k = sum(m * P.seq.term(N + i) for i, m in enumerate(mono.exps)) % table.n
    return pn_class(PadicNumber(P.p, mono.coeff * P.p ** k), table)


def instantiate(P: SparsePoly, N: int, size_budget: int = DEFAULT_SIZE_BUDGET) -> PadicNumber:
    """Exact value of ``P`` at ``b_i := p^{r_{N+i}}``."""
    if N < 0 or N + P.d - 1 > P.seq.horizon:
        raise IndexBeyondHorizon(f"indices {N}..{N + P.d - 1} exceed horizon {P.seq.horizon}")
    r = [P.seq.term(N + i) for i in range(P.d)]
    top = max((sum(m * ri for m, ri in zip(e, r)) for e in P.terms), default=0)
    if top > size_budget:
        raise SizeBudgetExceeded(f"exponent {top} of p exceeds the budget {size_budget}")
    total = Fraction(0)
    for exps, c in P.terms.items():
        total += c * P.p ** sum(m * ri for m, ri in zip(exps, r))
    return PadicNumber(P.p, total)
