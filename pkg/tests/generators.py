"""Seeded random generators shared by the module tests and the acceptance suite."""
from __future__ import annotations

import random
from fractions import Fraction

from sparse_arith.dominant import SparsePoly
from sparse_arith.nonstandard import ExtElement
from sparse_arith.sequences import Operator, SparseSequence
from sparse_arith.terms import Add, Const, Inv, Lam, Mul, Pi, Pred, Sub, Succ, Var
from sparse_arith.varsep import CutSequence


def random_operator(rng: random.Random, reach: int = 3, bound: int = 8) -> Operator:
    return Operator({i: rng.randint(-bound, bound) for i in range(-reach, reach + 1)
                     if rng.random() < 0.45})


def random_ext(rng: random.Random, seq: SparseSequence, reach: int = 3, bound: int = 8,
               offset: int = 10 ** 6) -> ExtElement:
    r = rng.random()
    a = rng.randint(-offset, offset)
    if r < 0.1:
        return ExtElement(Operator.zero(), a, seq)
    if r < 0.2:
        # a pure shift, possibly with a small offset
        return ExtElement(Operator.shift(rng.randint(-reach, reach)),
                          rng.choice([0, 0, rng.randint(-5, 5)]), seq)
    A = random_operator(rng, reach, bound)
    vanishing = seq.recurrence_operator()
    if vanishing is not None and rng.random() < 0.15:
        # an operator that is eventually zero, so the element is standard
        A = vanishing * rng.choice([-2, -1, 1, 2])
    return ExtElement(A, a, seq)


def random_poly(rng: random.Random, p: int, seq: SparseSequence, d: int,
                max_degree: int = 3, bound: int = 1000) -> SparsePoly:
    while True:
        terms = {}
        for _ in range(rng.randint(1, 5)):
            while True:
                e = tuple(rng.randint(0, max_degree) for _ in range(d))
                if sum(e) <= max_degree:
                    break
            c = rng.randint(1, bound) * rng.choice([-1, 1])
            if rng.random() < 0.2:
                c = Fraction(c, rng.randint(1, bound))
            terms[e] = c
        P = SparsePoly(p, seq, d, terms)
        if not P.is_zero():
            return P


def random_term(rng: random.Random, depth: int, padic: bool = False):
    """Terms in ``x`` and ``y`` of depth at most ``depth``."""
    if depth == 0 or rng.random() < 0.25:
        r = rng.random()
        if r < 0.4:
            return Var("x")
        if r < 0.8:
            return Var("y")
        return Const(rng.randint(1, 5))
    ops = ["add", "sub", "L", "S", "Sinv"] + (["mul", "pi", "inv"] if padic else [])
    op = rng.choice(ops)
    if op in ("add", "sub", "mul"):
        cls = {"add": Add, "sub": Sub, "mul": Mul}[op]
        return cls(random_term(rng, depth - 1, padic), random_term(rng, depth - 1, padic))
    cls = {"L": Lam, "S": Succ, "Sinv": Pred, "pi": Pi, "inv": Inv}[op]
    return cls(random_term(rng, depth - 1, padic))


def z_case(rng: random.Random, seq: SparseSequence, regime: str, size: int = 21):
    """An increasing family ``c * r_{base+k} + d`` with the cut in the middle,
    and ``b`` far above (``dominating``) or far below (``dominated``) it."""
    c, d = rng.randint(1, 3), rng.randint(-5, 5)
    base = rng.randint(12, 20)
    values = [c * seq.term(base + k) + d for k in range(size)]
    if regime == "dominating":
        b = seq.term(rng.randint(150, 170)) + rng.randint(-9, 9)
    else:
        b = rng.randint(1, 40)
    return CutSequence.from_values(values, size // 2), b


def padic_case(rng: random.Random, p: int, regime: str, size: int = 21):
    """``a_k = u p^{base + 2k}``; ``b`` has valuation far below (``dominating``)
    or far above (``dominated``) every ``a_k``."""
    u = rng.choice([1, 2, 4]) if p != 2 else rng.choice([1, 3, 5])
    base = rng.randint(2, 5)
    values = [Fraction(u * p ** (base + 2 * k)) for k in range(size)]
    E = -rng.randint(80, 120) if regime == "dominating" else rng.randint(80, 120)
    b = Fraction(p) ** E * rng.choice([1, 2, 4, 7])
    return CutSequence.from_values(values, size // 2), b
