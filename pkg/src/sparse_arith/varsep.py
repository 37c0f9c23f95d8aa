"""Variable separation on concrete cut-indexed data.

A :class:`CutSequence` holds tuples ``a_k`` indexed by ``I + (c) + J``.  The
routines here rewrite a term ``t(x, y)`` into a form where the ``x`` part and
the ``y`` part only interact through ``+`` (integers) or through a quotient of
sums of products (p-adic dialect), valid at every retained index.  Each step
may give up a minimal prefix of ``I`` or suffix of ``J`` and reuse the values
found there as parameters.

Indiscernibility is not available on finite data, so the case split of each
step is decided by checking the data itself (constancy, strict monotonicity,
a uniform isosceles branch).  Data that fits no branch raises a
:class:`SeparationError` subclass; nothing unverified is ever returned.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable

from .errors import (
    AmbiguousCase,
    DivisionByZero,
    IndexBeyondHorizon,
    NotMonotone,
    SeparationError,
    WindowExhausted,
)
from .padic import eval_term_padic, vp_frac
from .sequences import SparseSequence
from .terms import (
    ONE,
    ZERO,
    Add,
    Const,
    Inv,
    Lam,
    Mul,
    Param,
    Pi,
    Pred,
    Sub,
    Succ,
    Term,
    Var,
    at_index,
    params,
    render,
)
from .zline import eval_term_z, lambda_z

M_MAX = 8   # shift levels tried when comparing growth classes


# --------------------------------------------------------------------------
# cut sequences
# --------------------------------------------------------------------------

def _parse_value(v):
    if isinstance(v, str):
        return Fraction(v) if "/" in v else int(v)
    if isinstance(v, Fraction):
        return v.numerator if v.denominator == 1 else v
    return int(v)


def _dump_value(v):
    if isinstance(v, Fraction) and v.denominator != 1:
        return f"{v.numerator}/{v.denominator}"
    return int(v)


@dataclass(frozen=True)
class CutSequence:
    """Points ``(index, values)`` in index order, with a marked cut index.

    ``lo`` and ``hi`` are the positions of the first and last retained
    points; everything outside them has been discarded and may serve as a
    parameter.
    """

    names: tuple[str, ...]
    points: tuple[tuple[int, tuple], ...]
    cut: int
    lo: int = 0
    hi: int = -1

    def __post_init__(self):
        pts = tuple((int(i), tuple(_parse_value(v) for v in vals)) for i, vals in self.points)
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "points", pts)
        idx = [i for i, _ in pts]
        if any(a >= b for a, b in zip(idx, idx[1:])):
            raise ValueError("indices must be strictly increasing")
        if any(len(vals) != len(self.names) for _, vals in pts):
            raise ValueError("every point needs one value per variable")
        if self.cut not in idx:
            raise ValueError(f"cut index {self.cut} is not among the points")
        if self.hi < 0:
            object.__setattr__(self, "hi", len(pts) + self.hi)
        c = self.cut_pos
        if not (0 <= self.lo < c < self.hi < len(pts)):
            raise WindowExhausted("a truncation must keep both sides nonempty")

    @classmethod
    def build(cls, names, left, cut, right) -> "CutSequence":
        """From lists of ``(index, values)``; a bare value is a 1-tuple."""
        def norm(pt):
            i, vals = pt
            return i, tuple(vals) if isinstance(vals, (tuple, list)) else (vals,)

        pts = [norm(p) for p in left] + [norm(cut)] + [norm(p) for p in right]
        return cls(tuple(names), tuple(pts), norm(cut)[0])

    @classmethod
    def from_values(cls, values, cut_pos: int, name: str = "x") -> "CutSequence":
        """One variable, indices ``0..len-1``, cut at position ``cut_pos``."""
        return cls((name,), tuple((k, (v,)) for k, v in enumerate(values)), cut_pos)

    @property
    def cut_pos(self) -> int:
        return next(k for k, (i, _) in enumerate(self.points) if i == self.cut)

    @property
    def retained(self):
        return self.points[self.lo:self.hi + 1]

    def retained_indices(self) -> list[int]:
        return [i for i, _ in self.retained]

    def discarded_indices(self) -> set[int]:
        keep = set(self.retained_indices())
        return {i for i, _ in self.points if i not in keep}

    def left_retained(self) -> list[int]:
        return [i for i, _ in self.points[self.lo:self.cut_pos]]

    def right_retained(self) -> list[int]:
        return [i for i, _ in self.points[self.cut_pos + 1:self.hi + 1]]

    def drop_first_left(self) -> tuple["CutSequence", int]:
        if self.lo + 1 >= self.cut_pos:
            raise WindowExhausted("no left index left to discard")
        return replace(self, lo=self.lo + 1), self.points[self.lo][0]

    def drop_last_right(self) -> tuple["CutSequence", int]:
        if self.hi - 1 <= self.cut_pos:
            raise WindowExhausted("no right index left to discard")
        return replace(self, hi=self.hi - 1), self.points[self.hi][0]

    def restrict(self, first: int, last: int) -> "CutSequence":
        """Keep retained indices ``first..last`` (both inclusive)."""
        pos = {i: k for k, (i, _) in enumerate(self.points)}
        lo, hi = pos[first], pos[last]
        if lo < self.lo or hi > self.hi:
            raise ValueError("restriction must shrink the retained window")
        return replace(self, lo=lo, hi=hi)

    def values_at(self, index: int) -> tuple:
        for i, vals in self.points:
            if i == index:
                return vals
        raise KeyError(index)

    def param_env(self) -> dict:
        return {(n, i): v for i, vals in self.points for n, v in zip(self.names, vals)}

    def env(self, index: int, y: str, b) -> dict:
        env = self.param_env()
        env.update(zip(self.names, self.values_at(index)))
        env[y] = b
        return env

    def is_truncation_of(self, other: "CutSequence") -> bool:
        return (self.names == other.names and self.points == other.points
                and self.cut == other.cut and other.lo <= self.lo and self.hi <= other.hi)

    def to_dict(self):
        def pt(p):
            return [p[0], [_dump_value(v) for v in p[1]]]

        c = self.cut_pos
        return {
            "names": list(self.names),
            "left": [pt(p) for p in self.points[:c]],
            "cut": pt(self.points[c]),
            "right": [pt(p) for p in self.points[c + 1:]],
            "retained": [self.points[self.lo][0], self.points[self.hi][0]],
        }

    @classmethod
    def from_dict(cls, d) -> "CutSequence":
        names = d.get("names", ["x"])
        cs = cls.build(names, [tuple(p) for p in d["left"]], tuple(d["cut"]),
                       [tuple(p) for p in d["right"]])
        if "retained" in d:
            cs = cs.restrict(*d["retained"])
        return cs


# --------------------------------------------------------------------------
# separations
# --------------------------------------------------------------------------

Pairs = tuple[tuple[Term, Term], ...]
ONE_FORM: Pairs = ((ONE, ONE),)


@dataclass(frozen=True)
class Separation:
    """``kind`` is ``additive`` (``u + r``), ``rational`` (``num / den``) or
    ``valuation`` (``v_p`` of the source sum equals ``v_p(u * r)``)."""

    kind: str
    cs: CutSequence
    y: str
    u: Term | None = None
    r: Term | None = None
    num: Pairs = ()
    den: Pairs = ONE_FORM
    trace: tuple = field(default=(), compare=False)

    def terms(self) -> list[Term]:
        if self.kind == "rational":
            return [t for pair in self.num + self.den for t in pair]
        return [self.u, self.r]

    def to_dict(self):
        out = {"kind": self.kind, "truncation": self.cs.to_dict()["retained"],
               "discarded": sorted(self.cs.discarded_indices()), "trace": list(self.trace)}
        if self.kind == "rational":
            out["num"] = [[render(a), render(r)] for a, r in self.num]
            out["den"] = [[render(a), render(r)] for a, r in self.den]
        else:
            out["u"] = render(self.u)
            out["r"] = render(self.r)
        return out


def _add(a: Term, b: Term) -> Term:
    if a == ZERO:
        return b
    if b == ZERO:
        return a
    return Add(a, b)


def _sub(a: Term, b: Term) -> Term:
    if b == ZERO:
        return a
    return Sub(a, b)


def _mul(a: Term, b: Term) -> Term:
    if a == ONE:
        return b
    if b == ONE:
        return a
    return Mul(a, b)


def _div(a: Term, b: Term) -> Term:
    if a == b:
        return ONE
    return a if b == ONE else _mul(a, Inv(b))


def _pi(a: Term) -> Term:
    return a if a == ONE or isinstance(a, Pi) else Pi(a)


def _shifted(base: Term, z: int) -> Term:
    """``S^z(lambda(base))`` as a term."""
    if isinstance(base, Pi):
        # the p-adic lambda, S and S^{-1} factor through pi
        base = base.arg
    if z == 0:
        return Lam(base)
    node, wrap = base, (Succ if z > 0 else Pred)
    for _ in range(abs(z)):
        node = wrap(node)
    return node


# --------------------------------------------------------------------------
# the lambda step, shared by both dialects
# --------------------------------------------------------------------------

class _Levels:
    """How a term maps to the integer line the lambda step works on."""

    unit: Term = ZERO

    def __init__(self, seq: SparseSequence, cs: CutSequence, y: str, b):
        self.seq, self.cs, self.y, self.b = seq, cs, y, b

    def value(self, t: Term, index: int):
        raise NotImplementedError

    def level(self, t: Term, index: int) -> int:
        return self.value(t, index)

    def join(self, u: Term, r: Term) -> Term:
        return _add(u, r)

    def split(self, u: Term, u0: Term) -> Term:
        return _sub(u, u0)

    def const(self, level: int) -> Term:
        return Const(level)


class _Additive(_Levels):
    def value(self, t, index):
        return eval_term_z(t, self.cs.env(index, self.y, self.b), self.seq)


class _Multiplicative(_Levels):
    unit = ONE

    def __init__(self, seq, cs, y, b, p):
        super().__init__(seq, cs, y, b)
        self.p = p

    def value(self, t, index):
        return eval_term_padic(t, self.cs.env(index, self.y, self.b), self.p, self.seq)

    def level(self, t, index):
        v = vp_frac(self.value(t, index), self.p)
        if v == math.inf:
            raise AmbiguousCase(f"{render(t)} vanishes at index {index}")
        return v

    def join(self, u, r):
        return _mul(u, r)

    def split(self, u, u0):
        return _div(u, u0)

    def const(self, level):
        return Const(Fraction(self.p) ** level)


def _matches(alg: _Levels, u: Term, r: Term, targets: dict) -> dict:
    out = {}
    for k, target in targets.items():
        try:
            out[k] = alg.level(alg.join(u, r), k) == target
        except (IndexBeyondHorizon, SeparationError, ZeroDivisionError):
            out[k] = False
    return out


def _best_block(cs: CutSequence, ok: dict):
    """Largest contiguous retained block around the cut where ``ok`` holds."""
    idx = cs.retained_indices()
    c = idx.index(cs.cut)
    if not ok[cs.cut]:
        return None
    lo = c
    while lo > 0 and ok[idx[lo - 1]]:
        lo -= 1
    hi = c
    while hi < len(idx) - 1 and ok[idx[hi + 1]]:
        hi += 1
    if lo == c or hi == c:
        return None
    return idx[lo], idx[hi]


def _candidates(alg: _Levels, u: Term, r: Term):
    yield "r-side", 0, alg.unit, _shifted(r, 0)
    yield "u-side", 0, _shifted(u, 0), alg.unit
    yield "u-side", 1, _shifted(u, 1), alg.unit
    for m in range(1, M_MAX + 1):
        for z in (m, -m):
            yield "r-side", z, alg.unit, _shifted(r, z)


def _try_candidates(alg, u, r, cs, targets, allow_truncation):
    best = None
    for side, z, cu, cr in _candidates(alg, u, r):
        ok = _matches(alg, cu, cr, targets)
        if all(ok.values()):
            return cu, cr, cs, {"form": side, "z": z}
        if allow_truncation:
            block = _best_block(cs, ok)
            if block is not None:
                size = sum(1 for k in targets if block[0] <= k <= block[1])
                if best is None or size > best[0]:
                    best = (size, cu, cr, block, {"form": side, "z": z})
    if best is None:
        return None
    _, cu, cr, block, info = best
    info["truncated_to"] = list(block)
    return cu, cr, cs.restrict(*block), info


def _monotone(values: list) -> str:
    pairs = list(zip(values, values[1:]))
    if all(a == b for a, b in pairs):
        return "constant"
    if all(a < b for a, b in pairs):
        return "increasing"
    if all(a > b for a, b in pairs):
        return "decreasing"
    raise NotMonotone(f"intermediate family is not monotone: {values[:6]}...")


def _lambda_step(alg: _Levels, u: Term, r: Term, node: str, trace: list):
    """Separate ``lambda(u + r)`` (resp. ``lambda(u * r)``); one side of the
    result is the unit."""
    cs = alg.cs
    seq = alg.seq
    r0 = seq.values[0]
    idx = cs.retained_indices()
    R = alg.level(r, cs.cut)
    U = {k: alg.level(u, k) for k in idx}
    positive = {k: U[k] + R >= r0 for k in idx}
    step = {"node": node, "m_max": M_MAX}

    if not all(positive.values()):
        if any(positive.values()):
            block = _best_block(cs, positive if positive[cs.cut] else
                                {k: not v for k, v in positive.items()})
            if block is None:
                raise WindowExhausted("sign changes next to the cut")
            cs = cs.restrict(*block)
            alg.cs = cs
            idx = cs.retained_indices()
            step["sign_truncated_to"] = list(block)
        if not positive[cs.cut]:
            step["case"] = "below-r0"
            trace.append(step)
            return alg.unit, alg.const(r0), cs

    targets = {k: lambda_z(U[k] + R, seq) for k in idx}
    found = _try_candidates(alg, u, r, cs, targets, allow_truncation=False)
    if found:
        cu, cr, cs, info = found
        step.update(case="direct", **info)
        trace.append(step)
        return cu, cr, cs

    shape = _monotone([U[k] for k in idx])
    step["case"] = shape
    if shape == "decreasing":
        cs, pivot = cs.drop_last_right()
    else:
        cs, pivot = cs.drop_first_left()
    step["discard"] = pivot
    alg.cs = cs
    u0 = at_index(u, pivot, set(cs.names))
    r2 = alg.join(u0, r)
    targets = {k: targets[k] for k in cs.retained_indices()}
    if shape == "constant":
        cu, cr = alg.unit, _shifted(r2, 0)
        if not all(_matches(alg, cu, cr, targets).values()):
            raise AmbiguousCase("constant family but lambda is not constant")
        step["form"] = "r-side"
        trace.append(step)
        return cu, cr, cs
    u2 = alg.split(u, u0)
    found = _try_candidates(alg, u2, r2, cs, targets, allow_truncation=True)
    if not found:
        raise AmbiguousCase(f"no growth class within {M_MAX} shifts fits lambda")
    cu, cr, cs, info = found
    step.update(info)
    trace.append(step)
    return cu, cr, cs


def _wrap(node_type, u: Term, r: Term, unit: Term) -> tuple[Term, Term]:
    """Apply S or S^{-1} on top of a lambda result whose other side is the unit."""
    if node_type is Lam:
        return u, r
    if u == unit:
        return u, node_type(r)
    return node_type(u), r


# --------------------------------------------------------------------------
# integer dialect
# --------------------------------------------------------------------------

def _sep_z(t: Term, cs: CutSequence, y: str, b: int, seq, trace) -> tuple[Term, Term, CutSequence]:
    if isinstance(t, Const) or isinstance(t, Param):
        return ZERO, t, cs
    if isinstance(t, Var):
        if t.name == y:
            return ZERO, t, cs
        if t.name in cs.names:
            return t, ZERO, cs
        raise SeparationError(f"free variable {t.name!r} is neither x nor y")
    if isinstance(t, (Add, Sub)):
        u1, r1, cs = _sep_z(t.left, cs, y, b, seq, trace)
        u2, r2, cs = _sep_z(t.right, cs, y, b, seq, trace)
        if isinstance(t, Add):
            return _add(u1, u2), _add(r1, r2), cs
        return _sub(u1, u2), _sub(r1, r2), cs
    if isinstance(t, (Lam, Succ, Pred)):
        u, r, cs = _sep_z(t.arg, cs, y, b, seq, trace)
        alg = _Additive(seq, cs, y, b)
        name = {Lam: "L", Succ: "S", Pred: "Sinv"}[type(t)]
        u, r, cs = _lambda_step(alg, u, r, name, trace)
        u, r = _wrap(type(t), u, r, ZERO)
        return u, r, cs
    raise SeparationError(f"{render(t)} is not a Z-dialect term")


def separate_z(t: Term, cs: CutSequence, b: int, seq: SparseSequence, y: str = "y") -> Separation:
    """Rewrite ``t(a_k, b)`` as ``u(a_k) + r(b)`` on a truncation of ``cs``."""
    trace: list = []
    u, r, out = _sep_z(t, cs, y, b, seq, trace)
    sep = Separation("additive", out, y, u=u, r=r, trace=tuple(trace))
    _ensure(t, sep, cs, b, seq)
    return sep


# --------------------------------------------------------------------------
# p-adic dialect
# --------------------------------------------------------------------------

def _pairs_mul(A: Pairs, B: Pairs) -> Pairs:
    return tuple((_mul(a1, a2), _mul(r1, r2)) for a1, r1 in A for a2, r2 in B)


def _pairs_neg(A: Pairs) -> Pairs:
    return tuple((_mul(Const(-1), a), r) for a, r in A)


def pairs_term(pairs: Pairs) -> Term:
    """``sum alpha_i * r_i`` as a single term."""
    out = None
    for a, r in pairs:
        prod = _mul(a, r)
        out = prod if out is None else Add(out, prod)
    return ZERO if out is None else out


def _pairs_values(pairs, cs, y, b, p, seq) -> dict:
    t = pairs_term(pairs)
    return {k: eval_term_padic(t, cs.env(k, y, b), p, seq) for k in cs.retained_indices()}


def _level_differences(F: dict, G: dict, idx, p) -> tuple[bool, bool, bool]:
    """Which isosceles branch holds for every pair ``k < l`` of ``idx``."""
    c1 = c2 = c3 = True
    for a, k in enumerate(idx):
        vk = vp_frac(F[k], p)
        for l in idx[a + 1:]:
            vl = vp_frac(F[l], p)
            vd = vp_frac(G[k] - G[l], p)
            c1 &= vk == vl
            c2 &= vk == vd
            c3 &= vl == vd
            if not (c1 or c2 or c3):
                return False, False, False
    return c1, c2, c3


def _strict_minimum(pairs, vals, idx, p) -> int | None:
    """Position of the product with strictly least valuation at every index."""
    winner = None
    for k in idx:
        vs = [vp_frac(vals(u, k) * vals(r, k), p) for u, r in pairs]
        low = min(vs)
        if vs.count(low) > 1:
            return None
        i = vs.index(low)
        if winner is None:
            winner = i
        elif winner != i:
            return None
    return winner


def _decompose(us, rs, cs, y, b, p, seq, trace) -> tuple[Term, Term, CutSequence]:
    pairs = list(zip(us, rs))
    vals = lambda t, k: eval_term_padic(t, cs.env(k, y, b), p, seq)  # noqa: E731
    idx = cs.retained_indices()
    kept = []
    for u, r in pairs:
        if vals(r, cs.cut) == 0:
            continue
        zeros = [vals(u, k) == 0 for k in idx]
        if all(zeros):
            continue
        if any(zeros):
            raise AmbiguousCase(f"{render(u)} vanishes at some retained indices only")
        kept.append((u, r))
    if not kept:
        raise AmbiguousCase("the sum vanishes identically")
    if len(kept) == 1:
        trace.append({"node": "v", "case": "single", "m": 1})
        return kept[0][0], kept[0][1], cs
    winner = _strict_minimum(kept, vals, idx, p)
    if winner is not None:
        trace.append({"node": "v", "case": "strict-minimum", "m": len(kept)})
        return kept[winner][0], kept[winner][1], cs

    (u_last, r_last), head = kept[-1], kept[:-1]
    ws = [_div(u, u_last) for u, _ in head]
    ss = [_div(r, r_last) for _, r in head]
    G_pairs = tuple(zip(ws, ss))
    G = _pairs_values(G_pairs, cs, y, b, p, seq)
    F = {k: g + 1 for k, g in G.items()}
    c1, c2, c3 = _level_differences(F, G, idx, p)
    step = {"node": "v", "m": len(kept)}
    if c1:
        cs, i0 = cs.drop_first_left()
        names = set(cs.names)
        r_new = _add(pairs_term(tuple((at_index(w, i0, names), s) for w, s in G_pairs)), ONE)
        step.update(case="constant", discard=i0)
        trace.append(step)
        return u_last, _mul(r_last, r_new), cs
    if c2 or c3:
        if c2:
            cs, pivot = cs.drop_last_right()
            step.update(case="left-dominated", discard=pivot)
        else:
            cs, pivot = cs.drop_first_left()
            step.update(case="right-dominated", discard=pivot)
        trace.append(step)
        names = set(cs.names)
        us2 = [_sub(w, at_index(w, pivot, names)) for w in ws]
        u, r, cs = _decompose(us2, ss, cs, y, b, p, seq, trace)
        return _mul(u_last, u), _mul(r_last, r), cs
    raise AmbiguousCase("no isosceles branch holds on the whole retained window")


def decompose_valuation(us, rs, cs: CutSequence, b, p: int,
                        seq: SparseSequence | None = None, y: str = "y") -> Separation:
    """Terms ``u, r`` with ``v_p(sum u_i(a_k) r_i(b)) = v_p(u(a_k) r(b))``."""
    if len(us) != len(rs) or not us:
        raise ValueError("need m >= 1 matching u and r terms")
    trace: list = []
    b = getattr(b, "value", b)
    u, r, out = _decompose(list(us), list(rs), cs, y, b, p, seq, trace)
    sep = Separation("valuation", out, y, u=u, r=r, trace=tuple(trace))
    _ensure(pairs_term(tuple(zip(us, rs))), sep, cs, b, seq, p)
    return sep


def _nonzero_everywhere(pairs, cs, y, b, p, seq) -> bool:
    return all(v != 0 for v in _pairs_values(pairs, cs, y, b, p, seq).values())


def _pi_form(num, den, cs, y, b, p, seq, trace):
    vals = _pairs_values(num, cs, y, b, p, seq).values()
    if all(v == 0 for v in vals):
        trace.append({"node": "pi", "case": "zero"})
        return ONE, ONE, cs
    if any(v == 0 for v in vals):
        raise AmbiguousCase("argument of pi vanishes at some retained indices only")
    uN, rN, cs = _decompose([a for a, _ in num], [r for _, r in num], cs, y, b, p, seq, trace)
    uD, rD, cs = _decompose([a for a, _ in den], [r for _, r in den], cs, y, b, p, seq, trace)
    return _div(_pi(uN), _pi(uD)), _div(_pi(rN), _pi(rD)), cs


def _sep_p(t, cs, y, b, p, seq, trace) -> tuple[Pairs, Pairs, CutSequence]:
    if isinstance(t, (Const, Param)):
        return ((ONE, t),), ONE_FORM, cs
    if isinstance(t, Var):
        if t.name == y:
            return ((ONE, t),), ONE_FORM, cs
        if t.name in cs.names:
            return ((t, ONE),), ONE_FORM, cs
        raise SeparationError(f"free variable {t.name!r} is neither x nor y")
    if isinstance(t, (Add, Sub)):
        n1, d1, cs = _sep_p(t.left, cs, y, b, p, seq, trace)
        n2, d2, cs = _sep_p(t.right, cs, y, b, p, seq, trace)
        if isinstance(t, Sub):
            n2 = _pairs_neg(n2)
        if d1 == ONE_FORM and d2 == ONE_FORM:
            return n1 + n2, ONE_FORM, cs
        return _pairs_mul(n1, d2) + _pairs_mul(n2, d1), _pairs_mul(d1, d2), cs
    if isinstance(t, Mul):
        n1, d1, cs = _sep_p(t.left, cs, y, b, p, seq, trace)
        n2, d2, cs = _sep_p(t.right, cs, y, b, p, seq, trace)
        return _pairs_mul(n1, n2), _pairs_mul(d1, d2), cs
    if isinstance(t, Inv):
        n, d, cs = _sep_p(t.arg, cs, y, b, p, seq, trace)
        if not _nonzero_everywhere(n, cs, y, b, p, seq):
            raise DivisionByZero(f"{render(t.arg)} vanishes at a retained index")
        return d, n, cs
    n, d, cs = _sep_p(t.arg, cs, y, b, p, seq, trace)
    alpha, r, cs = _pi_form(n, d, cs, y, b, p, seq, trace)
    if isinstance(t, Pi):
        return ((alpha, r),), ONE_FORM, cs
    alg = _Multiplicative(seq, cs, y, b, p)
    name = {Lam: "L", Succ: "S", Pred: "Sinv"}[type(t)]
    alpha, r, cs = _lambda_step(alg, alpha, r, name, trace)
    alpha, r = _wrap(type(t), alpha, r, ONE)
    return ((alpha, r),), ONE_FORM, cs


def separate_padic(t: Term, cs: CutSequence, b, seq: SparseSequence, p: int,
                   y: str = "y") -> Separation:
    """Rewrite ``t(a_k, b)`` as ``sum alpha_i(a_k) r_i(b) / sum beta_i(a_k) s_i(b)``."""
    trace: list = []
    b = getattr(b, "value", b)
    num, den, out = _sep_p(t, cs, y, b, p, seq, trace)
    sep = Separation("rational", out, y, num=num, den=den, trace=tuple(trace))
    _ensure(t, sep, cs, b, seq, p)
    return sep


# --------------------------------------------------------------------------
# verification
# --------------------------------------------------------------------------

def _evaluator(seq, p) -> Callable:
    if p is None:
        return lambda t, env: eval_term_z(t, env, seq)
    return lambda t, env: eval_term_padic(t, env, p, seq)


def verify_separation(t: Term, sep: Separation, cs: CutSequence, b,
                      seq: SparseSequence | None = None, p: int | None = None) -> bool:
    """Re-evaluate both sides at every retained index, including the cut.

    Also checks that the truncation is legal: it shrinks ``cs``, keeps both
    sides nonempty and every parameter comes from a discarded index.
    """
    b = getattr(b, "value", b)
    out = sep.cs
    if not out.is_truncation_of(cs):
        return False
    discarded = out.discarded_indices()
    for term in sep.terms():
        if any(i not in discarded for _, i in params(term)):
            return False
    ev = _evaluator(seq, p)
    try:
        for k in out.retained_indices():
            env = out.env(k, sep.y, b)
            lhs = ev(t, env)
            if sep.kind == "additive":
                rhs = ev(sep.u, env) + ev(sep.r, env)
            elif sep.kind == "rational":
                den = ev(pairs_term(sep.den), env)
                if den == 0:
                    return False
                rhs = Fraction(ev(pairs_term(sep.num), env)) / den
            else:
                lhs = vp_frac(lhs, p)
                rhs = vp_frac(ev(_mul(sep.u, sep.r), env), p)
            if lhs != rhs:
                return False
    except (IndexBeyondHorizon, ZeroDivisionError, SeparationError, KeyError):
        return False
    return True


def _ensure(t, sep, cs, b, seq, p=None):
    if not verify_separation(t, sep, cs, b, seq, p):
        raise AmbiguousCase("separation does not reproduce the term on the retained window")
