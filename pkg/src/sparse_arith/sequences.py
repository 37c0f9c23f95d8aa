"""Sparse sequences, shift operators and eventual-order certificates.

Every "eventually" statement is certified on a finite sample window
``[stability_index, horizon]`` of the sequence.  A verdict is issued when
the sign of a comparison is constant on a tail of the window that ends at
the horizon and covers at least half of it; ``witness_from`` records where
that tail starts.
"""
from __future__ import annotations

import ast
import bisect
import enum
import itertools
import json
import math
import re
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np

from .errors import (
    IndexBeyondHorizon,
    NegativeIndexUnderflow,
    NotBoundedInRange,
    NotStrictlyIncreasing,
    PreconditionViolated,
    WindowTooSmall,
)

DEFAULT_HORIZON = 64
DEFAULT_STABILITY_INDEX = 8
MIN_SAMPLES = 8
SEARCH_COEFF_BOUND = 16


# --------------------------------------------------------------------------
# Operators
# --------------------------------------------------------------------------

class Operator:
    """A finite integer combination ``sum z_i S^i`` of shift powers.

    Zero coefficients are dropped on construction, so two operators are
    equal exactly when their coefficient maps agree.
    """

    __slots__ = ("_coeffs",)

    def __init__(self, coeffs: Mapping[int, int] | Iterable[tuple[int, int]] = ()):
        acc: dict[int, int] = {}
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        for i, z in items:
            if int(z) != z or int(i) != i:
                raise ValueError("operator indices and coefficients must be integers")
            acc[int(i)] = acc.get(int(i), 0) + int(z)
        self._coeffs = tuple(sorted((i, z) for i, z in acc.items() if z))

    @classmethod
    def shift(cls, i: int, z: int = 1) -> "Operator":
        return cls({i: z})

    @classmethod
    def identity(cls) -> "Operator":
        return cls({0: 1})

    @classmethod
    def zero(cls) -> "Operator":
        return cls()

    @classmethod
    def from_pairs(cls, pairs) -> "Operator":
        return cls([(int(i), int(z)) for i, z in pairs])

    @classmethod
    def parse(cls, text: str) -> "Operator":
        return parse_operator(text)

    # -- inspection --------------------------------------------------------
    def items(self):
        return self._coeffs

    def coefficient(self, i: int) -> int:
        for j, z in self._coeffs:
            if j == i:
                return z
        return 0

    def is_zero(self) -> bool:
        return not self._coeffs

    def __bool__(self):
        return bool(self._coeffs)

    @property
    def support(self) -> tuple[int, int] | None:
        if not self._coeffs:
            return None
        return self._coeffs[0][0], self._coeffs[-1][0]

    @property
    def reach(self) -> int:
        s = self.support
        return 0 if s is None else max(abs(s[0]), abs(s[1]))

    def to_pairs(self) -> list[list[int]]:
        return [[i, z] for i, z in self._coeffs]

    # -- algebra -----------------------------------------------------------
    def __add__(self, other: "Operator") -> "Operator":
        return Operator(list(self._coeffs) + list(other._coeffs))

    def __sub__(self, other: "Operator") -> "Operator":
        return self + (-other)

    def __neg__(self) -> "Operator":
        return Operator([(i, -z) for i, z in self._coeffs])

    def __mul__(self, k: int) -> "Operator":
        return Operator([(i, k * z) for i, z in self._coeffs])

    __rmul__ = __mul__

    def compose_shift(self, z: int) -> "Operator":
        """Return ``A o S^z``, i.e. every index moved up by ``z``."""
        return Operator([(i + z, c) for i, c in self._coeffs])

    def positive_part(self) -> "Operator":
        return Operator([(i, z) for i, z in self._coeffs if z > 0])

    def negative_part(self) -> "Operator":
        return Operator([(i, -z) for i, z in self._coeffs if z < 0])

    # -- dunder ------------------------------------------------------------
    def __eq__(self, other):
        return isinstance(other, Operator) and self._coeffs == other._coeffs

    def __hash__(self):
        return hash(self._coeffs)

    def __str__(self):
        if not self._coeffs:
            return "0"
        out = []
        for i, z in reversed(self._coeffs):
            mag = abs(z)
            body = f"S^{i}" if mag == 1 else f"{mag}*S^{i}"
            if not out:
                out.append(body if z > 0 else "-" + body)
            else:
                out.append(("+ " if z > 0 else "- ") + body)
        return " ".join(out)

    def __repr__(self):
        return f"Operator({str(self)!r})"


_OP_TOKEN = re.compile(r"\s*(?:(\d+)\s*\*?\s*)?(S(?:\s*\^\s*(\(\s*-?\d+\s*\)|-?\d+))?|id)?")


def parse_operator(text: str) -> Operator:
    """Parse ``"S^2 - S^1 - S^0"``-style operator literals.

    A bare integer ``k`` stands for ``k*S^0``; ``S`` alone is ``S^1``.
    """
    s = text.strip()
    if not s:
        raise ValueError("empty operator literal")
    pos = 0
    coeffs: dict[int, int] = {}
    first = True
    while pos < len(s):
        while pos < len(s) and s[pos].isspace():
            pos += 1
        sign = 1
        if pos < len(s) and s[pos] in "+-":
            sign = -1 if s[pos] == "-" else 1
            pos += 1
        elif not first:
            raise ValueError(f"expected '+' or '-' at offset {pos} in {text!r}")
        m = _OP_TOKEN.match(s, pos)
        num, shift_tok, exp = m.group(1), m.group(2), m.group(3)
        if num is None and shift_tok is None:
            raise ValueError(f"expected operator term at offset {pos} in {text!r}")
        k = int(num) if num is not None else 1
        if shift_tok is None or shift_tok == "id":
            idx = 0
        else:
            idx = int(exp.strip("() ").replace(" ", "")) if exp else 1
        coeffs[idx] = coeffs.get(idx, 0) + sign * k
        pos = m.end()
        first = False
    return Operator(coeffs)


# --------------------------------------------------------------------------
# Sequences
# --------------------------------------------------------------------------

_FORMULA_FUNCS = {"factorial": math.factorial, "comb": math.comb}
_FORMULA_NODES = (
    ast.Expression, ast.BinOp, ast.UnaryOp, ast.Constant, ast.Name, ast.Load,
    ast.Call, ast.Add, ast.Sub, ast.Mult, ast.Pow, ast.FloorDiv, ast.Mod,
    ast.USub, ast.UAdd,
)


def _compile_formula(text: str):
    tree = ast.parse(text, mode="eval")
    for node in ast.walk(tree):
        if not isinstance(node, _FORMULA_NODES):
            raise ValueError(f"unsupported construct in formula {text!r}: {type(node).__name__}")
        if isinstance(node, ast.Constant) and not isinstance(node.value, int):
            raise ValueError(f"only integer literals allowed in formula {text!r}")
        if isinstance(node, ast.Name) and node.id != "n" and node.id not in _FORMULA_FUNCS:
            raise ValueError(f"unknown name {node.id!r} in formula {text!r}")
        if isinstance(node, ast.Call) and not (
            isinstance(node.func, ast.Name) and node.func.id in _FORMULA_FUNCS
        ):
            raise ValueError(f"unsupported call in formula {text!r}")
    code = compile(tree, "<formula>", "eval")

    def rule(n: int) -> int:
        return int(eval(code, {"__builtins__": {}}, {"n": n, **_FORMULA_FUNCS}))

    return rule


def _freeze(obj):
    if isinstance(obj, dict):
        return tuple(sorted((k, _freeze(v)) for k, v in obj.items()))
    if isinstance(obj, (list, tuple)):
        return tuple(_freeze(v) for v in obj)
    return obj


@dataclass(frozen=True)
class SparseSequence:
    """A strictly increasing integer sequence known exactly on ``[0, horizon]``.

    ``kind`` is one of ``"closed_form"`` (params ``{"formula": "2**n"}``),
    ``"recurrence"`` (params ``{"coeffs": [c1, ..., cd], "initial": [...]}``,
    meaning ``r_n = c1*r_{n-1} + ... + cd*r_{n-d}``) or ``"table"``
    (params ``{"values": [...]}``).
    """

    name: str
    kind: str
    params: dict = field(compare=False, hash=False)
    horizon: int = DEFAULT_HORIZON
    stability_index: int = DEFAULT_STABILITY_INDEX
    theta: dict | None = field(default=None, compare=False, hash=False)
    values: tuple = field(init=False, repr=False, compare=False, hash=False)
    _key: tuple = field(init=False, repr=False)

    def __post_init__(self):
        if self.horizon < 0 or self.stability_index < 0:
            raise ValueError("horizon and stability_index must be nonnegative")
        values = tuple(self._generate())
        for n in range(len(values) - 1):
            if values[n + 1] <= values[n]:
                raise NotStrictlyIncreasing(
                    f"{self.name}: r_{n + 1} = {values[n + 1]} <= r_{n} = {values[n]}"
                )
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "_key", (self.kind, _freeze(self.params)))

    def _generate(self):
        H = self.horizon
        if self.kind == "closed_form":
            rule = _compile_formula(self.params["formula"])
            return [rule(n) for n in range(H + 1)]
        if self.kind == "recurrence":
            coeffs = [int(c) for c in self.params["coeffs"]]
            vals = [int(v) for v in self.params["initial"]]
            if len(vals) < len(coeffs):
                raise ValueError(f"{self.name}: need {len(coeffs)} initial terms")
            while len(vals) <= H:
                vals.append(sum(c * vals[-1 - j] for j, c in enumerate(coeffs)))
            return vals[: H + 1]
        if self.kind == "table":
            vals = [int(v) for v in self.params["values"]]
            if len(vals) <= H:
                raise ValueError(f"{self.name}: table has {len(vals)} values, horizon {H}")
            return vals[: H + 1]
        raise ValueError(f"unknown sequence kind {self.kind!r}")

    # -- access ------------------------------------------------------------
    def term(self, n: int) -> int:
        return seq_term(self, n)

    def index_of_floor(self, x: int) -> int:
        """Largest index n with ``r_n <= x`` (``x`` must lie in ``[r_0, r_H]``)."""
        return bisect.bisect_right(self.values, x) - 1

    def __contains__(self, x) -> bool:
        i = bisect.bisect_left(self.values, x)
        return i < len(self.values) and self.values[i] == x

    def with_window(self, horizon: int | None = None,
                    stability_index: int | None = None) -> "SparseSequence":
        kw = {}
        if horizon is not None:
            kw["horizon"] = horizon
        if stability_index is not None:
            kw["stability_index"] = stability_index
        return replace(self, **kw)

    def recurrence_operator(self) -> Operator | None:
        """Vanishing operator supplied by the generator metadata, if any."""
        if self.kind == "recurrence":
            c = [int(x) for x in self.params["coeffs"]]
            d = len(c)
            return Operator({d: 1, **{d - 1 - j: -cj for j, cj in enumerate(c)}})
        if self.theta and self.theta.get("kind") == "algebraic":
            mp = [int(x) for x in self.theta["minpoly"]]
            return Operator({i: a for i, a in enumerate(mp)})
        if self.theta and self.theta.get("kind") == "rational":
            q = Fraction(self.theta["value"])
            return Operator({1: q.denominator, 0: -q.numerator})
        return None

    def to_record(self) -> dict:
        rec = {
            "name": self.name,
            "kind": self.kind,
            "params": self.params,
            "horizon": self.horizon,
            "stability_index": self.stability_index,
        }
        if self.theta is not None:
            rec["theta"] = self.theta
        return rec

    @classmethod
    def from_record(cls, rec: Mapping) -> "SparseSequence":
        return cls(
            name=rec["name"],
            kind=rec["kind"],
            params=dict(rec.get("params", {})),
            horizon=int(rec.get("horizon", DEFAULT_HORIZON)),
            stability_index=int(rec.get("stability_index", DEFAULT_STABILITY_INDEX)),
            theta=rec.get("theta"),
        )


BUILTIN_RECORDS = [
    {"name": "pow2", "kind": "closed_form", "params": {"formula": "2**n"},
     "theta": {"kind": "rational", "value": "2"}},
    {"name": "pow3", "kind": "closed_form", "params": {"formula": "3**n"},
     "theta": {"kind": "rational", "value": "3"}},
    {"name": "fibonacci", "kind": "recurrence",
     "params": {"coeffs": [1, 1], "initial": [1, 2]},
     "theta": {"kind": "algebraic", "minpoly": [-1, -1, 1]}},
    {"name": "factorials", "kind": "closed_form", "params": {"formula": "factorial(n + 1)"},
     "theta": {"kind": "infinite"}},
    {"name": "identity", "kind": "closed_form", "params": {"formula": "n"},
     "theta": {"kind": "rational", "value": "1"}},
    {"name": "pow2_plus_n", "kind": "closed_form", "params": {"formula": "2**n + n"},
     "theta": {"kind": "rational", "value": "2"}},
]
ALIASES = {"fib": "fibonacci", "fact": "factorials", "factorial": "factorials", "id": "identity"}


def load_registry(path=None) -> dict[str, SparseSequence]:
    """Built-in sequences, overridden/extended by the records in ``path``."""
    records = {r["name"]: r for r in BUILTIN_RECORDS}
    if path is not None:
        with open(path) as fh:
            for rec in json.load(fh):
                records[rec["name"]] = rec
    return {name: SparseSequence.from_record(rec) for name, rec in records.items()}


_BUILTINS: dict[str, SparseSequence] = {}


def builtin(name: str, horizon: int | None = None,
            stability_index: int | None = None) -> SparseSequence:
    name = ALIASES.get(name, name)
    if name not in _BUILTINS:
        _BUILTINS.update(load_registry())
    seq = _BUILTINS[name]
    if horizon is not None or stability_index is not None:
        seq = seq.with_window(horizon, stability_index)
    return seq


# --------------------------------------------------------------------------
# Evaluation and eventual order
# --------------------------------------------------------------------------

def seq_term(seq: SparseSequence, n: int) -> int:
    if n < 0:
        raise NegativeIndexUnderflow(f"index {n} < 0")
    if n > seq.horizon:
        raise IndexBeyondHorizon(f"{seq.name}: index {n} beyond horizon {seq.horizon}")
    return seq.values[n]


def op_eval(A: Operator, seq: SparseSequence, n: int) -> int:
    """``sum z_i r_{n+i}``."""
    total = 0
    for i, z in A.items():
        if n + i < 0:
            raise NegativeIndexUnderflow(f"index {n}+({i}) < 0")
        total += z * seq_term(seq, n + i)
    return total


class Order(enum.Enum):
    GT = "GT"
    LT = "LT"
    EQ = "EQ"
    UNKNOWN = "UNKNOWN"

    def flip(self) -> "Order":
        return {Order.GT: Order.LT, Order.LT: Order.GT}.get(self, self)


_SIGN_TO_ORDER = {1: Order.GT, -1: Order.LT, 0: Order.EQ}


@dataclass(frozen=True)
class EventualOrder:
    verdict: Order
    witness_from: int | None
    window: tuple[int, int]

    def to_dict(self):
        return {"verdict": self.verdict.value, "witness_from": self.witness_from,
                "window": list(self.window)}


def sample_window(seq: SparseSequence, ops: Iterable[Operator],
                  min_samples: int = MIN_SAMPLES) -> tuple[int, int]:
    """Indices n in ``[N0, H]`` at which every operator in ``ops`` is evaluable."""
    lo, hi = 0, 0
    for op in ops:
        s = op.support
        if s is not None:
            lo, hi = min(lo, s[0]), max(hi, s[1])
    first = max(seq.stability_index, -lo)
    last = seq.horizon - hi
    if last - first + 1 < min_samples:
        raise WindowTooSmall(
            f"{seq.name}: only {max(0, last - first + 1)} samples in [{first}, {last}], "
            f"need {min_samples}"
        )
    return first, last


def tail_verdict(signs, first: int) -> EventualOrder:
    """Verdict from a list of signs sampled at ``first, first+1, ...``."""
    total = len(signs)
    final = signs[-1]
    start = total - 1
    while start > 0 and signs[start - 1] == final:
        start -= 1
    window = (first, first + total - 1)
    if 2 * (total - start) < total:
        return EventualOrder(Order.UNKNOWN, None, window)
    return EventualOrder(_SIGN_TO_ORDER[final], first + start, window)


def _sign(x) -> int:
    return (x > 0) - (x < 0)


def op_compare_ae(A: Operator, B: Operator, seq: SparseSequence,
                  min_samples: int = MIN_SAMPLES,
                  window: tuple[int, int] | None = None) -> EventualOrder:
    """Decide ``A >_ae B`` / ``<_ae`` / ``=_ae`` on the sample window."""
    if window is None:
        first, last = sample_window(seq, (A, B), min_samples)
    else:
        first, last = window
        if last - first + 1 < min_samples:
            raise WindowTooSmall(f"window {window} has fewer than {min_samples} samples")
    C = A - B
    signs = [_sign(op_eval(C, seq, n)) for n in range(first, last + 1)]
    return tail_verdict(signs, first)


def delta_witness(A: Operator, B: Operator, seq: SparseSequence,
                  delta_max: int = 32) -> int | None:
    """Least ``Delta`` with ``A(S^Delta x) >_ae B(S^Delta x) + x``, or None."""
    base = op_compare_ae(A, B, seq)
    if base.verdict is not Order.GT:
        raise PreconditionViolated(f"A >_ae B fails on window (verdict {base.verdict.value})")
    ident = Operator.identity()
    for delta in range(delta_max + 1):
        lhs, rhs = A.compose_shift(delta), B.compose_shift(delta) + ident
        try:
            verdict = op_compare_ae(lhs, rhs, seq).verdict
        except WindowTooSmall:
            return None
        if verdict is Order.GT:
            return delta
    return None


class BoundKind(enum.Enum):
    EXACT = "Exact"
    STRICT_BETWEEN = "StrictBetween"


@dataclass(frozen=True)
class Bound:
    m: int
    kind: BoundKind

    def to_dict(self):
        return {"m": self.m, "kind": self.kind.value}


def op_bound(A: Operator, seq: SparseSequence,
             m_range: tuple[int, int] = (-16, 16)) -> Bound:
    """Locate a positive operator between consecutive shifts ``S^m`` and ``S^{m+1}``."""
    sign = op_compare_ae(A, Operator.zero(), seq).verdict
    if sign is not Order.GT:
        raise PreconditionViolated(f"operator {A} is not >_ae 0 (verdict {sign.value})")
    lo, hi = m_range
    for m in range(lo, hi + 1):
        try:
            below = op_compare_ae(A, Operator.shift(m), seq).verdict
            if below is Order.EQ:
                return Bound(m, BoundKind.EXACT)
            if below is Order.GT and \
                    op_compare_ae(A, Operator.shift(m + 1), seq).verdict is Order.LT:
                return Bound(m, BoundKind.STRICT_BETWEEN)
        except WindowTooSmall:
            continue
    raise NotBoundedInRange(f"no m in [{lo}, {hi}] bounds {A} on {seq.name}")


# --------------------------------------------------------------------------
# Degree and shift basis
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Degree:
    d: int | None
    certificate: Operator | None
    searched_orders: int
    source: str

    @property
    def found(self) -> bool:
        return self.d is not None

    def to_dict(self):
        return {
            "d": self.d,
            "certificate": None if self.certificate is None else self.certificate.to_pairs(),
            "searched_orders": self.searched_orders,
            "source": self.source,
        }


def _primitive(vec) -> list[int]:
    den = 1
    for q in vec:
        den = den * q.denominator // math.gcd(den, q.denominator)
    ints = [int(q * den) for q in vec]
    g = 0
    for z in ints:
        g = math.gcd(g, z)
    ints = [z // g for z in ints]
    last = next(z for z in reversed(ints) if z)
    return [-z for z in ints] if last < 0 else ints


def _kernel(rows):
    from sympy import QQ
    from sympy.polys.matrices import DomainMatrix

    dm = DomainMatrix([[QQ(v) for v in row] for row in rows], (len(rows), len(rows[0])), QQ)
    basis = dm.nullspace().to_Matrix().tolist()
    return [[Fraction(int(q.p), int(q.q)) for q in vec] for vec in basis]


def _vanishes(A: Operator, seq: SparseSequence) -> bool:
    first, last = sample_window(seq, [A])
    return all(op_eval(A, seq, n) == 0 for n in range(first, last + 1))


def degree(seq: SparseSequence, d_max: int = 4) -> Degree:
    """Order of the minimal vanishing operator ``sum_{i=0}^d z_i S^i`` on the window.

    Metadata (recurrence coefficients or the minimal polynomial of the growth
    ratio) is preferred as the certificate; otherwise the exact rational
    kernel of the sampled window matrix is searched order by order.
    """
    if d_max < 1:
        raise ValueError("d_max must be >= 1")
    first = seq.stability_index
    if seq.horizon - d_max - first + 1 < max(MIN_SAMPLES, 2 * (d_max + 1)):
        raise WindowTooSmall(f"{seq.name}: window too short for orders up to {d_max}")
    meta = seq.recurrence_operator()
    for d in range(1, d_max + 1):
        rows = [list(seq.values[n: n + d + 1]) for n in range(first, seq.horizon - d + 1)]
        kernel = _kernel(rows)
        if not kernel:
            continue
        if meta is not None and meta.support == (0, d) and _vanishes(meta, seq):
            return Degree(d, meta, d, "metadata")
        best = min((_primitive(v) for v in kernel), key=lambda v: max(map(abs, v)))
        cert = Operator({i: z for i, z in enumerate(best)})
        if cert.support != (0, d) or not _vanishes(cert, seq):
            continue
        return Degree(d, cert, d, "kernel search")
    return Degree(None, None, d_max, "kernel search")


@dataclass(frozen=True)
class ShiftBasis:
    m: int
    w: tuple[int, ...]

    def to_dict(self):
        return {"m": self.m, "w": list(self.w)}


def _polymod(poly: list[Fraction], mod: list[int]) -> list[Fraction]:
    poly = list(poly)
    d = len(mod) - 1
    lead = mod[-1]
    for k in range(len(poly) - 1, d - 1, -1):
        c = poly[k]
        if c:
            q = c / lead
            for j in range(d + 1):
                poly[k - d + j] -= q * mod[j]
    poly = poly[:d] + [Fraction(0)] * max(0, d - len(poly))
    return poly


def _polymul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def shift_basis(seq: SparseSequence, z: int, d: int, reach: int = 64) -> ShiftBasis:
    """Find ``m >= 1`` and ``w`` with ``m S^z =_ae sum_{i<d} w_i S^i``."""
    if abs(z) > reach:
        raise PreconditionViolated(f"|z| = {abs(z)} exceeds reach {reach}")
    deg = degree(seq, d_max=d)
    if deg.d != d:
        raise PreconditionViolated(f"{seq.name} has no degree-{d} certificate (found {deg.d})")
    mod = [deg.certificate.coefficient(i) for i in range(d + 1)]
    if z >= 0:
        base = _polymod([Fraction(0), Fraction(1)], mod)
    else:
        # x^{-1} = -(a_1 + a_2 x + ... + a_d x^{d-1}) / a_0
        base = [Fraction(-mod[j + 1], mod[0]) for j in range(d)]
    result = _polymod([Fraction(1)], mod)
    for _ in range(abs(z)):
        result = _polymod(_polymul(result, base), mod)
    den = 1
    for q in result:
        den = den * q.denominator // math.gcd(den, q.denominator)
    w = tuple(int(q * den) for q in result)
    A = Operator({i: wi for i, wi in enumerate(w)}) - Operator.shift(z, den)
    if not _vanishes(A, seq):
        raise PreconditionViolated(f"shift identity for z={z} fails on the window of {seq.name}")
    return ShiftBasis(den, w)


# --------------------------------------------------------------------------
# Almost-sparseness over an operator pool
# --------------------------------------------------------------------------

_EPS = 2.0 ** -52


def batch_signs(coeffs: np.ndarray, lo: int, seq: SparseSequence,
                first: int, last: int) -> np.ndarray:
    """Exact signs of ``sum_j coeffs[r, j] * r_{n + lo + j}`` for n in ``[first, last]``.

    Floating point evaluation on per-sample normalised values decides every
    entry whose magnitude clears a rigorous rounding bound; the rest are
    recomputed with integers.
    """
    width = coeffs.shape[1]
    ns = range(first, last + 1)
    exact = [[seq.values[n + lo + j] for n in ns] for j in range(width)]
    scaled = np.empty((width, len(ns)))
    for s, n in enumerate(ns):
        top = max(abs(exact[j][s]) for j in range(width)) or 1
        for j in range(width):
            scaled[j, s] = exact[j][s] / top
    cf = coeffs.astype(float)
    approx = cf @ scaled
    bound = (np.abs(cf) @ np.abs(scaled)) * ((2 * width + 4) * _EPS) \
        + np.abs(cf).sum(axis=1, keepdims=True) * 1e-300
    signs = np.sign(approx).astype(np.int8)
    unsure = np.nonzero(np.abs(approx) <= bound)
    for r, s in zip(*unsure):
        row = coeffs[r]
        val = sum(int(row[j]) * exact[j][s] for j in range(width) if row[j])
        signs[r, s] = _sign(val)
    return signs


def batch_tail(signs: np.ndarray):
    """Vectorised :func:`tail_verdict`: returns (final sign, tail start, decided)."""
    total = signs.shape[1]
    final = signs[:, -1]
    mismatch = signs != final[:, None]
    any_mis = mismatch.any(axis=1)
    last_mis = np.where(any_mis, total - 1 - np.argmax(mismatch[:, ::-1], axis=1), -1)
    start = last_mis + 1
    decided = 2 * (total - start) >= total
    return final, start, decided


@dataclass
class AlmostSparseReport:
    sequence: str
    verdict: str
    reach: int
    coeff_bound: int
    differences_checked: int
    counts: dict
    max_delta: int | None
    first_failure: dict | None = None

    def to_dict(self):
        return {
            "sequence": self.sequence,
            "verdict": self.verdict,
            "reach": self.reach,
            "coeff_bound": self.coeff_bound,
            "differences_checked": self.differences_checked,
            "counts": self.counts,
            "max_delta": self.max_delta,
            "first_failure": self.first_failure,
        }


def difference_pool(reach: int, coeff_bound: int) -> np.ndarray:
    """Every ``C = A - B`` for A, B with support in ``[-reach, reach]`` and
    ``|coeff| <= coeff_bound``, one of each ``{C, -C}``, smallest L1 norm first.
    """
    width = 2 * reach + 1
    span = np.arange(-2 * coeff_bound, 2 * coeff_bound + 1, dtype=np.int64)
    grid = np.array(list(itertools.product(span, repeat=width)), dtype=np.int64)
    nz = grid != 0
    first_nz = np.argmax(nz, axis=1)
    keep = nz.any(axis=1) & (grid[np.arange(len(grid)), first_nz] > 0)
    grid = grid[keep]
    order = np.argsort(np.abs(grid).sum(axis=1), kind="stable")
    return grid[order]


def _split(row, lo) -> tuple[Operator, Operator]:
    C = Operator({lo + j: int(z) for j, z in enumerate(row)})
    return C.positive_part(), C.negative_part()


def verify_almost_sparse(seq: SparseSequence, reach: int = 2, coeff_bound: int = 4,
                         delta_max: int = 32, chunk: int = 40000) -> AlmostSparseReport:
    """Check both almost-sparseness conditions for every operator pair in the pool.

    Pairs are reduced to their differences ``C = A - B`` (both conditions
    depend on nothing else), and ``C`` / ``-C`` are handled together.  All
    comparisons share the window ``[max(N0, reach), H - reach]``.
    """
    pool = difference_pool(reach, coeff_bound)
    first = max(seq.stability_index, reach)
    last = seq.horizon - reach
    if last - first + 1 < MIN_SAMPLES:
        raise WindowTooSmall(f"{seq.name}: window too short for reach {reach}")
    counts = {"GT": 0, "LT": 0, "EQ": 0, "UNKNOWN": 0, "delta_found": 0, "delta_missing": 0}
    max_delta = None
    first_unknown = first_missing = None
    for base in range(0, len(pool), chunk):
        rows = pool[base: base + chunk]
        final, _, decided = batch_tail(batch_signs(rows, -reach, seq, first, last))
        counts["UNKNOWN"] += int((~decided).sum())
        counts["EQ"] += int((decided & (final == 0)).sum())
        counts["GT"] += int((decided & (final > 0)).sum())
        counts["LT"] += int((decided & (final < 0)).sum())
        if first_unknown is None and (~decided).any():
            first_unknown = base + int(np.argmax(~decided))
        # Condition 2 on the positive member of each {C, -C}
        pos_idx = np.nonzero(decided & (final != 0))[0]
        positive = rows[pos_idx] * final[pos_idx, None].astype(np.int64)
        pending = np.arange(len(positive))
        found = np.full(len(positive), -1)
        for delta in range(delta_max + 1):
            if not len(pending):
                break
            hi = last - delta
            if hi - first + 1 < MIN_SAMPLES:
                break
            width = 2 * reach + 1 + delta
            aug = np.zeros((len(pending), width), dtype=np.int64)
            aug[:, delta: delta + 2 * reach + 1] = positive[pending]
            aug[:, reach] -= 1
            f2, _, d2 = batch_tail(batch_signs(aug, -reach, seq, first, hi))
            ok = d2 & (f2 > 0)
            found[pending[ok]] = delta
            pending = pending[~ok]
        counts["delta_found"] += int((found >= 0).sum())
        counts["delta_missing"] += int((found < 0).sum())
        if (found >= 0).any():
            m = int(found.max())
            max_delta = m if max_delta is None else max(max_delta, m)
        if first_missing is None and (found < 0).any():
            k = int(np.argmax(found < 0))
            first_missing = (positive[k], base + int(pos_idx[k]))
    failure = None
    if first_missing is not None:
        A, B = _split(first_missing[0], -reach)
        verdict = "FAIL"
        failure = {"A": A.to_pairs(), "B": B.to_pairs(), "A_text": str(A), "B_text": str(B),
                   "reason": f"A >_ae B but no Delta <= {delta_max} with "
                             "A(S^Delta x) >_ae B(S^Delta x) + x"}
    elif first_unknown is not None:
        A, B = _split(pool[first_unknown], -reach)
        verdict = "INCONCLUSIVE"
        failure = {"A": A.to_pairs(), "B": B.to_pairs(), "A_text": str(A), "B_text": str(B),
                   "reason": "comparison sign does not stabilise on the window"}
    else:
        verdict = "PASS"
    return AlmostSparseReport(seq.name, verdict, reach, coeff_bound, len(pool),
                              counts, max_delta, failure)
