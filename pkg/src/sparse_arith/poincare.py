"""Poincare series of sets ``{p^e : e in E}`` and bounded-order rationality.

``N_m`` counts the residues of the set modulo ``p^m``.  The series is a
rational function iff ``N_m`` eventually satisfies a linear recurrence; the
search here finds the least such recurrence up to a given order with exact
rational Berlekamp-Massey.
"""
from __future__ import annotations

import csv
import enum
import io
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import IndexBeyondHorizon, InsufficientData
from .sequences import SparseSequence, builtin


class SetKind(enum.Enum):
    ALL_NATURALS = "AllNaturals"
    SPARSE_IMAGE = "SparseImage"
    EXPLICIT = "ExplicitList"


@dataclass(frozen=True)
class ExponentSetSpec:
    """The exponent set ``E``; the subset of Z_p is ``{p^e : e in E}``.

    ``with_zero`` adjoins the element 0.  For a sparse image only the
    nonnegative terms of the sequence are used.
    """

    kind: SetKind
    seq: SparseSequence | None = None
    exponents: tuple[int, ...] = ()
    with_zero: bool = False

    def __post_init__(self):
        if self.kind is SetKind.SPARSE_IMAGE and self.seq is None:
            raise ValueError("a sparse image needs a sequence")
        if self.kind is SetKind.EXPLICIT:
            exps = tuple(sorted(set(int(e) for e in self.exponents)))
            if not exps:
                raise ValueError("explicit exponent list is empty")
            if exps[0] < 0:
                raise ValueError("exponents must be nonnegative")
            object.__setattr__(self, "exponents", exps)

    @classmethod
    def naturals(cls, with_zero: bool = False) -> "ExponentSetSpec":
        return cls(SetKind.ALL_NATURALS, with_zero=with_zero)

    @classmethod
    def sparse(cls, seq: SparseSequence, with_zero: bool = False) -> "ExponentSetSpec":
        return cls(SetKind.SPARSE_IMAGE, seq=seq, with_zero=with_zero)

    @classmethod
    def explicit(cls, exponents, with_zero: bool = False) -> "ExponentSetSpec":
        return cls(SetKind.EXPLICIT, exponents=tuple(exponents), with_zero=with_zero)

    def below(self, m: int) -> tuple[int, bool]:
        """``|{e in E : e < m}|`` and whether some ``e >= m`` exists."""
        if self.kind is SetKind.ALL_NATURALS:
            return m, True
        if self.kind is SetKind.EXPLICIT:
            return sum(1 for e in self.exponents if e < m), self.exponents[-1] >= m
        vals = self.seq.values
        if vals[-1] < m:
            raise IndexBeyondHorizon(
                f"r_H = {vals[-1]} of {self.seq.name} does not reach exponent {m}"
            )
        return sum(1 for e in vals if 0 <= e < m), True

    def to_dict(self):
        out = {"kind": self.kind.value, "with_zero": self.with_zero}
        if self.seq is not None:
            out["seq"] = self.seq.name
        if self.kind is SetKind.EXPLICIT:
            out["exponents"] = list(self.exponents)
        return out


def count_residues(spec: ExponentSetSpec, p: int, m: int) -> int:
    """``N_m``: distinct residues of the set modulo ``p^m``.

    Powers ``p^e`` with ``e < m`` are pairwise distinct and nonzero mod
    ``p^m``; all larger powers, and 0, collapse onto the residue 0.
    """
    if m < 0:
        raise ValueError("m must be nonnegative")
    if m == 0:
        return 1
    small, large = spec.below(m)
    return small + (1 if large or spec.with_zero else 0)


def enumerate_residues(spec: ExponentSetSpec, p: int, m: int) -> int:
    """Literal count of ``{p^e mod p^m}``; an independent check of :func:`count_residues`."""
    mod = p ** m
    if spec.kind is SetKind.ALL_NATURALS:
        exps = range(m + 2)
    elif spec.kind is SetKind.EXPLICIT:
        exps = spec.exponents
    else:
        spec.below(m)
        exps = [e for e in spec.seq.values if 0 <= e <= m + 1]
        exps += [e for e in spec.seq.values if e > m + 1][:1]
    residues = {pow(p, e, mod) for e in exps}
    if spec.with_zero:
        residues.add(0)
    return len(residues)


@dataclass(frozen=True)
class PoincareSeries:
    p: int
    spec: ExponentSetSpec
    coeffs: tuple[int, ...]

    def to_dict(self):
        return {"p": self.p, "set": self.spec.to_dict(), "coeffs": list(self.coeffs)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["m", "N_m"])
        writer.writerows(enumerate(self.coeffs))
        return buf.getvalue()


def series(spec: ExponentSetSpec, p: int, M: int) -> PoincareSeries:
    """Coefficients ``N_0 .. N_M``."""
    return PoincareSeries(p, spec, tuple(count_residues(spec, p, m) for m in range(M + 1)))


# --------------------------------------------------------------------------
# recurrence detection
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Recurrence:
    """``c_n = sum_j coeffs[j-1] * c_{n-j}`` for every ``n >= transient + order``."""

    order: int
    coeffs: tuple[Fraction, ...]
    transient: int

    def holds_on(self, values: Sequence) -> bool:
        L, t = self.order, self.transient
        return all(
            values[n] == sum(a * values[n - j] for j, a in enumerate(self.coeffs, 1))
            for n in range(t + L, len(values))
        )

    def to_dict(self):
        def fmt(c):
            return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"

        return {"order": self.order, "coeffs": [fmt(c) for c in self.coeffs],
                "transient": self.transient}


def berlekamp_massey(values: Sequence, max_order: int | None = None):
    """Shortest linear recurrence generating ``values`` over Q.

    Returns ``(L, coeffs)`` with ``values[n] = sum coeffs[j-1] values[n-j]``,
    or ``None`` as soon as ``L`` exceeds ``max_order``.
    """
    s = [Fraction(v) for v in values]
    C, B = [Fraction(1)], [Fraction(1)]
    L, shift, last = 0, 1, Fraction(1)
    for n in range(len(s)):
        d = s[n] + sum(C[i] * s[n - i] for i in range(1, min(L, len(C) - 1) + 1))
        if d == 0:
            shift += 1
            continue
        coef = d / last
        T = C[:]
        C = C + [Fraction(0)] * max(0, len(B) + shift - len(C))
        for i, bi in enumerate(B):
            C[i + shift] -= coef * bi
        if 2 * L <= n:
            L, B, last, shift = n + 1 - L, T, d, 1
            if max_order is not None and L > max_order:
                return None
        else:
            shift += 1
    C = C + [Fraction(0)] * (L + 1 - len(C))
    return L, tuple(-c for c in C[1:L + 1])


def detect_recurrence(coeffs: Sequence[int], K: int) -> Recurrence | None:
    """Least-order recurrence of order ``<= K`` after a transient of length ``<= K``."""
    if K < 1:
        raise ValueError("K must be positive")
    if len(coeffs) < 4 * K:
        raise InsufficientData(f"need at least {4 * K} coefficients, got {len(coeffs)}")
    best = None
    for t in range(K + 1):
        found = berlekamp_massey(coeffs[t:], max_order=K if best is None else best.order - 1)
        if found is None:
            continue
        L, cs = found
        if best is None or L < best.order:
            best = Recurrence(L, cs, t)
        if L == 0:
            break
    if best is not None and not best.holds_on(list(coeffs)):  # pragma: no cover
        raise AssertionError("Berlekamp-Massey returned a recurrence that does not fit")
    return best


def pR_identity_rhs(M: int) -> list[int]:
    """Coefficients of ``1 + sum_n T^{2^n + 1}`` up to degree ``M``."""
    out = [0] * (M + 1)
    out[0] = 1
    k = 1
    while k + 1 <= M:
        out[k + 1] += 1
        k *= 2
    return out


def check_pR_identity(M: int, series_: PoincareSeries | None = None, p: int = 2) -> bool:
    """``(1 - T) P(T) = 1 + sum_n T^{2^n+1}`` up to degree ``M`` for ``R = 2^n``."""
    if series_ is None:
        series_ = series(ExponentSetSpec.sparse(builtin("pow2")), p, M)
    N = list(series_.coeffs)
    if len(N) < M + 1:
        raise IndexBeyondHorizon(f"series has only {len(N)} coefficients")
    lhs = [N[k] - (N[k - 1] if k else 0) for k in range(M + 1)]
    return lhs == pR_identity_rhs(M)
