import json
import random
from fractions import Fraction

import pytest
from sympy import Matrix

from sparse_arith.errors import IndexBeyondHorizon, InsufficientData
from sparse_arith.poincare import (
    ExponentSetSpec,
    PoincareSeries,
    Recurrence,
    berlekamp_massey,
    check_pR_identity,
    count_residues,
    detect_recurrence,
    enumerate_residues,
    pR_identity_rhs,
    series,
)
from sparse_arith.sequences import builtin

SPECS = {
    "pZ": ExponentSetSpec.naturals(),
    "pZ0": ExponentSetSpec.naturals(with_zero=True),
    "pR": ExponentSetSpec.sparse(builtin("pow2")),
    "pRfib": ExponentSetSpec.sparse(builtin("fibonacci"), with_zero=True),
    "explicit": ExponentSetSpec.explicit([0, 3, 4, 9]),
}


def test_count_examples(pow2):
    pR = ExponentSetSpec.sparse(pow2)
    assert count_residues(pR, 3, 3) == 3
    assert count_residues(pR, 7, 0) == 1
    assert count_residues(ExponentSetSpec.naturals(), 5, 4) == 5


def test_series_examples(pow2):
    assert series(ExponentSetSpec.sparse(pow2), 3, 6).coeffs == (1, 1, 2, 3, 3, 4, 4)
    assert series(ExponentSetSpec.explicit([0]), 2, 7).coeffs == (1,) * 8
    assert series(ExponentSetSpec.naturals(), 2, 5).coeffs == (1, 2, 3, 4, 5, 6)


def test_beyond_horizon():
    short = builtin("pow2", horizon=10)
    with pytest.raises(IndexBeyondHorizon):
        series(ExponentSetSpec.sparse(short), 2, 5000)


@pytest.mark.parametrize("p", [2, 3, 5])
@pytest.mark.parametrize("name", sorted(SPECS))
def test_closed_form_matches_enumeration(name, p):
    spec = SPECS[name]
    for m in range(9 if p == 2 else 7 if p == 3 else 6):
        assert count_residues(spec, p, m) == enumerate_residues(spec, p, m)


@pytest.mark.parametrize("name", sorted(SPECS))
def test_counts_monotone(name):
    coeffs = series(SPECS[name], 3, 1000).coeffs
    assert coeffs[0] == 1
    assert all(a <= b for a, b in zip(coeffs, coeffs[1:]))


def test_random_explicit_sets_monotone():
    rng = random.Random(0)
    for _ in range(1000):
        exps = rng.sample(range(40), rng.randint(1, 8))
        c = series(ExponentSetSpec.explicit(exps, rng.random() < 0.5), 2, 45).coeffs
        assert c[0] == 1 and all(a <= b for a, b in zip(c, c[1:]))


def test_emitters(pow2):
    s = series(ExponentSetSpec.sparse(pow2), 3, 4)
    assert json.loads(s.to_json())["coeffs"] == [1, 1, 2, 3, 3]
    rows = s.to_csv().strip().splitlines()
    assert rows[0] == "m,N_m" and rows[-1] == "4,3"
    assert isinstance(s, PoincareSeries)


# -- recurrences ---------------------------------------------------------------

def test_detect_examples():
    rec = detect_recurrence(list(range(1, 41)), 5)
    assert rec.order == 2 and rec.coeffs == (2, -1)
    rec = detect_recurrence([1] * 20, 5)
    assert rec.order == 1 and rec.coeffs == (1,)


def test_detect_needs_data():
    with pytest.raises(InsufficientData):
        detect_recurrence([1, 2, 3], 1)


def test_detect_with_transient():
    # a transient of length 3 before a geometric tail
    values = [7, 0, 5] + [2 ** k for k in range(37)]
    rec = detect_recurrence(values, 5)
    assert rec is not None and rec.holds_on(values) and rec.transient <= 5
    assert rec.order == 1 and rec.coeffs == (2,)


def test_detect_soundness_random():
    rng = random.Random(4)
    for _ in range(200):
        order = rng.randint(1, 3)
        coeffs = [rng.randint(-3, 3) for _ in range(order)]
        vals = [rng.randint(-5, 5) for _ in range(order)]
        while len(vals) < 24:
            vals.append(sum(c * vals[-1 - i] for i, c in enumerate(coeffs)))
        rec = detect_recurrence(vals, 6)
        assert rec is not None and rec.order <= order
        assert rec.holds_on(vals)


def test_berlekamp_massey_fibonacci():
    fib = [1, 1]
    while len(fib) < 20:
        fib.append(fib[-1] + fib[-2])
    assert berlekamp_massey(fib) == (2, (1, 1))
    assert berlekamp_massey([2 ** k for k in range(30)], max_order=0) is None


def test_rationality_contrast():
    pZ = series(ExponentSetSpec.naturals(), 2, 511).coeffs
    rec = detect_recurrence(list(pZ), 20)
    assert rec.order == 2 and rec.coeffs == (2, -1)
    pR = series(ExponentSetSpec.sparse(builtin("pow2")), 2, 511).coeffs
    assert detect_recurrence(list(pR), 20) is None


def _hankel(values, start, width):
    rows = len(values) - start - width + 1
    return Matrix(rows, width, lambda i, j: values[start + i + j])


def test_rationality_contrast_hankel_oracle():
    # a recurrence of order <= 20 valid from index 20 on is a kernel vector of
    # the tall Hankel matrix with 21 columns; full column rank rules it out
    pR = series(ExponentSetSpec.sparse(builtin("pow2")), 2, 511).coeffs
    assert _hankel(pR, 20, 21).rank() == 21
    pZ = series(ExponentSetSpec.naturals(), 2, 511).coeffs
    assert _hankel(pZ, 20, 21).rank() == 2


def test_recurrence_to_dict():
    rec = Recurrence(2, (Fraction(2), Fraction(-1, 3)), 0)
    assert rec.to_dict() == {"order": 2, "coeffs": ["2", "-1/3"], "transient": 0}


# -- the identity (1 - T) P(T) = 1 + sum T^(2^n + 1) ---------------------------

def test_identity_examples():
    assert check_pR_identity(200)
    assert check_pR_identity(0)
    assert pR_identity_rhs(4) == [1, 0, 1, 1, 0]


def test_identity_detects_perturbation(pow2):
    s = series(ExponentSetSpec.sparse(pow2), 2, 20)
    coeffs = list(s.coeffs)
    coeffs[5] += 1
    bad = PoincareSeries(s.p, s.spec, tuple(coeffs))
    assert not check_pR_identity(20, bad)
