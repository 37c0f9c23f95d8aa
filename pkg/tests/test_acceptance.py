"""Acceptance gate: one test per criterion, each recording a PASS/FAIL line
that is printed in the terminal summary."""
import random
import time
from fractions import Fraction

import pytest
from sympy.ntheory.residue_ntheory import is_nthpow_residue

from sparse_arith.dominant import instantiate, poly_pi, poly_pn_class, poly_vp
from sparse_arith.errors import SeparationError, SparseArithError
from sparse_arith.nonstandard import (
    ExtElement,
    Sign,
    ext_in_R,
    ext_lambda,
    ext_sign,
)
from sparse_arith.padic import PadicNumber, pi, pn_class, pn_cosets, vp, vp_int
from sparse_arith.poincare import (
    ExponentSetSpec,
    check_pR_identity,
    detect_recurrence,
    series,
)
from sparse_arith.sequences import builtin, verify_almost_sparse
from sparse_arith.terms import params
from sparse_arith.varsep import separate_padic, separate_z, verify_separation
from sparse_arith.zline import lambda_z, succ_z

from conftest import record
from generators import padic_case, random_ext, random_poly, random_term, z_case

CASES = 1000


def timed(fn):
    start = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - start


# -- Poincare series -----------------------------------------------------------

def test_poincare_identity():
    ok, dt = timed(lambda: check_pR_identity(200))
    passed = ok and dt < 1.0
    record("Poincare identity up to degree 200", passed, f"exact match={ok}, {dt:.3f} s (< 1 s)")
    assert passed


def test_rationality_contrast():
    def run():
        pZ = series(ExponentSetSpec.naturals(), 2, 511).coeffs
        pR = series(ExponentSetSpec.sparse(builtin("pow2")), 2, 511).coeffs
        return detect_recurrence(list(pZ), 20), detect_recurrence(list(pR), 20)

    (rec_z, rec_r), dt = timed(run)
    z_ok = rec_z is not None and rec_z.order == 2 and rec_z.coeffs == (2, -1)
    passed = z_ok and rec_r is None and dt < 30
    record("Rationality contrast (K=20, 512 coefficients)", passed,
           f"p^Z order-2 recurrence={z_ok}, p^R recurrence={rec_r}, {dt:.2f} s (< 30 s)")
    assert passed


# -- dominant terms ------------------------------------------------------------

def test_dominant_term_oracle():
    rng = random.Random(2024)
    tables = {(p, n): pn_cosets(p, n) for p in (2, 3, 5) for n in (2, 3)}
    runs = [("pow2", 1, (10, 12)), ("fibonacci", 2, (14, 18))]
    polys = mismatches = checks = 0

    def run():
        nonlocal polys, mismatches, checks
        for name, d, depths in runs:
            seq = builtin(name)
            for _ in range(100):
                p = rng.choice([2, 3, 5])
                P = random_poly(rng, p, seq, d)
                polys += 1
                fv = poly_vp(P)
                for N in depths:
                    x = instantiate(P, N)
                    checks += 1
                    if x.is_zero():
                        mismatches += 1
                        continue
                    bad = vp(x) != fv.at(seq, N) or pi(x) != instantiate(poly_pi(P), N)
                    for n in (2, 3):
                        table = tables[(p, n)]
                        bad |= pn_class(x, table) != poly_pn_class(P, table, N)
                    mismatches += bad

    _, dt = timed(run)
    passed = polys >= 200 and mismatches == 0 and dt < 60
    record("Dominant-term oracle", passed,
           f"{polys} polynomials, {checks} instantiations, {mismatches} mismatches, "
           f"{dt:.2f} s (< 60 s)")
    assert passed


# -- nonstandard extension -----------------------------------------------------

def _membership_consistent(e, m, N, seq):
    v = e.instantiate(N)
    if m.kind == "InBase":
        return v == m.value and m.value in seq
    if m.kind == "IsShift":
        return v == seq.term(N + m.value)
    return v not in seq


def test_nonstandard_oracle():
    rng = random.Random(77)
    signs = {1: Sign.POSITIVE, 0: Sign.ZERO, -1: Sign.NEGATIVE}
    elements = mismatches = 0
    for name in ("pow2", "fibonacci", "factorials"):
        seq = builtin(name, horizon=96)
        for _ in range(200):
            e = random_ext(rng, seq)
            elements += 1
            try:
                s, lam, m = ext_sign(e), ext_lambda(e), ext_in_R(e)
            except SparseArithError:
                mismatches += 1
                continue
            for N in (60, 70):
                v = e.instantiate(N)
                ok = signs[(v > 0) - (v < 0)] is s
                ok &= lambda_z(v, seq) == lam.instantiate(N)
                ok &= _membership_consistent(e, m, N, seq)
                mismatches += not ok
    passed = elements >= 500 and mismatches == 0
    record("Nonstandard-extension oracle", passed,
           f"{elements} elements x 2 instantiations (N = 60, 70), {mismatches} mismatches")
    assert passed


# -- variable separation -------------------------------------------------------

def _legal(sep, cs):
    out = sep.cs
    if not (out.is_truncation_of(cs) and out.left_retained() and out.right_retained()):
        return False
    discarded = out.discarded_indices()
    return all(i in discarded for t in sep.terms() for _, i in params(t))


def test_variable_separation():
    rng = random.Random(31)
    stats = {"returned": 0, "unsound": 0, "illegal": 0, "rejected": 0, "cases": 0}
    rejections = {}

    def attempt(t, cs, b, seq, p=None):
        stats["cases"] += 1
        try:
            sep = separate_z(t, cs, b, seq) if p is None else separate_padic(t, cs, b, seq, p)
        except SeparationError as exc:
            stats["rejected"] += 1
            rejections[type(exc).__name__] = rejections.get(type(exc).__name__, 0) + 1
            return
        stats["returned"] += 1
        stats["unsound"] += not verify_separation(t, sep, cs, b, seq, p)
        stats["illegal"] += not _legal(sep, cs)

    for name in ("pow2", "fibonacci"):
        seq = builtin(name, horizon=200)
        for i in range(400):
            cs, b = z_case(rng, seq, ("dominating", "dominated")[i % 2])
            attempt(random_term(rng, 4), cs, b, seq)
        for i in range(300):
            p = (2, 3)[i % 2]
            cs, b = padic_case(rng, p, ("dominating", "dominated")[(i // 2) % 2])
            attempt(random_term(rng, 4, padic=True), cs, b, seq, p)

    rate = stats["rejected"] / stats["cases"]
    passed = stats["unsound"] == 0 and stats["illegal"] == 0 and rate < 0.10
    detail = (f"{stats['cases']} cases, {stats['returned']} separations all verified="
              f"{stats['unsound'] == 0}, rejection rate {rate:.1%} (< 10%) {rejections}")
    record("Variable separation soundness", passed, detail)
    assert passed


# -- almost sparseness ---------------------------------------------------------

def test_almost_sparseness_reports():
    verdicts, witness = {}, None
    for name in ("pow2", "factorials", "fibonacci", "identity"):
        rep = verify_almost_sparse(builtin(name), reach=2, coeff_bound=4)
        verdicts[name] = rep.verdict
        if name == "identity":
            witness = rep.first_failure
    expected = {"pow2": "PASS", "factorials": "PASS", "fibonacci": "PASS", "identity": "FAIL"}
    passed = verdicts == expected and witness is not None
    w = "" if witness is None else f"; identity witness A = {witness['A_text']}, " \
                                   f"B = {witness['B_text']} ({witness['reason']})"
    record("Almost-sparseness reports (reach 2, |coeff| <= 4)", passed, f"{verdicts}{w}")
    assert passed


# -- cosets of P_n -------------------------------------------------------------

def _brute_force_index(p, n):
    e = 2 * vp_int(n, p) + 3
    mod = p ** e
    units = [u for u in range(1, mod) if u % p]
    return n * len(units) // len({pow(u, n, mod) for u in units})


def _is_nth_power(q: Fraction, p: int, n: int) -> bool:
    k = vp_int(q.numerator, p) - vp_int(q.denominator, p)
    if k % n:
        return False
    u = q / Fraction(p) ** k
    mod = p ** (2 * vp_int(n, p) + 3)
    return is_nthpow_residue(u.numerator * pow(u.denominator, -1, mod) % mod, n, mod)


def test_coset_tables():
    counts = {(p, n): (len(pn_cosets(p, n)), _brute_force_index(p, n))
              for p, n in ((5, 2), (2, 2), (3, 2), (3, 3))}
    ok = counts[(5, 2)] == (4, 4) and counts[(2, 2)] == (8, 8)
    ok &= all(a == b for a, b in counts.values())
    rng = random.Random(5)
    failures = {}
    for (p, n) in counts:
        table = pn_cosets(p, n)
        bad = 0
        for _ in range(CASES):
            x = PadicNumber(p, Fraction(rng.randint(1, 10 ** 6), rng.randint(1, 10 ** 4))
                            * Fraction(p) ** rng.randint(-10, 10) * rng.choice([1, -1]))
            # eps = unit * p^(v(x) + m + j), so v(eps) >= v(x) + m exactly as required
            unit = PadicNumber(p, Fraction(rng.randint(1, 10 ** 6), rng.randint(1, 10 ** 4)))
            unit = unit / pi(unit) * rng.choice([1, -1])
            eps = unit * Fraction(p) ** (vp(x) + table.threshold + rng.randint(0, 6))
            assert vp(eps) >= vp(x) + table.threshold
            c = pn_class(x, table)
            bad += pn_class(x + eps, table) != c or not _is_nth_power((x + eps).value / c, p, n)
        failures[(p, n)] = bad
    passed = ok and not any(failures.values())
    record("Coset tables and stability", passed,
           f"|Q5*/P2| = {counts[(5, 2)][0]}, |Q2*/P2| = {counts[(2, 2)][0]}, "
           f"brute force agrees={ok}; {CASES} perturbations per table, failures {failures}")
    assert passed


# -- invariant suites ----------------------------------------------------------

def _suite_pi(rng):
    bad = 0
    for _ in range(CASES):
        p = rng.choice([2, 3, 5, 7])
        x, y = (PadicNumber(p, Fraction(rng.randint(1, 10 ** 9), rng.randint(1, 10 ** 6))
                            * Fraction(p) ** rng.randint(-20, 20)) for _ in range(2))
        bad += pi(x * y) != pi(x) * pi(y) or vp(pi(x)) != vp(x)
    return bad


def _suite_isosceles(rng):
    bad = 0
    for _ in range(CASES):
        p = rng.choice([2, 3, 5])
        x, y = (PadicNumber(p, Fraction(rng.randint(-10 ** 6, 10 ** 6) or 1, rng.randint(1, 999))
                            * Fraction(p) ** rng.randint(-3, 3)) for _ in range(2))
        z = x + y
        sides = sorted([vp(x), vp(y), vp(z)])
        bad += sides[0] != sides[1] or vp(z) < min(vp(x), vp(y))
    return bad


def _suite_lambda(rng):
    bad = 0
    seqs = [builtin(n, horizon=96) for n in ("pow2", "fibonacci", "factorials")]
    for i in range(CASES):
        seq = seqs[i % 3]
        x = rng.randint(-10 ** 6, seq.values[-2])
        lam = lambda_z(x, seq)
        bad += lambda_z(lam, seq) != lam or lam not in seq or succ_z(lam, seq) != succ_z(x, seq)
        e = random_ext(rng, seq)
        le = ext_lambda(e)
        bad += ext_lambda(le) != le
    return bad


def _suite_group(rng):
    bad = 0
    seq = builtin("fibonacci")
    zero = ExtElement.standard(0, seq)
    tables = [pn_cosets(3, 2), pn_cosets(2, 2), pn_cosets(5, 3)]
    for i in range(CASES):
        x, y, z = (random_ext(rng, seq) for _ in range(3))
        bad += (x + y) + z != x + (y + z) or x + y != y + x or x + (-x) != zero
        table = tables[i % 3]
        p = table.p
        a, b = (PadicNumber(p, Fraction(rng.randint(1, 10 ** 6), rng.randint(1, 999))
                            * Fraction(p) ** rng.randint(-5, 5)) for _ in range(2))
        ca, cb = pn_class(a, table), pn_class(b, table)
        bad += pn_class(a * b, table) != pn_class(PadicNumber(p, ca * cb), table)
    return bad


def _suite_truncation(rng):
    bad = checked = 0
    seq = builtin("pow2", horizon=200)
    while checked < CASES:
        cs, b = z_case(rng, seq, rng.choice(["dominating", "dominated"]))
        t = random_term(rng, 4)
        try:
            sep = separate_z(t, cs, b, seq)
        except SeparationError:
            continue
        checked += 1
        bad += not _legal(sep, cs)
    return bad


def _suite_counts(rng):
    bad = 0
    for _ in range(CASES):
        kind = rng.random()
        if kind < 0.2:
            spec = ExponentSetSpec.naturals(rng.random() < 0.5)
        elif kind < 0.4:
            spec = ExponentSetSpec.sparse(builtin(rng.choice(["pow2", "fibonacci"])),
                                          rng.random() < 0.5)
        else:
            spec = ExponentSetSpec.explicit(rng.sample(range(60), rng.randint(1, 10)),
                                            rng.random() < 0.5)
        c = series(spec, rng.choice([2, 3, 5]), 64).coeffs
        bad += c[0] != 1 or any(a > b for a, b in zip(c, c[1:]))
    return bad


SUITES = {
    "pi multiplicativity": _suite_pi,
    "ultrametric isosceles": _suite_isosceles,
    "lambda idempotence": _suite_lambda,
    "group laws": _suite_group,
    "truncation legality": _suite_truncation,
    "N_m monotonicity": _suite_counts,
}


@pytest.mark.parametrize("name", list(SUITES))
def test_invariant_suite(name):
    failures, dt = timed(lambda: SUITES[name](random.Random(name)))
    passed = failures == 0
    record(f"Invariant suite: {name}", passed, f"{CASES} cases, {failures} failures, {dt:.2f} s")
    assert passed
