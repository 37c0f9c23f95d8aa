import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sparse_arith.errors import (
    IndexBeyondHorizon,
    TermSyntaxError,
    UnboundVariable,
    UnknownIdentifier,
)
from sparse_arith.terms import (
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
    Var,
    at_index,
    depth,
    parse_term,
    render,
)
from sparse_arith.zline import eval_term_z, lambda_z, pred_z, succ_z


# -- parser ------------------------------------------------------------------

def test_parse_examples():
    assert parse_term("L(x+y)") == Lam(Add(Var("x"), Var("y")))
    assert parse_term("pi(x*y)", "Padic") == Pi(Mul(Var("x"), Var("y")))
    assert parse_term("x - y - 1") == Sub(Sub(Var("x"), Var("y")), Const(1))
    assert parse_term("Sinv(S(-3))") == Pred(Succ(Const(-3)))
    assert parse_term("x[4] + inv(2)*y", "Padic") == Add(Param("x", 4), Mul(Inv(Const(2)), Var("y")))


def test_syntax_error_offset():
    with pytest.raises(TermSyntaxError) as err:
        parse_term("L(x+")
    assert err.value.offset == 4
    assert "offset 4" in str(err.value)


@pytest.mark.parametrize("text,exc", [
    ("pi(x)", UnknownIdentifier),
    ("x*y", TermSyntaxError),
    ("foo(x)", UnknownIdentifier),
    ("x + )", TermSyntaxError),
    ("L x", TermSyntaxError),
    ("x y", TermSyntaxError),
])
def test_z_dialect_rejections(text, exc):
    with pytest.raises(exc):
        parse_term(text, "Z")


def test_declared_variables():
    assert parse_term("x + y", variables={"x", "y"})
    with pytest.raises(UnknownIdentifier):
        parse_term("x + z", variables={"x", "y"})


def test_length_limit():
    with pytest.raises(TermSyntaxError):
        parse_term("x+" * 20000 + "x")


def _terms(padic: bool):
    leaf = st.one_of(
        st.builds(Const, st.integers(-50, 50)),
        st.builds(Var, st.sampled_from(["x", "y", "z1"])),
        st.builds(Param, st.sampled_from(["x", "y"]), st.integers(-3, 30)),
    )
    unary = [Lam, Succ, Pred] + ([Inv, Pi] if padic else [])
    binary = [Add, Sub] + ([Mul] if padic else [])

    def extend(children):
        return st.one_of(
            st.builds(lambda f, a: f(a), st.sampled_from(unary), children),
            st.builds(lambda f, a, b: f(a, b), st.sampled_from(binary), children, children),
        )

    return st.recursive(leaf, extend, max_leaves=12).filter(lambda t: depth(t) <= 5)


@settings(max_examples=1000)
@given(_terms(padic=False))
def test_round_trip_z(t):
    assert parse_term(render(t), "Z") == t


@settings(max_examples=1000)
@given(_terms(padic=True))
def test_round_trip_padic(t):
    assert parse_term(render(t), "Padic") == t


def test_at_index():
    t = parse_term("L(x + y) - x")
    assert at_index(t, 3, {"x"}) == parse_term("L(x[3] + y) - x[3]")


# -- lambda, S, S^{-1} ------------------------------------------------------

def test_lambda_examples(pow2):
    assert lambda_z(100, pow2) == 64
    assert lambda_z(0, pow2) == 1
    assert lambda_z(64, pow2) == 64
    assert lambda_z(-10 ** 30, pow2) == 1


def test_succ_pred_examples(pow2):
    assert succ_z(100, pow2) == 128
    assert pred_z(1, pow2) == 1
    assert succ_z(64, pow2) == 128
    assert pred_z(100, pow2) == 32


def test_beyond_horizon(pow2):
    with pytest.raises(IndexBeyondHorizon):
        lambda_z(2 ** 65, pow2)
    with pytest.raises(IndexBeyondHorizon):
        succ_z(2 ** 64, pow2)


@settings(max_examples=1000)
@given(st.integers(-10 ** 6, 2 ** 63), st.sampled_from(["pow2", "fibonacci", "factorials"]))
def test_lambda_properties(x, name):
    from sparse_arith.sequences import builtin

    seq = builtin(name, horizon=100)
    lam = lambda_z(x, seq)
    assert lambda_z(lam, seq) == lam
    assert lam in seq
    if x >= seq.values[0]:
        assert lam <= x < succ_z(x, seq)
    assert succ_z(lam, seq) == succ_z(x, seq)
    assert pred_z(lam, seq) == pred_z(x, seq)


def test_eval_examples(pow2):
    assert eval_term_z(parse_term("L(x+y)"), {"x": 60, "y": 40}, pow2) == 64
    assert eval_term_z(parse_term("x - x"), {"x": 7}) == 0
    assert eval_term_z(parse_term("S(L(x))"), {"x": 100}, pow2) == 128
    assert eval_term_z(parse_term("x[2] + 1"), {("x", 2): 5}) == 6


def test_eval_unbound(pow2):
    with pytest.raises(UnboundVariable, match="y"):
        eval_term_z(parse_term("x + y"), {"x": 1}, pow2)
