"""The maps lambda, S and S^{-1} on the integers, and term evaluation."""
from __future__ import annotations

from .errors import IndexBeyondHorizon
from .sequences import SparseSequence
from .terms import Add, Const, Lam, Param, Pred, Sub, Succ, Term, Var, lookup, render


def _floor_index(x: int, seq: SparseSequence) -> int:
    vals = seq.values
    if x < vals[0]:
        return 0
    if x > vals[-1]:
        raise IndexBeyondHorizon(
            f"{x} exceeds r_H = {vals[-1]} of {seq.name} (horizon {seq.horizon})"
        )
    return seq.index_of_floor(x)


def lambda_index(x: int, seq: SparseSequence) -> int:
    """Index n with ``lambda(x) = r_n``."""
    return _floor_index(x, seq)


def lambda_z(x: int, seq: SparseSequence) -> int:
    """``max{r in R : r <= x}``, or ``r_0`` below the sequence."""
    return seq.values[_floor_index(x, seq)]


def succ_z(x: int, seq: SparseSequence) -> int:
    k = _floor_index(x, seq) + 1
    if k > seq.horizon:
        raise IndexBeyondHorizon(f"successor of r_{k - 1} lies beyond horizon {seq.horizon}")
    return seq.values[k]


def pred_z(x: int, seq: SparseSequence) -> int:
    return seq.values[max(_floor_index(x, seq) - 1, 0)]


_UNARY_Z = {Lam: lambda_z, Succ: succ_z, Pred: pred_z}


def eval_term_z(t: Term, env, seq: SparseSequence | None = None) -> int:
    """Evaluate a ``{+, -, L, S, Sinv}`` term bottom-up.

    ``env`` maps variable names to integers and ``(name, index)`` pairs to
    parameter values.
    """
    if isinstance(t, Const):
        return int(t.value)
    if isinstance(t, (Var, Param)):
        return lookup(env, t)
    if isinstance(t, Add):
        return eval_term_z(t.left, env, seq) + eval_term_z(t.right, env, seq)
    if isinstance(t, Sub):
        return eval_term_z(t.left, env, seq) - eval_term_z(t.right, env, seq)
    fn = _UNARY_Z.get(type(t))
    if fn is None:
        raise TypeError(f"{render(t)} is not a Z-dialect term")
    if seq is None:
        raise ValueError("a sequence is required to evaluate L/S/Sinv")
    return fn(eval_term_z(t.arg, env, seq), seq)
