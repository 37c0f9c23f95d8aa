"""Command-line front end: ``sparse-arith <verb> [options]``.

Exit codes: 0 on success, 1 on domain errors, 2 on usage errors.  With
``--format json`` every result is a JSON object carrying ``"schema": 1``.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from . import dominant, nonstandard, padic, poincare, varsep
from .errors import SparseArithError
from .sequences import (
    ALIASES,
    Operator,
    degree,
    delta_witness,
    load_registry,
    op_bound,
    op_compare_ae,
    verify_almost_sparse,
)
from .terms import parse_term, render
from .zline import eval_term_z

SCHEMA = 1
REGISTRY_ENV = "SPARSE_ARITH_REGISTRY"


class UsageError(Exception):
    pass


def _jsonable(obj):
    if isinstance(obj, Fraction):
        return str(obj) if obj.denominator != 1 else obj.numerator
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"not a rational number: {text!r}") from exc


def _bindings(items, rational: bool) -> dict:
    env = {}
    for item in items or ():
        name, sep, value = item.partition("=")
        if not sep or not name:
            raise UsageError(f"expected NAME=VALUE, got {item!r}")
        v = _fraction(value)
        if not rational and v.denominator != 1:
            raise UsageError(f"{name} must be an integer in the Z dialect")
        env[name.strip()] = v if rational else int(v)
    return env


def _sequence(args):
    path = args.registry or os.environ.get(REGISTRY_ENV) or None
    registry = load_registry(path)
    if args.seq is None:
        raise UsageError("--seq is required")
    name = ALIASES.get(args.seq, args.seq)
    if name not in registry:
        raise UsageError(f"unknown sequence {args.seq!r}; known: {', '.join(sorted(registry))}")
    seq = registry[name]
    if args.horizon is not None:
        seq = seq.with_window(horizon=args.horizon)
    return seq


def _require(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError("missing " + ", ".join("--" + m.replace("_", "-") for m in missing))


def _operator(text: str) -> Operator:
    return Operator.parse(text)


# --------------------------------------------------------------------------
# verbs
# --------------------------------------------------------------------------

def cmd_seq_compare(args):
    _require(args, "A", "B")
    seq = _sequence(args)
    res = op_compare_ae(_operator(args.A), _operator(args.B), seq)
    return res.to_dict() | {"seq": seq.name}, f"{res.verdict.value} (from n = {res.witness_from})"


def cmd_seq_delta(args):
    _require(args, "A", "B")
    seq = _sequence(args)
    delta = delta_witness(_operator(args.A), _operator(args.B), seq, delta_max=args.delta_max)
    return {"seq": seq.name, "delta": delta}, "no witness" if delta is None else f"delta = {delta}"


def cmd_seq_bound(args):
    _require(args, "A")
    seq = _sequence(args)
    b = op_bound(_operator(args.A), seq)
    return b.to_dict() | {"seq": seq.name}, f"{b.kind.value}({b.m})"


def cmd_seq_degree(args):
    seq = _sequence(args)
    d = degree(seq, d_max=args.d_max)
    text = "infinite (none found)" if not d.found else f"{d.d}  certificate: {d.certificate}"
    return d.to_dict() | {"seq": seq.name}, text


def cmd_seq_verify(args):
    seq = _sequence(args)
    rep = verify_almost_sparse(seq, reach=args.reach, coeff_bound=args.coeff_bound)
    text = f"{rep.verdict} ({rep.differences_checked} differences, max delta {rep.max_delta})"
    if rep.first_failure:
        f = rep.first_failure
        text += f"\nwitness: A = {f['A_text']}, B = {f['B_text']} ({f['reason']})"
    return rep.to_dict(), text


def cmd_z_eval(args):
    _require(args, "term")
    seq = _sequence(args)
    t = parse_term(args.term, "Z")
    value = eval_term_z(t, _bindings(args.var, rational=False), seq)
    return {"term": render(t), "value": value}, str(value)


def _ext(args):
    seq = _sequence(args)
    return nonstandard.ExtElement(_operator(args.A or "0"), args.a, seq)


def cmd_ext_sign(args):
    e = _ext(args)
    s = nonstandard.ext_sign(e)
    return {"element": e.to_dict(), "sign": s.value}, s.value


def cmd_ext_lambda(args):
    e = _ext(args)
    fn = {"L": nonstandard.ext_lambda, "S": nonstandard.ext_succ,
          "Sinv": nonstandard.ext_pred}[args.map]
    out = fn(e)
    member = nonstandard.ext_in_R(e)
    return ({"element": e.to_dict(), "map": args.map, "result": out.to_dict(),
             "in_R": member.to_dict()},
            f"{args.map}({e}) = {out}\nmembership: {member.kind}"
            + ("" if member.value is None else f"({member.value})"))


def cmd_padic_eval(args):
    _require(args, "term", "p")
    seq = _sequence(args) if args.seq else None
    t = parse_term(args.term, "Padic")
    value = padic.eval_term_padic(t, _bindings(args.var, rational=True), args.p, seq)
    x = padic.PadicNumber(args.p, value)
    v = padic.vp(x)
    out = {"term": render(t), "value": x.to_dict(), "vp": None if x.is_zero() else v}
    return out, f"{value}  (v_{args.p} = {'inf' if x.is_zero() else v})"


def cmd_padic_cosets(args):
    _require(args, "p", "n")
    table = padic.pn_cosets(args.p, args.n)
    return table.to_dict(), f"{len(table)} cosets: {list(table.reps)}  threshold m = {table.threshold}"


def cmd_dominant(args):
    _require(args, "p", "poly")
    seq = _sequence(args)
    P = dominant.SparsePoly.parse(args.poly, args.p, seq, args.d)
    mono = dominant.dominant_term(P)
    fv = dominant.poly_vp(P)
    lead = dominant.SparsePoly(P.p, seq, P.d, {mono.exps: mono.coeff})
    out = {"poly": P.to_dict(), "dominant": {"coeff": mono.coeff, "exps": list(mono.exps)},
           "vp": fv.to_dict(), "pi": str(dominant.poly_pi(P))}
    text = [f"dominant term: {lead}", f"v_p: {fv.offset} + {list(fv.exps)} . r",
            f"pi: {dominant.poly_pi(P)}"]
    if args.N is not None:
        out["N"] = args.N
        out["vp_at_N"] = fv.at(seq, args.N)
        text.append(f"v_p at N={args.N}: {out['vp_at_N']}")
        if args.n is not None:
            cls = dominant.poly_pn_class(P, padic.pn_cosets(args.p, args.n), args.N)
            out["pn_class"] = cls
            text.append(f"P_{args.n} class at N={args.N}: {cls}")
    return out, "\n".join(text)


def _load_cut_sequence(text: str) -> varsep.CutSequence:
    if os.path.exists(text):
        with open(text) as fh:
            data = json.load(fh)
    else:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise UsageError(f"--cs is neither a file nor JSON: {exc}") from exc
    return varsep.CutSequence.from_dict(data)


def cmd_separate(args):
    _require(args, "term", "cs", "b")
    seq = _sequence(args)
    cs = _load_cut_sequence(args.cs)
    if args.dialect == "Z":
        t = parse_term(args.term, "Z")
        b = _fraction(args.b)
        if b.denominator != 1:
            raise UsageError("b must be an integer in the Z dialect")
        sep = varsep.separate_z(t, cs, int(b), seq)
        text = f"u = {render(sep.u)}\nr = {render(sep.r)}"
    else:
        _require(args, "p")
        t = parse_term(args.term, "Padic")
        sep = varsep.separate_padic(t, cs, _fraction(args.b), seq, args.p)

        def form(pairs):
            return " + ".join(f"{render(a)}*{render(r)}" for a, r in pairs)

        text = f"num = {form(sep.num)}\nden = {form(sep.den)}"
    out = sep.to_dict() | {"term": render(t)}
    text += f"\nretained: {out['truncation']}  discarded: {out['discarded']}"
    return out, text


def _exponent_set(args):
    if args.set == "pZ":
        return poincare.ExponentSetSpec.naturals(args.with_zero)
    if args.set == "pR":
        return poincare.ExponentSetSpec.sparse(_sequence(args), args.with_zero)
    if not args.exponents:
        raise UsageError("--set explicit needs --exponents")
    try:
        exps = [int(e) for e in args.exponents.split(",")]
    except ValueError as exc:
        raise UsageError(f"bad --exponents: {args.exponents!r}") from exc
    return poincare.ExponentSetSpec.explicit(exps, args.with_zero)


def cmd_poincare_series(args):
    _require(args, "p", "M")
    s = poincare.series(_exponent_set(args), args.p, args.M)
    if args.format == "csv":
        return None, s.to_csv()
    return s.to_dict(), str(list(s.coeffs))


def cmd_poincare_rational(args):
    _require(args, "p", "M", "K")
    s = poincare.series(_exponent_set(args), args.p, args.M)
    rec = poincare.detect_recurrence(list(s.coeffs), args.K)
    out = {"p": args.p, "set": s.spec.to_dict(), "coefficients": len(s.coeffs), "K": args.K,
           "rational": rec is not None, "recurrence": None if rec is None else rec.to_dict()}
    if rec is None:
        text = f"no recurrence of order <= {args.K} over {len(s.coeffs)} coefficients"
    else:
        text = (f"order {rec.order}, transient {rec.transient}, "
                f"coeffs {rec.to_dict()['coeffs']}")
    return out, text


VERBS = {
    "seq-compare": (cmd_seq_compare, "eventual order of two operators"),
    "seq-delta": (cmd_seq_delta, "shift witness for A >_ae B"),
    "seq-bound": (cmd_seq_bound, "locate an operator between consecutive shifts"),
    "seq-degree": (cmd_seq_degree, "degree of the sequence"),
    "seq-verify": (cmd_seq_verify, "check almost-sparseness on an operator pool"),
    "z-eval": (cmd_z_eval, "evaluate a Z-dialect term"),
    "ext-sign": (cmd_ext_sign, "sign of A(b) + a"),
    "ext-lambda": (cmd_ext_lambda, "lambda / S / S^-1 of A(b) + a and R-membership"),
    "padic-eval": (cmd_padic_eval, "evaluate a p-adic dialect term"),
    "padic-cosets": (cmd_padic_cosets, "coset representatives of P_n"),
    "dominant": (cmd_dominant, "dominant term of a polynomial in S^i(b)"),
    "separate": (cmd_separate, "separate the variables of a term on a cut sequence"),
    "poincare-series": (cmd_poincare_series, "Poincare series coefficients"),
    "poincare-rational": (cmd_poincare_rational, "bounded-order rationality test"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seq", help="sequence name from the registry")
    common.add_argument("--registry", help=f"JSON registry file (default ${REGISTRY_ENV})")
    common.add_argument("--horizon", type=int, help="override the sequence horizon H")
    common.add_argument("--p", type=int, help="prime")
    common.add_argument("--n", type=int, help="exponent n of P_n")
    common.add_argument("--M", type=int, help="number of series terms minus one")
    common.add_argument("--K", type=int, help="maximal recurrence order")
    common.add_argument("--format", choices=("text", "json", "csv"), default="text")

    parser = argparse.ArgumentParser(prog="sparse-arith", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="verb", metavar="VERB")
    sub.required = True
    subs = {verb: sub.add_parser(verb, parents=[common], help=help_)
            for verb, (_, help_) in VERBS.items()}

    for verb in ("seq-compare", "seq-delta", "seq-bound", "ext-sign", "ext-lambda"):
        subs[verb].add_argument("--A", help='operator, e.g. "S^2 - S^1 - S^0"')
    for verb in ("seq-compare", "seq-delta"):
        subs[verb].add_argument("--B", help="operator")
    subs["seq-delta"].add_argument("--delta-max", type=int, default=32)
    subs["seq-degree"].add_argument("--d-max", type=int, default=4)
    subs["seq-verify"].add_argument("--reach", type=int, default=2)
    subs["seq-verify"].add_argument("--coeff-bound", type=int, default=4)
    for verb in ("ext-sign", "ext-lambda"):
        subs[verb].add_argument("--a", type=int, default=0, help="standard offset")
    subs["ext-lambda"].add_argument("--map", choices=("L", "S", "Sinv"), default="L")
    for verb in ("z-eval", "padic-eval", "separate"):
        subs[verb].add_argument("--term", help="term text")
    for verb in ("z-eval", "padic-eval"):
        subs[verb].add_argument("--var", action="append", metavar="NAME=VALUE")
    subs["dominant"].add_argument("--poly", help='polynomial in X0..X{d-1}, e.g. "X0^2 + 7*X0"')
    subs["dominant"].add_argument("--d", type=int, default=1)
    subs["dominant"].add_argument("--N", type=int, help="instantiation index for P_n classes")
    subs["separate"].add_argument("--cs", help="cut sequence as a JSON file or inline JSON")
    subs["separate"].add_argument("--b", help="value of y")
    subs["separate"].add_argument("--dialect", choices=("Z", "Padic"), default="Z")
    for verb in ("poincare-series", "poincare-rational"):
        subs[verb].add_argument("--set", choices=("pZ", "pR", "explicit"), default="pR")
        subs[verb].add_argument("--exponents", help="comma-separated list for --set explicit")
        subs[verb].add_argument("--with-zero", action="store_true")
    return parser


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handler = VERBS[args.verb][0]
    if args.format == "csv" and args.verb != "poincare-series":
        print("sparse-arith: --format csv is only available for poincare-series", file=stderr)
        return 2
    try:
        result, text = handler(args)
    except UsageError as exc:
        print(f"sparse-arith {args.verb}: {exc}", file=stderr)
        return 2
    except (SparseArithError, ValueError, ZeroDivisionError) as exc:
        print(f"sparse-arith {args.verb}: {type(exc).__name__}: {exc}", file=stderr)
        return 1
    if args.format == "json":
        payload = {"schema": SCHEMA, "verb": args.verb, "result": _jsonable(result)}
        print(json.dumps(payload, sort_keys=True), file=stdout)
    else:
        print(text, file=stdout, end="" if text.endswith("\n") else "\n")
    return 0


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
