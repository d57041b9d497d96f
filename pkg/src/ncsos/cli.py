"""Command-line front end.

Subcommands: certify, decompose (primal only), witness (dual only), eval,
extract, fock-dump, spotcheck.  All outputs are JSON on stdout or --out;
progress notes go to stderr.  Exit codes: 0 = sos, 1 = witness,
2 = undecided/inconclusive, >= 64 on usage or input errors.
"""

from __future__ import annotations

import argparse
import hashlib
import sys
from dataclasses import dataclass

import numpy as np

from . import jsonio
from .certify import (
    CertifyError, CertifyOptions, CertifyOutcome, certify, run_dual,
    run_primal, infer_degree, spotcheck,
)
from .fock import (
    FockBasis, build_creation, build_extraction, build_symmetrized,
    build_unitaries, extract_coeffs,
)
from .gns import gns_verify
from .gram import SOSCertificate
from .poly import (
    NCPoly, OperatorTuple, PolyError, matrix_from_json, matrix_to_json,
    poly_eval, poly_from_json, poly_to_json, tuple_from_json, tuple_to_json,
)
from .words import GROUP, MONOID, WordError, format_word

EX_OK_SOS = 0
EX_WITNESS = 1
EX_UNDECIDED = 2
EX_USAGE = 64
EX_DATA = 65
EX_SOFTWARE = 70


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    input_path: str | None = None
    out_path: str | None = None
    tol: float = 1e-9
    max_iter: int = 50_000
    degree: int | None = None
    delta: float = 1e-4
    eps_cert: float = 1e-7
    eps_wit: float = 1e-6
    seed: int = 1729  # deterministic default

    def options(self) -> CertifyOptions:
        for name in ("tol", "delta", "eps_cert", "eps_wit"):
            if getattr(self, name) <= 0:
                raise UsageError(f"--{name.replace('_', '-')} must be positive")
        return CertifyOptions(d=self.degree, max_iter=self.max_iter, tol=self.tol,
                              eps_cert=self.eps_cert, eps_wit=self.eps_wit,
                              delta=self.delta, seed=self.seed)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _Parser:
    p = _Parser(prog="ncsos", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def solver_flags(sp):
        sp.add_argument("--tol", type=float, default=1e-9)
        sp.add_argument("--max-iter", type=int, default=50_000)
        sp.add_argument("--degree", type=int, default=None)
        sp.add_argument("--delta", type=float, default=1e-4)
        sp.add_argument("--seed", type=int, default=1729)
        sp.add_argument("--out", default=None)

    for name in ("certify", "decompose", "witness"):
        sp = sub.add_parser(name)
        sp.add_argument("input")
        solver_flags(sp)

    sp = sub.add_parser("eval")
    sp.add_argument("input")
    sp.add_argument("--at", required=True, help="operator tuple JSON file")
    sp.add_argument("--out", default=None)

    sp = sub.add_parser("extract")
    sp.add_argument("--eval", dest="eval_path", required=True,
                    help="JSON matrix presumed equal to q(A)")
    sp.add_argument("--g", type=int, required=True)
    sp.add_argument("--l", type=int, required=True, help="truncation degree")
    sp.add_argument("--k", type=int, default=1)
    sp.add_argument("--out", default=None)

    sp = sub.add_parser("fock-dump")
    sp.add_argument("--g", type=int, required=True)
    sp.add_argument("--l", type=int, required=True)
    sp.add_argument("--group", action="store_true")
    sp.add_argument("--out", default=None)

    sp = sub.add_parser("spotcheck")
    sp.add_argument("input")
    sp.add_argument("certificate")
    sp.add_argument("--trials", type=int, default=200)
    sp.add_argument("--n-max", type=int, default=5)
    sp.add_argument("--seed", type=int, default=1729)
    sp.add_argument("--out", default=None)
    return p


# -- serialization helpers ----------------------------------------------------


def _read_json(path: str):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}")
    import json
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}")


def _load_poly(path: str) -> NCPoly:
    try:
        return poly_from_json(_read_json(path))
    except (PolyError, WordError) as exc:
        raise DataError(f"{path}: {exc}")


def _input_hash(f: NCPoly) -> str:
    return hashlib.sha256(jsonio.dumps(poly_to_json(f)).encode()).hexdigest()


def _complex_pair(z: complex) -> list:
    return [float(z.real), float(z.imag)]


def _vector_to_json(v: np.ndarray) -> list:
    return [_complex_pair(z) for z in np.asarray(v).ravel()]


def _sos_json(cert: SOSCertificate) -> dict:
    return {
        "gram": matrix_to_json(cert.gram.matrix),
        "factors": [poly_to_json(r) for r in cert.factors],
        "residual": float(cert.residual),
    }


def _witness_json(outcome: CertifyOutcome) -> dict:
    model = outcome.model
    S = model.functional
    return {
        "min_eig": float(outcome.min_eig),
        "refuted_value": _complex_pair(outcome.refuted_value),
        "model": {
            "dim": model.dim,
            "mode": model.mode,
            "k": model.k,
            "d": model.d,
            "operators": tuple_to_json(model.operators),
            "gamma": _vector_to_json(model.gamma),
            "gns_residual": float(gns_verify(S, model)),
        },
        "functional": {
            "D": S.D,
            "blocks": [{"word": format_word(u), "matrix": matrix_to_json(S.blocks[u])}
                       for u in sorted(S.blocks, key=lambda w: (len(w), w.letters))],
        },
    }


def _outcome_json(f: NCPoly, outcome: CertifyOutcome) -> dict:
    data = {
        "outcome": outcome.kind,
        "degree": outcome.degree,
        "input_sha256": _input_hash(f),
        "diagnostics": {
            "primal": {"iterations": outcome.primal.iterations,
                       "gap": _finite(outcome.primal.gap),
                       "note": outcome.primal.note},
            "dual": {"iterations": outcome.dual.iterations,
                     "gap": _finite(outcome.dual.gap),
                     "note": outcome.dual.note},
        },
    }
    if outcome.kind == "sos":
        data["certificate"] = _sos_json(outcome.certificate)
    elif outcome.kind == "witness":
        data["witness"] = _witness_json(outcome)
    return data


def _finite(x: float):
    import math
    return None if x is None or math.isinf(x) else float(x)


def _emit(data, out_path: str | None):
    text = jsonio.dumps(data)
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


# -- subcommands ----------------------------------------------------------------


def _cmd_certify(cfg: RunConfig) -> int:
    f = _load_poly(cfg.input_path)
    try:
        outcome = certify(f, cfg.options())
    except CertifyError as exc:
        raise DataError(str(exc))
    print(f"certify: outcome={outcome.kind} degree={outcome.degree} "
          f"primal_iters={outcome.primal.iterations} dual_iters={outcome.dual.iterations}",
          file=sys.stderr)
    _emit(_outcome_json(f, outcome), cfg.out_path)
    return {"sos": EX_OK_SOS, "witness": EX_WITNESS}.get(outcome.kind, EX_UNDECIDED)


def _cmd_decompose(cfg: RunConfig) -> int:
    f = _load_poly(cfg.input_path)
    opts = cfg.options()
    try:
        if not f.is_hermitian():
            raise DataError("input polynomial is not Hermitian")
        d = infer_degree(f, opts)
    except CertifyError as exc:
        raise DataError(str(exc))
    cert, diag = run_primal(f, d, opts)
    if cert is None:
        _emit({"outcome": "undecided", "degree": d, "input_sha256": _input_hash(f),
               "diagnostics": {"iterations": diag.iterations, "gap": _finite(diag.gap),
                               "note": diag.note}}, cfg.out_path)
        return EX_UNDECIDED
    _emit({"outcome": "sos", "degree": d, "input_sha256": _input_hash(f),
           "certificate": _sos_json(cert)}, cfg.out_path)
    return EX_OK_SOS


def _cmd_witness(cfg: RunConfig) -> int:
    f = _load_poly(cfg.input_path)
    opts = cfg.options()
    try:
        if not f.is_hermitian():
            raise DataError("input polynomial is not Hermitian")
        d = infer_degree(f, opts)
    except CertifyError as exc:
        raise DataError(str(exc))
    model, min_eig, refuted, diag = run_dual(f, d, opts)
    if model is None:
        _emit({"outcome": "undecided", "degree": d, "input_sha256": _input_hash(f),
               "diagnostics": {"iterations": diag.iterations, "gap": _finite(diag.gap),
                               "note": diag.note}}, cfg.out_path)
        return EX_UNDECIDED
    outcome = CertifyOutcome("witness", model=model, min_eig=min_eig,
                             refuted_value=refuted, degree=d)
    _emit({"outcome": "witness", "degree": d, "input_sha256": _input_hash(f),
           "witness": _witness_json(outcome)}, cfg.out_path)
    return EX_WITNESS


def _cmd_eval(args) -> int:
    f = _load_poly(args.input)
    try:
        X = tuple_from_json(_read_json(args.at))
        value = poly_eval(f, X)
    except PolyError as exc:
        raise DataError(str(exc))
    _emit({"matrix": matrix_to_json(value)}, args.out)
    return 0


def _cmd_extract(args) -> int:
    data = _read_json(args.eval_path)
    try:
        E = matrix_from_json(data["matrix"] if isinstance(data, dict) else data)
    except (PolyError, KeyError) as exc:
        raise DataError(f"{args.eval_path}: {exc}")
    basis = FockBasis(args.g, args.l, MONOID)
    try:
        q = extract_coeffs(E, basis, args.k)
    except Exception as exc:
        raise DataError(str(exc))
    _emit(poly_to_json(q), args.out)
    return 0


def _cmd_fock_dump(args) -> int:
    if args.group:
        U = build_unitaries(args.g, args.l)
        data = {
            "mode": GROUP, "g": args.g, "degree": args.l,
            "unitaries": [matrix_to_json(m) for m in U.entries],
            "unitary_inverses": [matrix_to_json(m) for m in U.inverses],
        }
    else:
        basis = FockBasis(args.g, args.l, MONOID)
        ls = build_creation(basis)
        A = build_symmetrized(basis)
        ext = build_extraction(basis)
        data = {
            "mode": MONOID, "g": args.g, "degree": args.l,
            "creation": [matrix_to_json(m) for m in ls],
            "symmetrized": [matrix_to_json(m) for m in A.entries],
            "extraction": matrix_to_json(ext.matrix),
            "coefficient_bound": float(ext.row_sum_bound),
        }
    _emit(data, args.out)
    return 0


def _cmd_spotcheck(args) -> int:
    f = _load_poly(args.input)
    cert = _read_json(args.certificate)
    kind = cert.get("outcome")
    outcome = CertifyOutcome(kind or "undecided")
    if kind == "witness":
        try:
            model_data = cert["witness"]["model"]
            ops = tuple_from_json(model_data["operators"])
        except (KeyError, PolyError) as exc:
            raise DataError(f"{args.certificate}: {exc}")
        outcome.model = _ModelShim(ops)
    elif kind != "sos":
        raise DataError(f"{args.certificate}: no decided outcome to spot check")
    rep = spotcheck(f, outcome, trials=args.trials, n_max=args.n_max, seed=args.seed)
    _emit({"kind": rep.kind, "trials": rep.trials, "min_eig": rep.min_eig,
           "threshold": rep.threshold, "ok": rep.ok}, args.out)
    return 0 if rep.ok else 1


class _ModelShim:
    """Just enough of a witness model to re-evaluate the input at it."""

    def __init__(self, operators: OperatorTuple):
        self.operators = operators


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EX_USAGE
    try:
        if args.command in ("certify", "decompose", "witness"):
            cfg = RunConfig(command=args.command, input_path=args.input,
                            out_path=args.out, tol=args.tol, max_iter=args.max_iter,
                            degree=args.degree, delta=args.delta, seed=args.seed)
            fn = {"certify": _cmd_certify, "decompose": _cmd_decompose,
                  "witness": _cmd_witness}[args.command]
            return fn(cfg)
        if args.command == "eval":
            return _cmd_eval(args)
        if args.command == "extract":
            return _cmd_extract(args)
        if args.command == "fock-dump":
            return _cmd_fock_dump(args)
        if args.command == "spotcheck":
            return _cmd_spotcheck(args)
        raise UsageError(f"unknown command {args.command!r}")
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EX_USAGE
    except DataError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EX_DATA


if __name__ == "__main__":
    sys.exit(main())
