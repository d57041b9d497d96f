#!/usr/bin/env python3
"""Run the built-in decision fixtures end to end and print a summary table.

Writes certificate JSON files next to this script under fixtures_out/ so the
results can be inspected or re-checked with `ncsos spotcheck`.
"""

import pathlib
import sys
import time

import numpy as np

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from ncsos import jsonio
from ncsos.certify import CertifyOptions, certify, spotcheck
from ncsos.cli import _outcome_json
from ncsos.poly import NCPoly, poly_to_json
from ncsos.words import GROUP, MONOID, Word


def x(i, g=2, mode=MONOID):
    return NCPoly.monomial(Word(mode, g, (i,)))


FIXTURES = {
    "sum_of_squares": x(1) * x(1) + x(2) * x(2),
    "perfect_square": (x(1) + x(2)).adjoint() * (x(1) + x(2)),
    "one_plus_square": NCPoly.constant(1.0, 1) + x(1, g=1) * x(1, g=1),
    "group_laplacian": (NCPoly.constant(2.0, 1, GROUP) - x(1, g=1, mode=GROUP)
                        - NCPoly.monomial(Word(GROUP, 1, (-1,)))),
    "negative_one": NCPoly.constant(-1.0, 2),
    "anticommutator": x(1) * x(2) + x(2) * x(1),
    "odd_cube": x(1, g=1) * x(1, g=1) * x(1, g=1),
}


def main():
    out_dir = pathlib.Path(__file__).resolve().parent / "fixtures_out"
    out_dir.mkdir(exist_ok=True)
    opts = CertifyOptions()
    print(f"{'fixture':18s} {'outcome':10s} {'evidence':32s} {'spotcheck':10s} time")
    for name, f in FIXTURES.items():
        t0 = time.time()
        outcome = certify(f, opts)
        dt = time.time() - t0
        if outcome.kind == "sos":
            evidence = f"residual {outcome.certificate.residual:.2e}, {len(outcome.certificate.factors)} squares"
        elif outcome.kind == "witness":
            evidence = f"min eig {outcome.min_eig:.4f} at dim {outcome.model.dim}"
        else:
            evidence = f"gaps {outcome.primal.gap:.1e}/{outcome.dual.gap:.1e}"
        check = spotcheck(f, outcome, trials=100, n_max=4) if outcome.kind != "undecided" else None
        check_str = "ok" if check and check.ok else ("-" if check is None else "FAILED")
        print(f"{name:18s} {outcome.kind:10s} {evidence:32s} {check_str:10s} {dt:5.1f}s")
        (out_dir / f"{name}.input.json").write_text(jsonio.dumps(poly_to_json(f)) + "\n")
        (out_dir / f"{name}.cert.json").write_text(jsonio.dumps(_outcome_json(f, outcome)) + "\n")
    print(f"\ncertificates in {out_dir}")


if __name__ == "__main__":
    main()
