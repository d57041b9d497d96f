"""End-to-end decision pipeline: sum-of-squares certificate or GNS witness.

The primal side searches for a psd Gram matrix matching the input
coefficients.  When that is inconclusive, the dual side searches for a
normalized positive Hankel functional that is strictly negative on the
input (margin delta, retried with smaller margins); the GNS construction
turns a successful functional into a concrete tuple at which the input has
a negative eigenvalue.  Both decisive answers carry independently checkable
evidence; near the boundary of the cone the pipeline may legitimately
return Undecided.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .gns import (
    GnsError, HankelFunctional, gns_construct, gns_construct_unitary,
    gns_verify, WitnessModel,
)
from .gram import EPS_CERT, EPS_PSD, GramMatrix, SOSCertificate, constraint_index, factor_gram
from .poly import NCPoly, OperatorTuple, opnorm, poly_eval
from .sdp import (
    AffineSystem, InconsistentSystemError, entry_constraints,
    project_affine, solve_feasibility, verify_feasible,
)
from .words import MONOID, count_words, enumerate_words, involute

GNS_VERIFY_TOL = 1e-8
EPS_PSD_GATE = EPS_PSD


class CertifyError(ValueError):
    pass


@dataclass
class CertifyOptions:
    d: int | None = None
    max_iter: int = 50_000
    tol: float = 1e-9
    eps_cert: float = EPS_CERT
    eps_wit: float = 1e-6
    delta: float = 1e-4
    delta_min: float = 1e-8
    seed: int = 1729


@dataclass
class BranchDiagnostics:
    iterations: int = 0
    gap: float = math.inf
    note: str = ""


@dataclass
class CertifyOutcome:
    kind: str  # "sos" | "witness" | "undecided"
    certificate: SOSCertificate | None = None
    model: WitnessModel | None = None
    min_eig: float | None = None
    refuted_value: complex | None = None
    primal: BranchDiagnostics = field(default_factory=BranchDiagnostics)
    dual: BranchDiagnostics = field(default_factory=BranchDiagnostics)
    degree: int = 0


def infer_degree(f: NCPoly, opts: CertifyOptions) -> int:
    d = opts.d if opts.d is not None else math.ceil(f.degree() / 2)
    if f.degree() > 2 * d:
        raise CertifyError(f"degree {f.degree()} exceeds 2*d = {2 * d}")
    return d


# -- primal: Gram feasibility ------------------------------------------------


def gram_system(f: NCPoly, d: int) -> AffineSystem:
    """Affine constraints on G forcing V_d^* G V_d = f, coefficient by
    coefficient over every product word of length <= 2d."""
    k = f.k
    n = count_words(f.g, d, f.mode)
    m = n * k
    classes = constraint_index(f.g, d, f.mode)
    constraints = []
    for u, pairs in classes.items():
        target = f.coeff(u)
        for a in range(k):
            for b in range(k):
                C_re = np.zeros((m, m), dtype=complex)
                C_im = np.zeros((m, m), dtype=complex)
                for v, w in pairs:
                    dre, dim = entry_constraints(m, v * k + a, w * k + b)
                    C_re += dre
                    C_im += dim
                constraints.append((C_re, target[a, b].real))
                if opnorm(C_im) > 1e-14:
                    constraints.append((C_im, target[a, b].imag))
                elif abs(target[a, b].imag) > 1e-12:
                    raise CertifyError("non-Hermitian coefficient pattern in input")
    return AffineSystem(m, constraints)


def _face_constraints(m: int, vectors: np.ndarray):
    """Hermitian constraints pinning X v = 0 for each null-space candidate v."""
    out = []
    for v in vectors.T:
        for i in range(m):
            raw = np.outer(v, np.eye(m, dtype=complex)[i])  # Tr(raw X) = (X v)_i
            out.append(((raw + raw.conj().T) / 2, 0.0))
            imag = 1j * raw
            out.append(((imag + imag.conj().T) / 2, 0.0))
    return out


def _interior_point_polish(sys: AffineSystem, eps_psd: float) -> np.ndarray | None:
    """Max-margin interior-point solve of the same feasibility system.

    Used only when Dykstra stalls; the answer is projected back onto the
    affine set so the coefficient constraints hold to working precision, and
    the caller re-checks psd-ness before trusting it.
    """
    try:
        import cvxpy as cp
    except ImportError:  # pragma: no cover - cvxpy is a soft dependency
        return None
    import warnings
    m = sys.m
    G = cp.Variable((m, m), hermitian=True)
    t = cp.Variable()
    cons = [G - t * cp.Constant(np.eye(m)) >> 0, t <= 1.0]
    for C, b in sys.constraints:
        cons.append(cp.real(cp.trace(cp.Constant(C) @ G)) == b)
    prob = cp.Problem(cp.Maximize(t), cons)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            try:
                prob.solve(solver="CLARABEL", tol_gap_abs=1e-11, tol_gap_rel=1e-11,
                           tol_feas=1e-11)
            except (TypeError, cp.error.SolverError):
                prob.solve(solver="CLARABEL")
    except Exception:
        return None
    if G.value is None or prob.status not in ("optimal", "optimal_inaccurate"):
        return None
    try:
        X = project_affine(np.asarray(G.value, dtype=complex), sys)
    except InconsistentSystemError:
        return None
    if float(np.linalg.eigvalsh(X).min()) < -eps_psd:
        return None
    return X


def _solve_robust(sys: AffineSystem, opts: CertifyOptions, eps_psd: float):
    """Dykstra, then face-restricted retries, then interior-point polish.

    Gram sets of polynomials that vanish somewhere sit in a face of the psd
    cone, where alternating projections converge sublinearly; the fallbacks
    recover those boundary instances.  Every answer is re-verified against
    the original system, so the extras cannot manufacture a wrong one.
    """
    res = solve_feasibility(sys, max_iter=opts.max_iter, tol=opts.tol)
    total_iters = res.iterations
    if res.feasible:
        return res.X, total_iters, res.final_gap, ""

    current = res
    augmented = sys
    for _ in range(2):
        if current.last_iterate is None:
            break
        evals, evecs = np.linalg.eigh(current.last_iterate)
        tol_face = max(10 * current.final_gap, 1e-8)
        null_vecs = evecs[:, evals < tol_face]
        if null_vecs.shape[1] == 0:
            break
        augmented = AffineSystem(sys.m,
                                 augmented.constraints + _face_constraints(sys.m, null_vecs))
        try:
            current = solve_feasibility(augmented, max_iter=opts.max_iter, tol=opts.tol)
        except InconsistentSystemError:
            break
        total_iters += current.iterations
        if current.feasible:
            if verify_feasible(current, sys, 10 * opts.tol):
                return current.X, total_iters, current.final_gap, "facial reduction"
            break

    X = _interior_point_polish(sys, eps_psd)
    if X is not None:
        return X, total_iters, 0.0, "interior-point polish"
    return None, total_iters, res.final_gap, ""


def run_primal(f: NCPoly, d: int, opts: CertifyOptions):
    sys = gram_system(f, d)
    try:
        X, iters, gap, note = _solve_robust(sys, opts, EPS_PSD_GATE)
    except InconsistentSystemError as exc:
        return None, BranchDiagnostics(0, exc.residual, "inconsistent Gram constraints")
    diag = BranchDiagnostics(iters, gap, note)
    if X is None:
        return None, diag
    G = GramMatrix(f.g, f.mode, d, f.k, X)
    cert = factor_gram(G)
    if cert.residual > opts.eps_cert:
        diag.note = f"factorization residual {cert.residual:.3e} above eps_cert"
        return None, diag
    target = cert.reconstruction() - f
    sym_residual = max((opnorm(c) for c in target.terms.values()), default=0.0)
    if sym_residual > opts.eps_cert:
        diag.note = f"reconstruction misses input by {sym_residual:.3e}"
        return None, diag
    cert.residual = max(cert.residual, sym_residual)
    return cert, diag


# -- dual: Hankel functional search -------------------------------------------


@dataclass
class _HankelLayout:
    g: int
    mode: str
    k: int
    D: int
    words: list
    classes: dict

    @property
    def n(self) -> int:
        return len(self.words)

    @property
    def m(self) -> int:
        # psd variable: the transposed-block Hankel matrix plus one slack entry
        return self.n * self.k + 1


def _hankel_layout(f: NCPoly, D: int) -> _HankelLayout:
    return _HankelLayout(f.g, f.mode, f.k, D,
                         enumerate_words(f.g, D, f.mode),
                         constraint_index(f.g, D, f.mode))


def hankel_system(f: NCPoly, layout: _HankelLayout, delta: float) -> AffineSystem:
    """Constraints: Hankel block equalities, border zeros around the slack,
    unit trace, and the margin phi(f) + slack = -delta.

    The psd variable K stores S_{v*w} with each block transposed in place,
    so entry ((v, alpha), (w, beta)) equals S_{v*w}[beta, alpha].
    """
    k, m = layout.k, layout.m
    constraints = []
    for u, pairs in layout.classes.items():
        v0, w0 = pairs[0]
        for v, w in pairs[1:]:
            for a in range(k):
                for b in range(k):
                    re0, im0 = entry_constraints(m, v0 * k + a, w0 * k + b)
                    re1, im1 = entry_constraints(m, v * k + a, w * k + b)
                    constraints.append((re1 - re0, 0.0))
                    if opnorm(im1 - im0) > 1e-14:
                        constraints.append((im1 - im0, 0.0))
    slack = m - 1
    for i in range(slack):
        re, im = entry_constraints(m, i, slack)
        constraints.append((re, 0.0))
        constraints.append((im, 0.0))
    trace = np.eye(m, dtype=complex)
    trace[slack, slack] = 0.0
    constraints.append((trace, 1.0))

    margin = np.zeros((m, m), dtype=complex)
    for u, pairs in layout.classes.items():
        F = f.coeff(u)
        if opnorm(F) == 0.0:
            continue
        v0, w0 = pairs[0]
        for a in range(k):
            for b in range(k):
                # coefficient of K[(v0, b), (w0, a)] is F[b, a]
                margin[w0 * k + a, v0 * k + b] += F[b, a]
    margin[slack, slack] = 1.0
    margin = (margin + margin.conj().T) / 2
    constraints.append((margin, -delta))
    return AffineSystem(m, constraints)


def functional_from_solution(X: np.ndarray, layout: _HankelLayout) -> HankelFunctional:
    """Read the S_u blocks back off the solved psd variable, averaging over
    each Hankel class and enforcing the Hermitian block structure exactly."""
    k = layout.k
    blocks = {}
    for u, pairs in layout.classes.items():
        acc = np.zeros((k, k), dtype=complex)
        for v, w in pairs:
            block = X[v * k:(v + 1) * k, w * k:(w + 1) * k]
            acc += block.T  # undo the in-place transpose of the storage
        blocks[u] = acc / len(pairs)
    for u in list(blocks):
        ui = involute(u)
        avg = (blocks[u] + blocks[ui].conj().T) / 2
        blocks[u] = avg
        blocks[ui] = avg.conj().T
    return HankelFunctional(g=layout.g, mode=layout.mode, k=k, D=layout.D,
                            blocks=blocks)


def run_dual(f: NCPoly, d: int, opts: CertifyOptions):
    """Margin search with delta shrinking by 10 down to delta_min."""
    D = d + 1 if f.mode == MONOID else d
    if D < 1:
        D = 1
    layout = _hankel_layout(f, D)
    diag = BranchDiagnostics()
    delta = opts.delta
    best = None
    while delta >= opts.delta_min * (1 - 1e-12):
        sys = hankel_system(f, layout, delta)
        try:
            X, iters, gap, note = _solve_robust(sys, opts, EPS_PSD_GATE)
        except InconsistentSystemError as exc:
            diag.note = f"inconsistent dual system at delta={delta:.1e}"
            diag.gap = min(diag.gap, exc.residual)
            delta /= 10
            continue
        diag.iterations += iters
        diag.gap = min(diag.gap, gap)
        if X is not None:
            K = X[:layout.n * layout.k, :layout.n * layout.k]
            S = functional_from_solution(K, layout)
            try:
                S.validate()
                model = (gns_construct(S) if f.mode == MONOID
                         else gns_construct_unitary(S))
            except GnsError as exc:
                diag.note = f"GNS failed at delta={delta:.1e}: {exc}"
                delta /= 10
                continue
            residual = gns_verify(S, model)
            if residual > GNS_VERIFY_TOL:
                diag.note = f"GNS verification residual {residual:.3e}"
                delta /= 10
                continue
            fY = poly_eval(f, model.operators)
            fY = (fY + fY.conj().T) / 2
            min_eig = float(np.linalg.eigvalsh(fY).min())
            refuted = complex(np.vdot(model.gamma, fY @ model.gamma))
            if min_eig <= -opts.eps_wit:
                return model, min_eig, refuted, diag
            best = (model, min_eig, refuted)
            diag.note = f"witness margin too small (min eig {min_eig:.3e})"
        delta /= 10
    if best is not None:
        model, min_eig, refuted = best
        diag.note = f"best witness has min eig {min_eig:.3e} above -eps_wit"
    return None, None, None, diag


# -- the decision ------------------------------------------------------------


def certify(f: NCPoly, opts: CertifyOptions | None = None) -> CertifyOutcome:
    opts = opts or CertifyOptions()
    if not f.is_hermitian():
        raise CertifyError("input polynomial is not Hermitian")
    d = infer_degree(f, opts)

    cert, primal_diag = run_primal(f, d, opts)
    if cert is not None:
        return CertifyOutcome("sos", certificate=cert, primal=primal_diag,
                              degree=d)

    model, min_eig, refuted, dual_diag = run_dual(f, d, opts)
    if model is not None:
        return CertifyOutcome("witness", model=model, min_eig=min_eig,
                              refuted_value=refuted, primal=primal_diag,
                              dual=dual_diag, degree=d)

    return CertifyOutcome("undecided", primal=primal_diag, dual=dual_diag,
                          degree=d)


# -- spot checks ---------------------------------------------------------------


@dataclass
class SpotcheckReport:
    kind: str
    trials: int
    min_eig: float
    threshold: float
    ok: bool


def _random_tuple(g: int, mode: str, n: int, rng) -> OperatorTuple:
    mats = []
    for _ in range(g):
        M = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        if mode == MONOID:
            mats.append((M + M.conj().T) / 2)
        else:
            Q, R = np.linalg.qr(M)
            mats.append(Q * (np.diag(R) / np.abs(np.diag(R))))
    return OperatorTuple(mode, mats)


def spotcheck(f: NCPoly, outcome: CertifyOutcome, trials: int = 200,
              n_max: int = 5, seed: int = 1729,
              eps_psd: float = 1e-8, eps_wit: float = 1e-6) -> SpotcheckReport:
    """Sample-based sanity check of a decision.

    SOS: the input must be psd at random self-adjoint (or unitary) tuples.
    Witness: the stored model must still exhibit a negative eigenvalue.
    """
    rng = np.random.default_rng(seed)
    if outcome.kind == "witness":
        fY = poly_eval(f, outcome.model.operators)
        fY = (fY + fY.conj().T) / 2
        low = float(np.linalg.eigvalsh(fY).min())
        return SpotcheckReport("witness", 1, low, -eps_wit, low <= -eps_wit)
    worst = math.inf
    for _ in range(trials):
        n = int(rng.integers(1, n_max + 1))
        X = _random_tuple(f.g, f.mode, n, rng)
        fX = poly_eval(f, X)
        fX = (fX + fX.conj().T) / 2
        worst = min(worst, float(np.linalg.eigvalsh(fX).min()))
    ok = worst >= -eps_psd if outcome.kind == "sos" else True
    return SpotcheckReport(outcome.kind, trials, worst, -eps_psd, ok)
