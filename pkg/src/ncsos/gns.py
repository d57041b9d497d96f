"""GNS construction: from a positive block-Hankel functional to a concrete
finite-dimensional operator tuple and representing vector.

A functional phi on polynomials of degree <= 2D is stored through k x k
blocks S_u with phi(P u) = Tr(S_u P) and the Hermitian structure
S_{u*} = S_u^dagger.  The assembled matrix has (v, w) block S_{v* w}.

Positivity of phi on squares with matrix coefficients is equivalent to
positive semidefiniteness of the assembled matrix with every block
transposed in place (for scalar blocks the two matrices coincide).  The
quotient space is realized on that transposed matrix; with the left-Kronecker
evaluation convention the reproducing identity

    phi(q* p) = <p(Y) gamma, q(Y) gamma>

then holds exactly, with <a, b> = b^dagger a.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .poly import NCPoly, OperatorTuple, opnorm, poly_eval
from .words import GROUP, MONOID, Word, concat, count_words, enumerate_words, involute

EPS_PSD = 1e-8
EPS_NULL = 1e-10       # relative eigenvalue cutoff for the quotient
SPAN_RTOL = 1e-9       # relative rank cutoff for subspace bases
FIT_TOL = 1e-8         # well-definedness proxy for the generator action
VERIFY_SEED = 271828   # coefficients in gns_verify are drawn from this seed


class GnsError(ValueError):
    pass


class ZeroFunctionalError(GnsError):
    pass


@dataclass
class HankelFunctional:
    """Blocks u -> S_u for |u| <= 2D encoding phi(P u) = Tr(S_u P)."""

    g: int
    mode: str
    k: int
    D: int
    blocks: dict = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for u, S in self.blocks.items():
            S = np.asarray(S, dtype=complex)
            if S.shape != (self.k, self.k):
                raise GnsError(f"block for {u!r} has shape {S.shape}, want {(self.k, self.k)}")
            if len(u) > 2 * self.D:
                raise GnsError(f"block word {u!r} exceeds degree {2 * self.D}")
            clean[u] = S
        self.blocks = clean

    def block(self, u: Word) -> np.ndarray:
        try:
            return self.blocks[u]
        except KeyError:
            raise GnsError(f"missing block for word {u!r} (outside the stored support)") from None

    def phi(self, p: NCPoly) -> complex:
        """phi(p) = sum_u Tr(S_u P_u)."""
        total = 0.0 + 0.0j
        for u, P in p.terms.items():
            total += np.trace(self.block(u) @ P)
        return complex(total)

    def structure_defect(self) -> float:
        """max || S_{u*} - S_u^dagger ||."""
        worst = 0.0
        for u, S in self.blocks.items():
            other = self.blocks.get(involute(u))
            if other is None:
                raise GnsError(f"block for {involute(u)!r} is missing")
            worst = max(worst, opnorm(other - S.conj().T))
        return worst

    def validate(self, eps_psd: float = EPS_PSD):
        defect = self.structure_defect()
        if defect > 1e-9:
            raise GnsError(f"Hermitian block structure violated (defect {defect:.3e})")
        K = quotient_matrix(self, self.D)
        lo = float(np.linalg.eigvalsh(K).min())
        if lo < -eps_psd:
            raise GnsError(f"assembled functional is not psd (min eigenvalue {lo:.3e})")


def assemble(S: HankelFunctional, degree: int | None = None) -> np.ndarray:
    """The Hermitian matrix with (v, w) block S_{involute(v) w} over the
    degree-`degree` word basis."""
    D = S.D if degree is None else degree
    if D > S.D:
        raise GnsError(f"assembly degree {D} exceeds the functional degree {S.D}")
    words = enumerate_words(S.g, D, S.mode)
    k = S.k
    n = len(words)
    H = np.zeros((n * k, n * k), dtype=complex)
    for i, v in enumerate(words):
        vi = involute(v)
        for j, w in enumerate(words):
            H[i * k:(i + 1) * k, j * k:(j + 1) * k] = S.block(concat(vi, w))
    return H


def quotient_matrix(S: HankelFunctional, degree: int | None = None) -> np.ndarray:
    """assemble(S) with each k x k block transposed in place; this is the
    matrix whose psd-ness expresses positivity on matrix-coefficient squares
    and on which the quotient space is built."""
    H = assemble(S, degree)
    k = S.k
    n = H.shape[0] // k
    return H.reshape(n, k, n, k).transpose(0, 3, 2, 1).reshape(n * k, n * k)


def vec(T) -> np.ndarray:
    """Stack a map C^k -> C^m (an m x k matrix) into C^k (x) C^m.

    Component (delta, j) equals T[j, delta]; satisfies
    vdot(vec(A), vec(B)) = Tr(A^dagger B).
    """
    T = np.atleast_2d(np.asarray(T, dtype=complex))
    return T.T.reshape(-1).copy()


def unvec(x: np.ndarray, k: int) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    m = x.size // k
    return x.reshape(k, m).T


@dataclass
class WitnessModel:
    """Concrete model: tuple on C^dim and vector gamma reproducing the
    functional as phi(p) = <p(Y) gamma, gamma>."""

    mode: str
    k: int
    d: int
    dim: int
    operators: OperatorTuple
    gamma: np.ndarray
    functional: HankelFunctional
    frames: np.ndarray      # dim x (N(D) k); column block w holds the map for word w
    fit_residual: float

    def frame(self, word_index: int) -> np.ndarray:
        return self.frames[:, word_index * self.k:(word_index + 1) * self.k]

    def selfadjointness_defect(self) -> float:
        return max(opnorm(Y - Y.conj().T) for Y in self.operators.entries)

    def unitarity_defect(self) -> float:
        mats = self.operators.entries + (self.operators.inverses or [])
        return max(opnorm(U @ U.conj().T - np.eye(self.dim)) for U in mats)


def _quotient_frames(S: HankelFunctional, eps_psd: float):
    """Eigenfactor the quotient matrix: columns of the returned W give the
    images of the canonical basis tuples in the quotient space C^rank."""
    K = quotient_matrix(S, S.D)
    evals, evecs = np.linalg.eigh(K)
    if evals.min() < -eps_psd:
        raise GnsError(f"functional is not psd (min eigenvalue {evals.min():.3e})")
    top = float(evals.max(initial=0.0))
    if top <= 0.0:
        raise ZeroFunctionalError("zero functional admits no model")
    keep = evals > EPS_NULL * top
    W = (np.sqrt(evals[keep])[:, None] * evecs[:, keep].conj().T)
    return W  # rank x (N(D) k)


def _span_basis(cols: np.ndarray, rtol: float = SPAN_RTOL) -> np.ndarray:
    """Deterministic orthonormal basis of the column span (pivoted QR)."""
    if cols.size == 0:
        return np.zeros((cols.shape[0], 0), dtype=complex)
    Q, R, _ = scipy.linalg.qr(cols, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    if diag.size == 0 or diag[0] == 0.0:
        return np.zeros((cols.shape[0], 0), dtype=complex)
    rank = int(np.sum(diag > rtol * diag[0]))
    return Q[:, :rank]


def gns_construct(S: HankelFunctional, eps_psd: float = EPS_PSD) -> WitnessModel:
    """Monoid-mode model from a functional with D = d + 1.

    The quotient space is cut down to the span of tuples supported in degree
    <= d; each Y_i is the compression of the left shift, fit on the degree
    <= d generators by least squares with the fit residual checked.
    """
    if S.mode != MONOID:
        raise GnsError("use gns_construct_unitary for group-mode functionals")
    if S.D < 1:
        raise GnsError("need functional degree D >= 1")
    d = S.D - 1
    k = S.k
    words = enumerate_words(S.g, S.D, MONOID)
    idx = {w: i for i, w in enumerate(words)}
    n_low = count_words(S.g, d, MONOID)

    W = _quotient_frames(S, eps_psd)
    low_cols = W[:, :n_low * k]       # graded order puts degree <= d first
    B = _span_basis(low_cols)
    e = B.shape[1]
    if e == 0:
        raise ZeroFunctionalError("functional is zero on degree <= d; no model")

    frames = B.conj().T @ W           # e x (N(D) k)
    C = frames[:, :n_low * k]
    ys = []
    fit_residual = 0.0
    for i in range(1, S.g + 1):
        target_cols = []
        for w in words[:n_low]:
            shifted = Word(MONOID, S.g, (i,) + w.letters)
            jj = idx[shifted]
            target_cols.append(frames[:, jj * k:(jj + 1) * k])
        T = np.hstack(target_cols)
        Yi, res = _fit_action(C, T)
        fit_residual = max(fit_residual, res)
        ys.append(Yi)
    if fit_residual > FIT_TOL:
        raise GnsError(f"shift action is not well defined numerically "
                       f"(fit residual {fit_residual:.3e})")

    gamma = vec(frames[:, 0:k])
    operators = OperatorTuple(MONOID, ys)
    return WitnessModel(mode=MONOID, k=k, d=d, dim=e, operators=operators,
                        gamma=gamma, functional=S, frames=frames,
                        fit_residual=fit_residual)


def _fit_action(C: np.ndarray, T: np.ndarray):
    """Least-squares Y with Y C = T; returns (Y, fit residual)."""
    sol, *_ = np.linalg.lstsq(C.T, T.T, rcond=None)
    Y = sol.T
    res = float(np.linalg.norm(Y @ C - T))
    return Y, res


def _word_sets_group(g: int, d: int, y: int):
    """Generator words for the domain/codomain of the letter-y shift."""
    words = enumerate_words(g, d, GROUP)
    dom = [w for w in words if len(w) <= d - 1 or w.letters[0] == -y]
    cod = [w for w in words if len(w) <= d - 1 or w.letters[0] == y]
    return words, dom, cod


def gns_construct_unitary(S: HankelFunctional, eps_psd: float = EPS_PSD) -> WitnessModel:
    """Group-mode model from a functional with D = d: a 2g-tuple of unitaries.

    The shift by a letter y is isometric between the subspaces spanned by
    tuples supported on words of length <= d-1 extended by y^-1 resp. y; it
    is extended to a unitary by matching deterministic orthonormal bases of
    the two orthocomplements, mirroring the free-group Fock construction.
    """
    if S.mode != GROUP:
        raise GnsError("gns_construct_unitary expects a group-mode functional")
    d = S.D
    if d < 1:
        raise GnsError("need functional degree D >= 1")
    k = S.k
    words = enumerate_words(S.g, d, GROUP)
    idx = {w: i for i, w in enumerate(words)}

    W = _quotient_frames(S, eps_psd)
    r = W.shape[0]
    frames = W                         # the whole quotient space is the model space

    def blocks_for(ws):
        return np.hstack([frames[:, idx[w] * k:(idx[w] + 1) * k] for w in ws]) \
            if ws else np.zeros((r, 0), dtype=complex)

    def unitary_for(y: int) -> np.ndarray:
        _, dom, cod = _word_sets_group(S.g, d, y)
        G_dom = blocks_for(dom)
        G_tgt = blocks_for([concat(Word(GROUP, S.g, (y,)), w) for w in dom])
        B_dom, T_dom = _orthonormalize_with_images(G_dom, G_tgt)
        iso_defect = opnorm(T_dom.conj().T @ T_dom - np.eye(T_dom.shape[1]))
        if iso_defect > FIT_TOL:
            raise GnsError(f"letter shift is not isometric (defect {iso_defect:.3e})")
        B_cod = _span_basis(blocks_for(cod))
        if B_dom.shape[1] != B_cod.shape[1]:
            raise GnsError("domain and codomain subspaces have different dimensions")
        C_dom = _complement_basis(B_dom, frames)
        C_cod = _complement_basis(B_cod, frames)
        if C_dom.shape[1] != C_cod.shape[1]:
            raise GnsError("orthocomplements have different dimensions")
        U = T_dom @ B_dom.conj().T + C_cod @ C_dom.conj().T
        return U

    entries = [unitary_for(i) for i in range(1, S.g + 1)]
    inverses = [unitary_for(-i) for i in range(1, S.g + 1)]
    operators = OperatorTuple(GROUP, entries, inverses=inverses)

    gamma = vec(frames[:, 0:k])
    return WitnessModel(mode=GROUP, k=k, d=d, dim=r, operators=operators,
                        gamma=gamma, functional=S, frames=frames,
                        fit_residual=0.0)


def _orthonormalize_with_images(cols: np.ndarray, images: np.ndarray,
                                rtol: float = SPAN_RTOL):
    """Gram-Schmidt the columns in order, applying the same column operations
    to `images`; the image columns are then the shifts of the basis vectors."""
    m, n = cols.shape
    basis, mapped = [], []
    scale = max((np.linalg.norm(cols[:, j]) for j in range(n)), default=0.0)
    for j in range(n):
        v = cols[:, j].copy()
        t = images[:, j].copy()
        for b, tb in zip(basis, mapped):
            c = np.vdot(b, v)
            v -= c * b
            t -= c * tb
        nrm = np.linalg.norm(v)
        if nrm > rtol * max(scale, 1e-300):
            basis.append(v / nrm)
            mapped.append(t / nrm)
    if not basis:
        return (np.zeros((m, 0), dtype=complex),) * 2
    return np.column_stack(basis), np.column_stack(mapped)


def _complement_basis(B: np.ndarray, generators: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the orthocomplement of span(B) inside the span of
    `generators`, built deterministically from the generator columns in order."""
    r = generators.shape[0]
    proj = np.eye(r, dtype=complex) - B @ B.conj().T
    out = []
    scale = max((np.linalg.norm(generators[:, j]) for j in range(generators.shape[1])),
                default=0.0)
    for j in range(generators.shape[1]):
        v = proj @ generators[:, j]
        for b in out:
            v -= np.vdot(b, v) * b
        nrm = np.linalg.norm(v)
        if nrm > SPAN_RTOL * max(scale, 1e-300):
            out.append(v / nrm)
    if not out:
        return np.zeros((r, 0), dtype=complex)
    return np.column_stack(out)


def gns_verify(S: HankelFunctional, model: WitnessModel, d: int | None = None,
               rounds: int = 3, seed: int = VERIFY_SEED) -> float:
    """Max block-trace defect |Tr(S_{v*w} Q^dagger P) - <p(Y)gamma, q(Y)gamma>|
    over all basis monomial pairs and `rounds` random coefficient draws."""
    if d is None:
        d = model.d
    k = model.k
    rng = np.random.default_rng(seed)
    w_degree = d + 1 if model.mode == MONOID else d
    vs = enumerate_words(S.g, d, model.mode)
    ws = enumerate_words(S.g, w_degree, model.mode)
    worst = 0.0
    for _ in range(rounds):
        P = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
        Q = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
        for v in vs:
            q = NCPoly(S.g, model.mode, k, {v: Q})
            qg = poly_eval(q, model.operators) @ model.gamma
            for w in ws:
                p = NCPoly(S.g, model.mode, k, {w: P})
                pg = poly_eval(p, model.operators) @ model.gamma
                target = np.trace(S.block(concat(involute(v), w)) @ Q.conj().T @ P)
                got = np.vdot(qg, pg)
                worst = max(worst, abs(target - got))
    return worst


def functional_from_model(X: OperatorTuple, frame: np.ndarray, g: int,
                          D: int, mode: str) -> HankelFunctional:
    """Blocks of the state phi(p) = <p(X) vec(frame), vec(frame)>.

    Tr(S_u P) must equal vdot(vec(frame), kron(P, X^u) vec(frame)), which
    pins S_u = (frame^dagger X^u frame)^T; the transposed-block assembly is
    then a Gram matrix, hence psd.
    """
    from .poly import word_eval
    frame = np.atleast_2d(np.asarray(frame, dtype=complex))
    k = frame.shape[1]
    blocks = {}
    for u in enumerate_words(g, 2 * D, mode):
        blocks[u] = (frame.conj().T @ word_eval(u, X) @ frame).T
    return HankelFunctional(g=g, mode=mode, k=k, D=D, blocks=blocks)


def shift_defect(model: WitnessModel) -> float:
    """max || (I_k (x) Y^w) gamma - vec(frame of w) || over the stored words."""
    S = model.functional
    words = enumerate_words(S.g, S.D, S.mode)
    worst = 0.0
    for j, w in enumerate(words):
        lhs = poly_eval(NCPoly.monomial(w, np.eye(model.k)), model.operators) @ model.gamma
        rhs = vec(model.frame(j))
        worst = max(worst, float(np.linalg.norm(lhs - rhs)))
    return worst
