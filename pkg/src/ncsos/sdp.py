"""Deterministic semidefinite feasibility via Dykstra's alternating projections.

Finds a Hermitian matrix in the intersection of an affine subspace (trace
pairing constraints <C_t, X> = b_t) with the psd cone, or reports
Inconclusive with the final gap.  Dykstra rather than plain alternating
projections so the limit is the nearest feasible point and stalls show up in
the correction terms; everything is deterministic for fixed inputs.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .poly import opnorm

DEFAULT_MAX_ITER = 50_000
DEFAULT_TOL = 1e-9


class SdpError(ValueError):
    pass


class InconsistentSystemError(SdpError):
    def __init__(self, residual: float):
        super().__init__(f"affine constraints are inconsistent (residual {residual:.3e})")
        self.residual = residual


@dataclass
class AffineSystem:
    """Constraints Tr(C_t X) = b_t on Hermitian m x m matrices.

    Each C_t must be Hermitian and each b_t real, so every constraint is a
    real-linear functional on the real vector space of Hermitian matrices.
    """

    m: int
    constraints: list = field(default_factory=list)  # (C_t, b_t)

    def __post_init__(self):
        cleaned = []
        for C, b in self.constraints:
            C = np.asarray(C, dtype=complex)
            if C.shape != (self.m, self.m):
                raise SdpError(f"constraint matrix has shape {C.shape}, want {(self.m, self.m)}")
            if opnorm(C - C.conj().T) > 1e-12:
                raise SdpError("constraint matrix is not Hermitian")
            b = complex(b)
            if abs(b.imag) > 1e-12:
                raise SdpError("constraint value must be real for a Hermitian pairing")
            cleaned.append((C, float(b.real)))
        self.constraints = cleaned
        self._stack = None
        self._pinv_gram = None

    def add(self, C, b):
        self.constraints.append((np.asarray(C, dtype=complex), float(b)))
        self.__post_init__()

    # cached normal-equation data ------------------------------------------

    def _prepared(self):
        if self._stack is None:
            T = len(self.constraints)
            stack = np.stack([C for C, _ in self.constraints]) if T else np.zeros((0, self.m, self.m))
            rhs = np.array([b for _, b in self.constraints])
            gram = np.einsum("sij,tji->st", stack, stack).real
            self._stack = (stack, rhs)
            self._pinv_gram = np.linalg.pinv(gram, rcond=1e-12)
        return self._stack, self._pinv_gram

    def values(self, X: np.ndarray) -> np.ndarray:
        (stack, _), _ = self._prepared()
        if len(self.constraints) == 0:
            return np.zeros(0)
        return np.einsum("tij,ji->t", stack, X).real

    def residual(self, X: np.ndarray) -> float:
        if not self.constraints:
            return 0.0
        (_, rhs), _ = self._prepared()
        return float(np.abs(self.values(X) - rhs).max())


def project_psd(X: np.ndarray) -> np.ndarray:
    """Frobenius-nearest psd matrix: clip negative eigenvalues to zero."""
    X = np.asarray(X, dtype=complex)
    H = (X + X.conj().T) / 2
    evals, evecs = np.linalg.eigh(H)
    clipped = np.maximum(evals, 0.0)
    out = (evecs * clipped) @ evecs.conj().T
    return (out + out.conj().T) / 2


def project_affine(X: np.ndarray, sys: AffineSystem,
                   eps_affine: float = 1e-7) -> np.ndarray:
    """Frobenius-orthogonal projection onto the affine solution set.

    Solves the normal equations of the constraint Gram matrix with a
    pseudo-inverse, so consistent redundant constraints are fine; an
    inconsistent system leaves a residual and raises.
    """
    X = np.asarray(X, dtype=complex)
    if not sys.constraints:
        return (X + X.conj().T) / 2
    (stack, rhs), pinv_gram = sys._prepared()
    alpha = pinv_gram @ (sys.values(X) - rhs)
    out = X - np.einsum("t,tij->ij", alpha, stack)
    out = (out + out.conj().T) / 2
    res = sys.residual(out)
    if res > eps_affine:
        raise InconsistentSystemError(res)
    return out


@dataclass
class FeasibilityResult:
    feasible: bool
    X: np.ndarray | None
    iterations: int
    final_gap: float
    residual_history: list = field(default_factory=list)  # last few (psd, affine) pairs
    last_iterate: np.ndarray | None = None  # affine-side iterate even when inconclusive

    @property
    def status(self) -> str:
        return "feasible" if self.feasible else "inconclusive"


def solve_feasibility(sys: AffineSystem,
                      max_iter: int = DEFAULT_MAX_ITER,
                      tol: float = DEFAULT_TOL,
                      trace_path: str | None = None,
                      history: int = 200) -> FeasibilityResult:
    """Dykstra between the psd cone and the affine set, from project_affine(0).

    Feasible when the iterate on the affine side has psd residual <= tol and
    affine residual <= tol; otherwise Inconclusive after max_iter.  This is a
    search, not a proof of infeasibility.
    """
    m = sys.m
    x = project_affine(np.zeros((m, m), dtype=complex), sys)
    p = np.zeros_like(x)
    q = np.zeros_like(x)
    hist: deque = deque(maxlen=history)
    trace = open(trace_path, "w") if trace_path else None
    gap = np.inf
    it = 0
    try:
        for it in range(1, max_iter + 1):
            y = project_psd(x + p)
            p = x + p - y
            x = project_affine(y + q, sys)
            q = y + q - x

            psd_res = max(0.0, -float(np.linalg.eigvalsh(x).min()))
            aff_res = sys.residual(x)
            gap = max(psd_res, aff_res)
            hist.append((psd_res, aff_res))
            if trace and it % 100 == 0:
                trace.write(json.dumps({"iter": it, "psd": psd_res, "affine": aff_res}) + "\n")
            if gap <= tol:
                return FeasibilityResult(True, x, it, gap, list(hist), x)
    finally:
        if trace:
            trace.close()
    return FeasibilityResult(False, None, it, float(gap), list(hist), x)


def verify_feasible(result: FeasibilityResult, sys: AffineSystem, tol: float) -> bool:
    """Independent re-check of a Feasible answer."""
    if not result.feasible or result.X is None:
        return False
    X = result.X
    if float(np.linalg.eigvalsh((X + X.conj().T) / 2).min()) < -tol:
        return False
    return sys.residual(X) <= tol


# -- helpers to phrase complex entry equalities as Hermitian constraints ----


def entry_constraints(m: int, i: int, j: int):
    """Hermitian C with Tr(C X) = Re X[i, j], and one with Tr(C X) = Im X[i, j]."""
    C_re = np.zeros((m, m), dtype=complex)
    C_re[i, j] += 0.5
    C_re[j, i] += 0.5
    C_im = np.zeros((m, m), dtype=complex)
    C_im[i, j] += 0.5j
    C_im[j, i] += -0.5j
    return C_re, C_im
