import numpy as np
import pytest

from ncsos.sdp import (
    AffineSystem, InconsistentSystemError, SdpError, entry_constraints,
    project_affine, project_psd, solve_feasibility, verify_feasible,
)

from test_poly import rand_hermitian


def trace_system(m, value):
    return AffineSystem(m, [(np.eye(m, dtype=complex), value)])


def test_project_psd_clips():
    X = np.diag([2.0, -1.0]).astype(complex)
    assert np.allclose(project_psd(X), np.diag([2.0, 0.0]))


def test_project_psd_fixpoint():
    rng = np.random.default_rng(0)
    m = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    P = m @ m.conj().T
    assert np.linalg.norm(project_psd(P) - P) < 1e-12


def test_project_psd_nearest_point():
    rng = np.random.default_rng(1)
    X = rand_hermitian(4, rng)
    PX = project_psd(X)
    dist = np.linalg.norm(X - PX)
    for _ in range(100):
        m = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        P = m @ m.conj().T
        assert dist <= np.linalg.norm(X - P) + 1e-12


def test_project_affine_trace_hyperplane():
    sys = trace_system(2, 1.0)
    X = project_affine(np.zeros((2, 2), dtype=complex), sys)
    assert np.allclose(X, np.eye(2) / 2)


def test_project_affine_fixpoint_and_idempotent():
    rng = np.random.default_rng(2)
    sys = trace_system(3, 2.0)
    X = rand_hermitian(3, rng)
    X = X - (np.trace(X).real - 2.0) * np.eye(3) / 3  # already satisfies Tr = 2
    assert np.linalg.norm(project_affine(X, sys) - X) < 1e-12
    Y = rand_hermitian(3, rng)
    P1 = project_affine(Y, sys)
    P2 = project_affine(P1, sys)
    assert np.linalg.norm(P2 - P1) < 1e-10


def test_project_affine_entry_pinning():
    m = 3
    C_re, C_im = entry_constraints(m, 0, 1)
    sys = AffineSystem(m, [(C_re, 0.25), (C_im, -0.5)])
    X = project_affine(np.zeros((m, m), dtype=complex), sys)
    assert abs(X[0, 1] - (0.25 - 0.5j)) < 1e-10
    assert abs(X[1, 0] - (0.25 + 0.5j)) < 1e-10


def test_inconsistent_system_raises():
    sys = AffineSystem(2, [(np.eye(2, dtype=complex), 0.0),
                           (np.eye(2, dtype=complex), 1.0)])
    with pytest.raises(InconsistentSystemError):
        project_affine(np.zeros((2, 2), dtype=complex), sys)


def test_non_hermitian_constraint_rejected():
    C = np.array([[0, 1], [0, 0]], dtype=complex)
    with pytest.raises(SdpError):
        AffineSystem(2, [(C, 0.0)])


def test_feasible_trace_one():
    sys = trace_system(3, 1.0)
    res = solve_feasibility(sys, max_iter=1000, tol=1e-9)
    assert res.feasible
    assert verify_feasible(res, sys, 1e-9)
    assert abs(np.trace(res.X).real - 1.0) < 1e-9


def test_feasible_with_entry_constraints():
    # pin an off-diagonal entry and the trace; a feasible psd completion exists
    m = 3
    C_re, C_im = entry_constraints(m, 0, 1)
    sys = AffineSystem(m, [(np.eye(m, dtype=complex), 2.0), (C_re, 0.3), (C_im, 0.1)])
    res = solve_feasibility(sys, max_iter=5000, tol=1e-9)
    assert res.feasible
    X = res.X
    assert abs(X[0, 1] - (0.3 + 0.1j)) < 1e-8
    assert np.linalg.eigvalsh(X).min() > -1e-9


def test_infeasible_reports_inconclusive():
    # trace = -1 with psd is impossible
    sys = trace_system(2, -1.0)
    res = solve_feasibility(sys, max_iter=300, tol=1e-9)
    assert not res.feasible
    assert res.X is None
    assert res.final_gap > 1e-3
    assert res.iterations == 300


def test_determinism_bit_identical():
    m = 4
    C_re, C_im = entry_constraints(m, 1, 2)
    sys = AffineSystem(m, [(np.eye(m, dtype=complex), 1.0), (C_re, 0.2), (C_im, 0.0)])
    r1 = solve_feasibility(sys, max_iter=2000, tol=1e-11)
    r2 = solve_feasibility(sys, max_iter=2000, tol=1e-11)
    assert r1.iterations == r2.iterations
    assert r1.X.tobytes() == r2.X.tobytes()


def test_iteration_trace_jsonl(tmp_path):
    import json
    sys = trace_system(3, -1.0)  # infeasible, so all iterations run
    path = tmp_path / "trace.jsonl"
    solve_feasibility(sys, max_iter=500, tol=1e-15, trace_path=str(path))
    lines = path.read_text().strip().splitlines()
    assert lines
    rec = json.loads(lines[0])
    assert set(rec) == {"iter", "psd", "affine"}


def test_residuals_eventually_monotone():
    m = 3
    C_re, C_im = entry_constraints(m, 0, 2)
    sys = AffineSystem(m, [(np.eye(m, dtype=complex), 1.5), (C_re, 0.4), (C_im, -0.2)])
    res = solve_feasibility(sys, max_iter=5000, tol=1e-12)
    gaps = [max(p, a) for p, a in res.residual_history]
    slack = 10 * 1e-12
    for earlier, later in zip(gaps, gaps[1:]):
        assert later <= earlier + slack
