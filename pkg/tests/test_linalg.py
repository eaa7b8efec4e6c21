import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from pframe import linalg
from pframe.errors import NoConvergence, SingularMatrix
from pframe.frame import frame_operator
from pframe.measure import mercedes_benz


def random_symmetric(rng, n, scale=1.0):
    M = scale * rng.standard_normal((n, n))
    return 0.5 * (M + M.T)


# -- eigh ---------------------------------------------------------------------


def test_eigh_identity():
    w, Q = linalg.eigh(np.eye(3))
    assert np.array_equal(w, np.ones(3))
    assert np.allclose(Q.T @ Q, np.eye(3))


def test_eigh_diagonal_orders_ascending_with_vectors():
    w, Q = linalg.eigh(np.diag([2.0, -1.0]))
    assert np.allclose(w, [-1.0, 2.0])
    assert np.allclose(Q[:, 0], [0.0, 1.0])
    assert np.allclose(Q[:, 1], [1.0, 0.0])


def test_eigh_mercedes_frame_operator():
    w, _ = linalg.eigh(frame_operator(mercedes_benz()))
    assert np.allclose(w, [0.5, 0.5], atol=1e-15)


def test_eigh_reconstruction_on_random_matrices():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        n = int(rng.integers(1, 13))
        M = random_symmetric(rng, n, scale=10.0 ** rng.uniform(-3, 3))
        w, Q = linalg.eigh(M)
        assert np.all(np.diff(w) >= 0)
        assert np.max(np.abs(Q.T @ Q - np.eye(n))) <= 1e-10
        assert np.linalg.norm(Q @ np.diag(w) @ Q.T - M) <= 1e-9 * (1 + np.linalg.norm(M))


def test_eigh_matches_numpy_eigenvalues():
    rng = np.random.default_rng(12)
    for n in range(1, 10):
        M = random_symmetric(rng, n)
        assert np.allclose(linalg.eigh(M).eigenvalues, np.linalg.eigvalsh(M), atol=1e-12)


def test_eigh_rayleigh_quotients_lie_between_extremes():
    rng = np.random.default_rng(13)
    M = random_symmetric(rng, 7)
    lo, hi = linalg.extreme_eigenvalues(M)
    for _ in range(100):
        r = rng.standard_normal(7)
        r /= np.linalg.norm(r)
        q = r @ M @ r
        assert lo - 1e-10 <= q <= hi + 1e-10


def test_eigh_sign_convention_largest_component_positive():
    rng = np.random.default_rng(14)
    _, Q = linalg.eigh(random_symmetric(rng, 6))
    idx = np.argmax(np.abs(Q), axis=0)
    assert np.all(Q[idx, np.arange(6)] > 0)


def test_eigh_is_deterministic():
    rng = np.random.default_rng(15)
    M = random_symmetric(rng, 8)
    a, b = linalg.eigh(M), linalg.eigh(M.copy())
    assert np.array_equal(a.eigenvalues, b.eigenvalues)
    assert np.array_equal(a.eigenvectors, b.eigenvectors)


def test_eigh_reports_no_convergence_with_residual():
    rng = np.random.default_rng(16)
    M = random_symmetric(rng, 6)
    with pytest.raises(NoConvergence) as info:
        linalg.eigh(M, max_sweeps=0)
    assert info.value.residual > 0


def test_eigh_longdouble_path_agrees():
    rng = np.random.default_rng(17)
    M = random_symmetric(rng, 5)
    w, Q = linalg.eigh(M, dtype=np.longdouble)
    assert np.allclose(np.asarray(w, dtype=float), linalg.eigh(M).eigenvalues, atol=1e-13)
    Qf = np.asarray(Q, dtype=float)
    assert np.allclose(Qf.T @ Qf, np.eye(5), atol=1e-14)


def test_eigh_rejects_nonsquare_and_nonfinite():
    with pytest.raises(ValueError):
        linalg.eigh(np.ones((2, 3)))
    with pytest.raises(ValueError):
        linalg.eigh(np.array([[1.0, np.nan], [np.nan, 1.0]]))


def test_symmetrize_averages_with_transpose():
    M = np.array([[1.0, 2.0], [0.0, 3.0]])
    assert np.array_equal(linalg.symmetrize(M), [[1.0, 1.0], [1.0, 3.0]])


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, (4, 4), elements=st.floats(-1e3, 1e3)))
def test_eigh_trace_and_reconstruction_property(M):
    M = 0.5 * (M + M.T)
    w, Q = linalg.eigh(M)
    assert math.isclose(w.sum(), np.trace(M), abs_tol=1e-9 * (1 + np.abs(M).max()))
    assert np.linalg.norm(Q @ np.diag(w) @ Q.T - M) <= 1e-9 * (1 + np.linalg.norm(M))


# -- inverses -----------------------------------------------------------------


def test_inverse_of_scalar_matrix():
    inv, invsqrt = linalg.inv_and_invsqrt(4.0 * np.eye(2))
    assert np.allclose(inv, 0.25 * np.eye(2), atol=1e-15)
    assert np.allclose(invsqrt, 0.5 * np.eye(2), atol=1e-15)


def test_inverse_of_mercedes_frame_operator():
    inv, invsqrt = linalg.inv_and_invsqrt(frame_operator(mercedes_benz()))
    assert np.allclose(inv, 2.0 * np.eye(2), atol=1e-14)
    assert np.allclose(invsqrt, math.sqrt(2.0) * np.eye(2), atol=1e-14)


def test_inverse_singular_carries_lambda_min():
    with pytest.raises(SingularMatrix) as info:
        linalg.inv_and_invsqrt(np.diag([1.0, 0.0]), tol=1e-10)
    assert info.value.lambda_min == pytest.approx(0.0, abs=1e-15)


def test_inverse_accurate_up_to_condition_1e8():
    rng = np.random.default_rng(18)
    for n in range(1, 9):
        for cond in (1.0, 1e4, 1e8):
            Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
            w = np.geomspace(1.0, 1.0 / cond, n) if n > 1 else np.ones(1)
            M = linalg.symmetrize((Q * w) @ Q.T)
            inv, invsqrt = linalg.inv_and_invsqrt(M)
            assert np.max(np.abs(M @ inv - np.eye(n))) <= 1e-8
            assert np.allclose(inv, inv.T)
            assert np.max(np.abs(invsqrt @ invsqrt - inv)) <= 1e-9 * np.abs(inv).max()


def test_singular_tolerance_env_override(monkeypatch):
    M = np.diag([1.0, 1e-7])
    linalg.inv_and_invsqrt(M)
    monkeypatch.setenv("PFRAME_TOL", "1e-6")
    assert linalg.singular_rtol() == 1e-6
    with pytest.raises(SingularMatrix):
        linalg.inv_and_invsqrt(M)
    monkeypatch.setenv("PFRAME_TOL", "-1")
    with pytest.raises(ValueError):
        linalg.singular_rtol()
    monkeypatch.delenv("PFRAME_TOL")
    assert linalg.singular_rtol() == linalg.DEFAULT_RTOL


# -- singular values ----------------------------------------------------------


def test_spectral_norm_examples():
    assert linalg.spectral_norm(np.zeros((3, 2))) == 0.0
    assert linalg.spectral_norm(np.diag([3.0, -5.0])) == pytest.approx(5.0, rel=1e-15)
    assert linalg.spectral_norm(np.array([[1.0], [1.0]])) == pytest.approx(math.sqrt(2.0), rel=1e-15)


def test_spectral_norm_transpose_invariant_and_matches_numpy():
    rng = np.random.default_rng(19)
    for _ in range(100):
        r, c = rng.integers(1, 9, size=2)
        M = rng.standard_normal((r, c))
        s = linalg.spectral_norm(M)
        assert abs(s - linalg.spectral_norm(M.T)) <= 1e-10
        assert s == pytest.approx(np.linalg.norm(M, 2), rel=1e-12)


def test_top_singular_triple():
    rng = np.random.default_rng(20)
    for shape in ((3, 5), (5, 3), (4, 4), (1, 3)):
        M = rng.standard_normal(shape)
        sigma, u, v = linalg.top_singular(M)
        assert sigma == pytest.approx(np.linalg.norm(M, 2), rel=1e-12)
        assert np.allclose(M @ v, sigma * u, atol=1e-12)
        assert np.linalg.norm(v) == pytest.approx(1.0)


def test_top_singular_of_zero_matrix():
    sigma, u, v = linalg.top_singular(np.zeros((2, 3)))
    assert sigma == 0.0
    assert np.linalg.norm(v) == pytest.approx(1.0)


def test_singular_values_match_numpy():
    rng = np.random.default_rng(21)
    for _ in range(50):
        r, c = rng.integers(1, 10, size=2)
        M = rng.standard_normal((r, c))
        assert np.allclose(linalg.singular_values(M), np.linalg.svd(M, compute_uv=False), atol=1e-12)


def test_singular_values_resolve_tiny_values_relative_accuracy():
    M = np.diag([1.0, 1e-13])
    sv = linalg.singular_values(M)
    assert sv[1] == pytest.approx(1e-13, rel=1e-10)
