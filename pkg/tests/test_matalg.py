import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gaussqfim import InvalidArgumentError, kron, penrose_residuals, pinv, trace_abs, unvec, vec
from gaussqfim.matalg import RTOL_ENV_VAR, default_rtol, matrix_rank


def test_vec_is_column_major():
    a = np.array([[1, 2], [3, 4]])
    np.testing.assert_array_equal(vec(a), [1, 3, 2, 4])
    np.testing.assert_array_equal(unvec(vec(a), 2), a)


def test_unvec_length_mismatch():
    with pytest.raises(InvalidArgumentError):
        unvec(np.arange(5), 2)


def test_vec_kron_identity():
    rng = np.random.default_rng(3)
    A, X, B = (rng.normal(size=(3, 3)) for _ in range(3))
    np.testing.assert_allclose(kron(B.T, A) @ vec(X), vec(A @ X @ B), atol=1e-12)


def test_pinv_rank_deficient_diagonal():
    np.testing.assert_allclose(pinv(np.diag([2.0, 0.0])), np.diag([0.5, 0.0]))


def test_pinv_zero_and_rectangular():
    np.testing.assert_array_equal(pinv(np.zeros((2, 3))), np.zeros((3, 2)))
    a = np.array([[1.0, 2.0, 3.0]])
    np.testing.assert_allclose(pinv(a), a.T / 14.0)


def test_pinv_matches_inverse_when_invertible():
    a = np.array([[3.0, 1j], [-1j, 3.0]])
    np.testing.assert_allclose(pinv(a), np.linalg.inv(a), atol=1e-14)


def test_pinv_rejects_nonfinite():
    with pytest.raises(InvalidArgumentError):
        pinv(np.array([[np.inf]]))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 3), st.booleans())
def test_penrose_conditions_hold(seed, rank, complex_):
    # rank-deficient matrix with singular values well away from the cutoff
    rng = np.random.default_rng(seed)
    u, _ = np.linalg.qr(rng.normal(size=(4, 4)) + (1j * rng.normal(size=(4, 4)) if complex_ else 0))
    v, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    s = np.zeros((4, 3))
    s[range(rank), range(rank)] = rng.uniform(0.1, 10, size=rank)
    a = u @ s @ v.T
    x = pinv(a)
    assert max(penrose_residuals(a, x, relative=True)) < 1e-10
    assert matrix_rank(a) == rank


def test_rank_and_env_override(monkeypatch):
    a = np.diag([1.0, 1e-9])
    assert matrix_rank(a) == 2
    monkeypatch.setenv(RTOL_ENV_VAR, "1e-6")
    assert default_rtol(a.shape) == 1e-6
    assert matrix_rank(a) == 1
    np.testing.assert_allclose(pinv(a), np.diag([1.0, 0.0]))


def test_env_override_rejects_garbage(monkeypatch):
    monkeypatch.setenv(RTOL_ENV_VAR, "tiny")
    with pytest.raises(InvalidArgumentError):
        default_rtol((2, 2))


def test_trace_abs_of_antisymmetric():
    x = np.array([[0.0, 0.25], [-0.25, 0.0]])
    # entrywise |.| would give zero trace; the matrix absolute value does not
    assert trace_abs(x) == pytest.approx(0.5)
    with pytest.raises(InvalidArgumentError):
        trace_abs(np.ones((2, 3)))
