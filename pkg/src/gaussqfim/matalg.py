"""Dense matrix helpers: column-major vectorization, Kronecker products,
the Moore-Penrose pseudoinverse and the trace norm."""

import os

import numpy as np

from .exceptions import InvalidArgumentError

RTOL_ENV_VAR = "GAUSSQFIM_RTOL"


def vec(a):
    """Stack the columns of ``a`` into one vector (column-major order)."""
    a = np.asarray(a)
    return a.reshape(-1, order="F")


def unvec(v, p):
    """Inverse of :func:`vec` for a ``p x p`` matrix."""
    v = np.asarray(v)
    if v.ndim != 1 or v.size != p * p:
        raise InvalidArgumentError(f"vector of length {v.size} cannot be reshaped to {p}x{p}")
    return v.reshape((p, p), order="F")


def kron(a, b):
    return np.kron(a, b)


def default_rtol(shape, dtype=float):
    """Relative singular-value cutoff used by :func:`pinv`.

    ``GAUSSQFIM_RTOL`` overrides the default ``max(rows, cols) * eps``.
    """
    env = os.environ.get(RTOL_ENV_VAR)
    if env:
        try:
            value = float(env)
        except ValueError:
            raise InvalidArgumentError(f"{RTOL_ENV_VAR}={env!r} is not a number") from None
        if not value >= 0:
            raise InvalidArgumentError(f"{RTOL_ENV_VAR} must be >= 0, got {env!r}")
        return value
    return max(shape) * np.finfo(np.result_type(dtype, float)).eps


def pinv(a, rtol=None):
    """Moore-Penrose pseudoinverse via the SVD.

    Singular values below ``rtol * s_max`` are treated as zero. The zero
    matrix maps to the zero matrix (transposed shape).
    """
    a = np.asarray(a)
    if a.ndim != 2:
        raise InvalidArgumentError(f"pinv expects a matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidArgumentError("pinv: matrix has non-finite entries")
    if a.size == 0:
        return np.zeros(a.shape[::-1], dtype=a.dtype)
    if rtol is None:
        rtol = default_rtol(a.shape, a.dtype)
    u, s, vh = np.linalg.svd(a, full_matrices=False)
    cutoff = rtol * s[0] if s.size else 0.0
    keep = s > cutoff
    if not np.any(keep):
        return np.zeros(a.shape[::-1], dtype=np.result_type(a.dtype, float))
    inv_s = np.where(keep, 1.0 / np.where(keep, s, 1.0), 0.0)
    return (vh.conj().T * inv_s) @ u.conj().T


def matrix_rank(a, rtol=None):
    """Numerical rank under the same cutoff rule as :func:`pinv`."""
    a = np.asarray(a)
    s = np.linalg.svd(a, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    if rtol is None:
        rtol = default_rtol(a.shape, a.dtype)
    return int(np.sum(s > rtol * s[0]))


def trace_abs(a):
    """Trace norm: the sum of singular values, i.e. ``Tr sqrt(A^dag A)``."""
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidArgumentError(f"trace_abs expects a square matrix, got shape {a.shape}")
    return float(np.sum(np.linalg.svd(a, compute_uv=False)))


def penrose_residuals(a, a_pinv, relative=False):
    """Max-norm residuals of the four Penrose conditions, in order.

    ``A X A = A``, ``X A X = X``, ``(A X)^dag = A X``, ``(X A)^dag = X A``.
    With ``relative=True`` the first two are divided by ``max|A|`` and
    ``max|X|`` respectively (the last two are projector conditions and
    already scale-free).
    """
    a = np.asarray(a)
    x = np.asarray(a_pinv)
    ax = a @ x
    xa = x @ a

    def mx(m):
        return float(np.max(np.abs(m))) if m.size else 0.0

    r1, r2 = mx(ax @ a - a), mx(xa @ x - x)
    if relative:
        r1 = r1 / mx(a) if mx(a) else r1
        r2 = r2 / mx(x) if mx(x) else r2
    return (r1, r2, mx(ax.conj().T - ax), mx(xa.conj().T - xa))
