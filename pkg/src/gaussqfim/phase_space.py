"""Gaussian states in phase space.

Quadratures are ordered ``(q1, p1, ..., qN, pN)`` and scaled so that the
vacuum covariance matrix is the identity.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidArgumentError

DEFAULT_TOL = 1e-10

_OMEGA_BLOCK = np.array([[0.0, 1.0], [-1.0, 0.0]])


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SymplecticForm:
    """The 2N x 2N symplectic form, a direct sum of ``[[0, 1], [-1, 0]]``."""

    num_modes: int
    matrix: np.ndarray

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)


def omega(num_modes):
    """Return the symplectic form for ``num_modes`` modes."""
    if int(num_modes) != num_modes or num_modes < 1:
        raise InvalidArgumentError(f"num_modes must be a positive integer, got {num_modes!r}")
    n = int(num_modes)
    return SymplecticForm(n, _frozen(np.kron(np.eye(n), _OMEGA_BLOCK)))


def omega_matrix(num_modes):
    return omega(num_modes).matrix


@dataclass(frozen=True)
class GaussianState:
    """First and second moments of an N-mode Gaussian state.

    The arrays are copied and made read-only. Physicality is *not* checked
    on construction; use :func:`validate_state`.
    """

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = _frozen(self.mean)
        cov = _frozen(self.cov)
        if mean.ndim != 1 or mean.size == 0 or mean.size % 2:
            raise InvalidArgumentError(f"mean must be a vector of even length, got shape {mean.shape}")
        if cov.shape != (mean.size, mean.size):
            raise InvalidArgumentError(
                f"cov must be {mean.size}x{mean.size} to match the mean, got shape {cov.shape}"
            )
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(cov))):
            raise InvalidArgumentError("moments must be finite")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def num_modes(self):
        return self.mean.size // 2


@dataclass(frozen=True)
class ValidationReport:
    passed: bool
    min_eigenvalue: float
    """Smallest eigenvalue of the Hermitian matrix ``cov + i*Omega``."""
    min_cov_eigenvalue: float
    symmetry_residual: float
    tol: float

    def __bool__(self):
        return self.passed

    def describe(self):
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{status} state_validity min_eig(cov+i*Omega)={self.min_eigenvalue:.6g} "
            f"min_eig(cov)={self.min_cov_eigenvalue:.6g} "
            f"asym={self.symmetry_residual:.3g} tol={self.tol:g}"
        )


def validate_state(state, tol=DEFAULT_TOL, num_modes=None):
    """Check symmetry, strict positivity and the uncertainty relation.

    The state passes iff ``cov`` is symmetric within ``tol``, positive
    definite, and ``cov + i*Omega`` has no eigenvalue below ``-tol``.
    """
    if num_modes is not None and num_modes != state.num_modes:
        raise InvalidArgumentError(
            f"state has {state.num_modes} modes but {num_modes} were expected"
        )
    cov = state.cov
    asym = float(np.max(np.abs(cov - cov.T)))
    sym = 0.5 * (cov + cov.T)
    gamma = sym + 1j * omega_matrix(state.num_modes)
    min_eig = float(np.linalg.eigvalsh(gamma)[0])
    min_cov = float(np.linalg.eigvalsh(sym)[0])
    passed = asym <= tol and min_cov > 0.0 and min_eig >= -tol
    return ValidationReport(passed, min_eig, min_cov, asym, tol)


def thermal_state(nbar):
    """Single-mode thermal state with mean photon number ``nbar``."""
    if not np.isfinite(nbar) or nbar < 0:
        raise InvalidArgumentError(f"nbar must be >= 0, got {nbar!r}")
    return GaussianState(np.zeros(2), (2.0 * nbar + 1.0) * np.eye(2))


def coherent_state(alpha_re, alpha_im=0.0):
    """Single-mode coherent state ``|alpha>``; the mean is ``2 (Re a, Im a)``."""
    return GaussianState(2.0 * np.array([alpha_re, alpha_im], dtype=float), np.eye(2))


def nbar_of_beta(beta):
    """Mean photon number at inverse temperature ``beta`` (``2n+1 = coth(beta/2)``)."""
    if not beta > 0:
        raise InvalidArgumentError(f"beta must be > 0, got {beta!r}")
    if np.isinf(beta):
        return 0.0
    # (coth(x) - 1)/2 = 1/(exp(2x) - 1), stable for large x
    return float(1.0 / np.expm1(beta))
