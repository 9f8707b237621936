"""Right and symmetric logarithmic derivatives of Gaussian models, their
quantum Fisher information matrices and the associated Cramer-Rao bounds.

Everything here works on a :class:`~gaussqfim.channels.MomentDerivatives`
bundle, i.e. on the moments ``(d, sigma)`` and their derivatives only.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import (
    InvalidArgumentError,
    NumericalConsistencyError,
    SingularCovarianceError,
    SingularQfimError,
)
from .matalg import kron, pinv, trace_abs, unvec, vec
from .phase_space import omega_matrix

HERMITIAN_TOL = 1e-9
IMAG_RESIDUE_TOL = 1e-10
ATTAINABLE_TOL = 1e-9
MAX_QFIM_COND = 1e12
MAX_COV_COND = 1e14


def gamma(sigma, omega=None):
    """``Gamma = sigma + i*Omega``."""
    sigma = np.asarray(sigma, dtype=float)
    n2 = sigma.shape[0]
    if sigma.ndim != 2 or sigma.shape != (n2, n2) or n2 % 2:
        raise InvalidArgumentError(f"sigma must be a square matrix of even size, got {sigma.shape}")
    om = omega_matrix(n2 // 2) if omega is None else np.asarray(omega, dtype=float)
    if om.shape != sigma.shape:
        raise InvalidArgumentError(f"omega shape {om.shape} does not match sigma {sigma.shape}")
    return sigma + 1j * om


def rld_operator(sigma):
    """The linear map ``Gamma^dag (x) Gamma`` acting on ``vec L``."""
    g = gamma(sigma)
    return kron(g.conj().T, g)


def sld_operator(sigma):
    """``sigma (x) sigma + Omega (x) Omega``."""
    sigma = np.asarray(sigma, dtype=float)
    om = omega_matrix(sigma.shape[0] // 2)
    return kron(sigma, sigma) + kron(om, om)


def cov_inverse(sigma):
    sigma = np.asarray(sigma, dtype=float)
    cond = np.linalg.cond(sigma)
    if not np.isfinite(cond) or cond > MAX_COV_COND:
        raise SingularCovarianceError(f"covariance matrix is singular (condition number {cond:.3g})")
    return np.linalg.inv(sigma)


@dataclass(frozen=True)
class LogDerivativeCoeffs:
    """Coefficients of ``L = order0 + order1 . x + x . order2 . x``."""

    kind: str
    order0: complex
    order1: np.ndarray
    order2: np.ndarray
    parameter: str = ""


def _check_index(md, mu):
    if not 0 <= mu < md.num_parameters:
        raise InvalidArgumentError(f"parameter index {mu} out of range (M={md.num_parameters})")


def _coeffs(op_pinv, first_inv, trace_mat, md, mu):
    d = md.mean
    n2 = d.size
    order2 = unvec(op_pinv @ vec(md.d_cov[mu]), n2)
    order1 = 2.0 * first_inv @ md.d_mean[mu] - 2.0 * order2 @ d
    order0 = -0.5 * np.trace(trace_mat @ order2) - d @ order1 - d @ order2 @ d
    return order0, order1, order2


def rld_coeffs(md, mu):
    """RLD coefficients for parameter ``mu`` (complex in general)."""
    _check_index(md, mu)
    g = gamma(md.cov)
    o0, o1, o2 = _coeffs(pinv(rld_operator(md.cov)), pinv(g), g, md, mu)
    return LogDerivativeCoeffs("RLD", complex(o0), o1, o2, md.parameters[mu])


def sld_coeffs(md, mu):
    """SLD coefficients for parameter ``mu``; real, with symmetric ``order2``."""
    _check_index(md, mu)
    sinv = cov_inverse(md.cov)
    o0, o1, o2 = _coeffs(pinv(sld_operator(md.cov)), sinv, md.cov, md, mu)
    _check_real(o2, "SLD order2")
    _check_real(o1, "SLD order1")
    _check_real(o0, "SLD order0")
    o2 = np.real(o2)
    asym = float(np.max(np.abs(o2 - o2.T))) if o2.size else 0.0
    if asym > IMAG_RESIDUE_TOL * max(1.0, float(np.max(np.abs(o2)))):
        raise NumericalConsistencyError(f"SLD order2 is not symmetric (residual {asym:.3g})")
    return LogDerivativeCoeffs("SLD", float(np.real(o0)), np.real(o1), o2, md.parameters[mu])


def _check_real(x, what):
    imag = float(np.max(np.abs(np.imag(x)))) if np.size(x) else 0.0
    if imag > IMAG_RESIDUE_TOL:
        raise NumericalConsistencyError(f"{what} has imaginary residue {imag:.3g}")


def _stack(md):
    vcov = np.array([vec(dc) for dc in md.d_cov]).reshape(md.num_parameters, -1)
    return vcov, md.d_mean


def rld_qfim_raw(md):
    """RLD QFIM exactly as the vec/pseudoinverse formula gives it (not symmetrized)."""
    vcov, dmean = _stack(md)
    op_pinv = pinv(rld_operator(md.cov))
    g_pinv = pinv(gamma(md.cov))
    return 0.5 * vcov.conj() @ op_pinv @ vcov.T + 2.0 * dmean @ g_pinv @ dmean.T


def sld_qfim_raw(md):
    vcov, dmean = _stack(md)
    sinv = cov_inverse(md.cov)
    op_pinv = pinv(sld_operator(md.cov))
    return 0.5 * vcov @ op_pinv @ vcov.T + 2.0 * dmean @ sinv @ dmean.T


def rld_qfim(md):
    """RLD quantum Fisher information matrix, complex Hermitian ``M x M``.

    Uses pseudoinverses throughout, so a singular ``Gamma`` (pure probe) is
    fine. Raises :class:`NumericalConsistencyError` if the result is not
    Hermitian to ``1e-9`` (relative to its largest entry).
    """
    F = rld_qfim_raw(md)
    scale = max(1.0, float(np.max(np.abs(F)))) if F.size else 1.0
    herm = float(np.max(np.abs(F - F.conj().T))) if F.size else 0.0
    if herm > HERMITIAN_TOL * scale:
        raise NumericalConsistencyError(f"RLD QFIM is not Hermitian (residual {herm:.3g})")
    return 0.5 * (F + F.conj().T)


def sld_qfim(md):
    """SLD quantum Fisher information matrix, real symmetric ``M x M``."""
    H = sld_qfim_raw(md)
    _check_real(H, "SLD QFIM")
    H = np.real(H)
    return 0.5 * (H + H.T)


def saturation_matrix(md):
    """``Im Tr[rho L_mu L_nu]`` for the SLDs; zero iff the SLD bound is attainable."""
    vcov, dmean = _stack(md)
    sigma = md.cov
    sinv = cov_inverse(sigma)
    om = omega_matrix(md.num_modes)
    op_pinv = pinv(sld_operator(sigma))
    mid = op_pinv @ kron(sigma, om) @ op_pinv
    U = 2.0 * vcov @ mid @ vcov.T + 2.0 * dmean @ sinv @ om @ sinv @ dmean.T
    _check_real(U, "saturation matrix")
    return np.real(U)


def _inverse_or_raise(Q, label, allow_singular, parameters):
    Q = np.asarray(Q)
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1] or Q.shape[0] == 0:
        raise InvalidArgumentError(f"{label} must be a non-empty square matrix, got shape {Q.shape}")
    _, s, vh = np.linalg.svd(Q)
    singular = s[0] == 0 or s[-1] < s[0] / MAX_QFIM_COND
    if not singular:
        return np.linalg.inv(Q), False
    if allow_singular:
        return pinv(Q), True
    cutoff = s[0] / MAX_QFIM_COND if s[0] > 0 else np.inf
    directions = vh[s <= cutoff].conj()
    names = list(parameters) if parameters is not None else None
    desc = "; ".join(_describe_direction(v, names) for v in directions)
    raise SingularQfimError(
        f"{label} is singular (condition number {s[0] / s[-1] if s[-1] else np.inf:.3g}); "
        f"unidentifiable direction(s): {desc}",
        directions=directions,
        parameters=names,
    )


def _describe_direction(v, names):
    names = names or [f"theta{i}" for i in range(v.size)]
    k = int(np.argmax(np.abs(v)))
    v = np.real_if_close(v * np.conj(v[k]) / abs(v[k]), tol=1e6)
    terms = [f"{c:+.3g}*{n}" for c, n in zip(np.atleast_1d(v), names) if abs(c) > 1e-12]
    return " ".join(terms) or "0"


def _check_measurements(num_measurements):
    if int(num_measurements) != num_measurements or num_measurements < 1:
        raise InvalidArgumentError(
            f"num_measurements must be a positive integer, got {num_measurements!r}"
        )
    return int(num_measurements)


def bound_rld(F, num_measurements=1, allow_singular=False, parameters=None):
    """``(Tr Re F^-1 + Tr|Im F^-1|) / N`` with ``|X|`` the matrix absolute value."""
    n = _check_measurements(num_measurements)
    Finv, _ = _inverse_or_raise(F, "RLD QFIM", allow_singular, parameters)
    return float((np.trace(Finv.real) + trace_abs(Finv.imag)) / n)


def bound_sld(H, num_measurements=1, allow_singular=False, parameters=None):
    """``Tr H^-1 / N``."""
    n = _check_measurements(num_measurements)
    H = np.real(np.asarray(H))
    Hinv, _ = _inverse_or_raise(H, "SLD QFIM", allow_singular, parameters)
    return float(np.trace(Hinv) / n)


def most_informative(b_r, b_s):
    """Return ``(max(b_r, b_s), b_s / b_r)``."""
    for name, b in (("b_r", b_r), ("b_s", b_s)):
        if not (np.isfinite(b) and b > 0):
            raise InvalidArgumentError(f"{name} must be finite and positive, got {b!r}")
    return float(max(b_r, b_s)), float(b_s / b_r)


@dataclass(frozen=True)
class QfimReport:
    parameters: tuple
    rld_qfim: np.ndarray
    sld_qfim: np.ndarray
    saturation: np.ndarray
    bound_rld: float
    bound_sld: float
    bound_mi: float
    ratio: float
    num_measurements: int = 1
    attainable: bool = False
    restricted: bool = False
    """True when a singular QFIM was pseudo-inverted (``allow_singular``)."""


def full_report(md, num_measurements=1, allow_singular=False):
    """All matrices and bounds for one model point."""
    n = _check_measurements(num_measurements)
    F = rld_qfim(md)
    H = sld_qfim(md)
    U = saturation_matrix(md)
    _, restricted_f = _inverse_or_raise(F, "RLD QFIM", allow_singular, md.parameters)
    _, restricted_h = _inverse_or_raise(H, "SLD QFIM", allow_singular, md.parameters)
    b_r = bound_rld(F, n, allow_singular, md.parameters)
    b_s = bound_sld(H, n, allow_singular, md.parameters)
    b_mi, ratio = most_informative(b_r, b_s)
    attainable = bool(np.max(np.abs(U)) <= ATTAINABLE_TOL) if U.size else True
    return QfimReport(
        parameters=tuple(md.parameters),
        rld_qfim=F,
        sld_qfim=H,
        saturation=U,
        bound_rld=b_r,
        bound_sld=b_s,
        bound_mi=b_mi,
        ratio=ratio,
        num_measurements=n,
        attainable=attainable,
        restricted=restricted_f or restricted_h,
    )
