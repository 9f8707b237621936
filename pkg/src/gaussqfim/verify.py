"""Independent oracles: a Tikhonov-limit pseudoinverse, closed-form
expressions for the built-in model families, and defining-equation
residual reports.

None of the closed forms below call into :mod:`gaussqfim.estimation`;
they are evaluated straight from the symbolic expressions.
"""

from dataclasses import dataclass, field

import numpy as np

from . import estimation
from .exceptions import InvalidArgumentError
from .matalg import matrix_rank, penrose_residuals, pinv, unvec, vec
from .phase_space import omega_matrix, validate_state

DEFAULT_TOL = 1e-9
PENROSE_TOL = 1e-10


@dataclass(frozen=True)
class ResidualReport:
    name: str
    max_abs_residual: float
    tolerance: float
    passed: bool
    note: str = ""

    def __bool__(self):
        return self.passed

    def describe(self):
        line = (
            f"{'PASS' if self.passed else 'FAIL'} {self.name} "
            f"residual={self.max_abs_residual:.3e} tol={self.tolerance:.1e}"
        )
        return f"{line} ({self.note})" if self.note else line


def _report(name, residual, tol, note=""):
    residual = float(residual)
    return ResidualReport(name, residual, tol, bool(residual <= tol), note)


# ---------------------------------------------------------------------------
# Tikhonov pseudoinverse


@dataclass(frozen=True)
class TikhonovResult:
    """``A^dag (A A^dag + delta I)^-1`` at the smallest delta.

    ``steps[k]`` is the max-abs change between ladder rungs ``k`` and ``k+1``.
    """

    matrix: np.ndarray
    deltas: tuple
    steps: tuple = field(default_factory=tuple)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)

    @property
    def converged(self):
        return all(b <= a for a, b in zip(self.steps, self.steps[1:]))


def _tikhonov_once(a, delta):
    rows = a.shape[0]
    gram = a @ a.conj().T + delta * np.eye(rows)
    # gram is Hermitian, so A^dag gram^-1 = (gram^-1 A)^dag
    return np.linalg.solve(gram, a).conj().T


def tikhonov_pinv(a, deltas=(1e-4, 1e-6, 1e-8)):
    a = np.asarray(a)
    if a.ndim != 2:
        raise InvalidArgumentError(f"expected a matrix, got shape {a.shape}")
    deltas = tuple(float(d) for d in deltas)
    if not deltas or any(not d > 0 for d in deltas):
        raise InvalidArgumentError(f"deltas must be positive, got {deltas}")
    if any(b >= c for c, b in zip(deltas, deltas[1:])):
        raise InvalidArgumentError(f"deltas must be strictly decreasing, got {deltas}")
    approx = [_tikhonov_once(a, d) for d in deltas]
    steps = tuple(float(np.max(np.abs(y - x))) for x, y in zip(approx, approx[1:]))
    return TikhonovResult(approx[-1], deltas, steps)


# ---------------------------------------------------------------------------
# Closed forms


def _displacement(nbar, r):
    a = 2 * nbar + 1
    den = a**2 - 1
    F = np.array(
        [
            [2 * a * np.exp(2 * r) / den, -2j / den],
            [2j / den, 2 * a * np.exp(-2 * r) / den],
        ]
    )
    H = np.diag([2 * np.exp(2 * r) / a, 2 * np.exp(-2 * r) / a])
    b_r = a * np.cosh(2 * r) + 1
    b_s = a * np.cosh(2 * r)
    return {"F": F, "H": H, "bound_rld": b_r, "bound_sld": b_s, "bound_mi": b_r, "ratio": b_s / b_r}


def _thermal_sr(nbar, r, phi):
    n = nbar
    a = 1 + 2 * n
    c2r, s2r = np.cosh(2 * r), np.sinh(2 * r)
    c2p, s2p = np.cos(2 * phi), np.sin(2 * phi)
    sp, cp = np.sin(phi), np.cos(phi)
    nn = n * (1 + n)
    d_cov_phi = 2 * a * s2r * np.array([s2p, c2p, c2p, -s2p])
    d_cov_r = 2 * a * np.array(
        [
            sp**2 * np.exp(2 * r) - cp**2 * np.exp(-2 * r),
            s2p * c2r,
            s2p * c2r,
            cp**2 * np.exp(2 * r) - sp**2 * np.exp(-2 * r),
        ]
    )
    gamma_inv = np.array(
        [
            [a * 2 * (c2r + c2p * s2r) / (8 * nn), -(1j + a * s2p * s2r) / (4 * nn)],
            [(1j - a * s2p * s2r) / (4 * nn), np.exp(-2 * r) * a * (1 + c2p + 2 * np.exp(4 * r) * sp**2) / (8 * nn)],
        ]
    )
    q = 1 + 2 * nn
    F = np.array(
        [
            [a**2 * q / (2 * nn**2), 1j * a**3 * s2r / (2 * nn**2)],
            [-1j * a**3 * s2r / (2 * nn**2), q * s2r**2 / (2 * nn**2 * a**-2)],
        ]
    )
    H = np.diag([(4 * nn + 1) / nn, a**2 * s2r**2 / nn])
    coth2 = (c2r / s2r) ** 2
    b_r = (q * coth2 * s2r + 2 * a) / (2 * a**2 * s2r)
    b_s = nn * coth2 / a**2
    return {
        "d_cov_r": unvec(d_cov_r, 2),
        "d_cov_phi": unvec(d_cov_phi, 2),
        "gamma_inv": gamma_inv,
        "F": F,
        "H": H,
        "bound_rld": b_r,
        "bound_sld": b_s,
        "bound_mi": max(b_r, b_s),
        "ratio": b_s / b_r,
        "saturation": np.zeros((2, 2)),
    }


def _coherent_sr(alpha, r, phi):
    alpha = complex(alpha)
    re, im = alpha.real, alpha.imag
    mod2 = abs(alpha) ** 2
    sp, cp = np.sin(phi), np.cos(phi)
    s2r = np.sinh(2 * r)
    e = np.exp
    lp, lm = e(4 * r) + 1, e(4 * r) - 1
    d_cov_r = 2 * np.array(
        [
            sp**2 * e(2 * r) - cp**2 * e(-2 * r),
            2 * sp * cp * s2r,
            2 * sp * cp * s2r,
            cp**2 * e(2 * r) - sp**2 * e(-2 * r),
        ]
    )
    d_cov_phi = 2 * s2r * np.array([2 * sp * cp, np.cos(2 * phi), np.cos(2 * phi), -2 * sp * cp])
    d_mean_r = 2 * np.array(
        [-e(-r) * re * cp + e(r) * im * sp, e(r) * im * cp + e(-r) * re * sp]
    )
    d_mean_phi = 2 * np.array(
        [e(r) * re * cp - e(-r) * im * sp, -e(-r) * im * cp - e(r) * re * sp]
    )
    c2p, s2p = np.cos(2 * phi), np.sin(2 * phi)
    gamma_pinv = e(2 * r) * np.array(
        [
            [(lp - lm * c2p) / (2 * lp**2), (2j * e(2 * r) + lm * s2p) / (2 * lp**2)],
            [(-2j * e(2 * r) + lm * s2p) / (2 * lp**2), (lp + lm * c2p) / (2 * lp**2)],
        ]
    )
    e8 = e(8 * r)
    F = np.array(
        [
            [
                2 * ((1 + e8) ** 2 + 4 * lp**2 * (re**2 + e8 * im**2)) / lp**4,
                2 * e(2 * r) * (-1j * (lm * (1 + e8)) - 2 * lp**2 * alpha * (-1j * re + e(4 * r) * im)) / lp**4,
            ],
            [
                2 * e(2 * r) * (1j * (lm * (1 + e8)) - 2 * lp**2 * alpha.conjugate() * (1j * re + e(4 * r) * im)) / lp**4,
                2 * e(4 * r) * (lm**2 + lp**2 * mod2) / lp**4,
            ],
        ]
    )
    t4 = np.tanh(4 * r) ** 2
    H = np.array(
        [
            [2 * (4 * mod2 + t4), -16 * re * im * np.cosh(2 * r)],
            [-16 * re * im * np.cosh(2 * r), 8 * e(-4 * r) * (e8 * re**2 + im**2)],
        ]
    )
    c2r = np.cosh(2 * r)
    f = 1 + e8 * (1 + 4 * im**2) + 4 * re**2 + e(4 * r) * (4 * mod2 - 1)
    g = 8 * e(4 * r) * (im**2 - re**2)
    h = 2 * e(4 * r) * (2 * mod2 + (2 + 4 * mod2) * np.cosh(4 * r))
    k = e8 * im**2 + re**2
    b_r = (f * c2r**2 + g * c2r**3 + h * s2r) / (2 * (im**2 + e8 * re**2))
    b_s = (4 * k + e(4 * r) * (4 * mod2 + t4)) / (8 * (4 * (re**2 - e(4 * r) * im**2) ** 2 + k * t4))
    sat = 8 * (e(-2 * r) * re**2 - e(2 * r) * im**2)
    return {
        "d_cov_r": unvec(d_cov_r, 2),
        "d_cov_phi": unvec(d_cov_phi, 2),
        "d_mean_r": d_mean_r,
        "d_mean_phi": d_mean_phi,
        "gamma_pinv": gamma_pinv,
        "F": F,
        "H": H,
        "bound_rld": b_r,
        "bound_sld": b_s,
        "bound_mi": max(b_r, b_s),
        "ratio": b_s / b_r,
        "saturation_entry": sat,
        "saturation": np.array([[0.0, sat], [-sat, 0.0]]),
    }


CLOSED_FORMS = {
    "displacement": (_displacement, ("nbar", "r")),
    "thermal_sr": (_thermal_sr, ("nbar", "r", "phi")),
    "coherent_sr": (_coherent_sr, ("alpha", "r", "phi")),
}


def closed_form(name, **params):
    """Evaluate the symbolic results for a built-in model family.

    ``displacement(nbar, r)``, ``thermal_sr(nbar, r, phi)`` and
    ``coherent_sr(alpha, r, phi)``; ``phi`` defaults to 0 and ``alpha``
    may be complex. Returns a dict of arrays and scalars.
    """
    try:
        fn, names = CLOSED_FORMS[name]
    except KeyError:
        raise InvalidArgumentError(
            f"unknown closed form {name!r}; expected one of {sorted(CLOSED_FORMS)}"
        ) from None
    params = dict(params)
    if "phi" in names:
        params.setdefault("phi", 0.0)
    unknown = set(params) - set(names)
    missing = set(names) - set(params)
    if unknown or missing:
        raise InvalidArgumentError(
            f"{name} takes {names}; missing {sorted(missing)}, unexpected {sorted(unknown)}"
        )
    return fn(**params)


# ---------------------------------------------------------------------------
# Residual reports


def _relation_report(name, op, lhs_vec, rhs, tol):
    """Residual of ``op @ vec(L) = vec(rhs)`` relative to ``max(1, max|rhs|)``.

    When ``op`` is singular a range note is attached.

    For a rank-deficient operator the pseudoinverse gives the least-squares
    solution, so pass/fail is judged on the normal equations instead and the
    component of ``rhs`` outside the range is reported in the note.
    """
    b = vec(rhs)
    resid = op @ lhs_vec - b
    direct = float(np.max(np.abs(resid))) if resid.size else 0.0
    rhs_scale = max(1.0, float(np.max(np.abs(b)))) if b.size else 1.0
    rank = matrix_rank(op)
    if rank == op.shape[1]:
        return _report(name, direct / rhs_scale, tol)
    normal = float(np.max(np.abs(op.conj().T @ resid))) if resid.size else 0.0
    scale = max(1.0, float(np.max(np.abs(op)))) * rhs_scale
    note = (
        f"operator rank {rank}/{op.shape[1]}; judged on normal equations; "
        f"out-of-range component {direct:.3e}"
    )
    return _report(name, normal / scale, tol, note)


def residuals(md, tol=DEFAULT_TOL, penrose_tol=PENROSE_TOL):
    """Defining-equation, pseudoinverse and symmetry residuals for ``md``."""
    vr = validate_state(md.state)
    reports = [
        ResidualReport(
            "state_validity",
            max(0.0, -vr.min_eigenvalue, vr.symmetry_residual),
            vr.tol,
            vr.passed,
            "" if vr.passed else vr.describe(),
        )
    ]
    sigma = md.cov
    g = estimation.gamma(sigma)
    rld_op = estimation.rld_operator(sigma)
    sld_op = estimation.sld_operator(sigma)

    for label, mat in (("rld_operator", rld_op), ("gamma", g), ("sld_operator", sld_op)):
        res = penrose_residuals(mat, pinv(mat), relative=True)
        reports.append(_report(f"penrose[{label}]", max(res), penrose_tol))

    for mu, name in enumerate(md.parameters):
        rc = estimation.rld_coeffs(md, mu)
        reports.append(
            _relation_report(f"rld_relation[{name}]", rld_op, vec(rc.order2), md.d_cov[mu], tol)
        )
        sc = estimation.sld_coeffs(md, mu)
        reports.append(
            _relation_report(f"sld_relation[{name}]", sld_op, vec(sc.order2), md.d_cov[mu], tol)
        )

    F = estimation.rld_qfim_raw(md)
    H = estimation.sld_qfim_raw(md)
    f_scale = max(1.0, float(np.max(np.abs(F))))
    h_scale = max(1.0, float(np.max(np.abs(H))))
    reports.append(_report("rld_qfim_hermitian", np.max(np.abs(F - F.conj().T)) / f_scale, tol))
    reports.append(_report("sld_qfim_symmetric", np.max(np.abs(H - H.T)) / h_scale, tol))
    return reports


def rld_relation_matrix(sigma, order2):
    """``Gamma L Gamma^T``: the relation the vec solve actually satisfies."""
    g = estimation.gamma(sigma)
    return g @ order2 @ g.T


def sld_relation_matrix(sigma, order2):
    sigma = np.asarray(sigma)
    om = omega_matrix(sigma.shape[0] // 2)
    return sigma @ order2 @ sigma - om @ order2 @ om


def trace_form_rld_qfim(md):
    """RLD QFIM through ``1/2 Tr[dS G+ dS (G+)^T] + 2 dd^T G+ dd`` (no Kronecker products)."""
    gp = pinv(estimation.gamma(md.cov))
    m = md.num_parameters
    F = np.zeros((m, m), dtype=complex)
    for i in range(m):
        for j in range(m):
            F[i, j] = 0.5 * np.trace(md.d_cov[i] @ gp @ md.d_cov[j] @ gp.T) + 2.0 * md.d_mean[i] @ gp @ md.d_mean[j]
    return F


def derivative_check(spec, values=None, h=1e-5, rtol=1e-5):
    """Compare analytic and finite-difference derivatives of a model.

    The residual is ``max|analytic - fd| / max(1, max|analytic|)``.
    """
    from .channels import model_derivatives

    an = model_derivatives(spec, values, mode="analytic")
    fd = model_derivatives(spec, values, mode="finite_difference", h=h)
    scale = max(1.0, float(np.max(np.abs(an.d_cov))), float(np.max(np.abs(an.d_mean))))
    diff = max(float(np.max(np.abs(an.d_cov - fd.d_cov))), float(np.max(np.abs(an.d_mean - fd.d_mean))))
    return _report("derivatives[analytic_vs_fd]", diff / scale, rtol)
