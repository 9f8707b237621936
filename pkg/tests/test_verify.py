import numpy as np
import pytest

from _randmodels import random_coherent_models
from gaussqfim import (
    InvalidArgumentError,
    MomentDerivatives,
    coherent_squeeze_rotate_model,
    displacement_model,
    model_derivatives,
    pinv,
    thermal_squeeze_rotate_model,
)
from gaussqfim.estimation import gamma, rld_operator, sld_operator
from gaussqfim.verify import (
    ResidualReport,
    closed_form,
    derivative_check,
    residuals,
    tikhonov_pinv,
)


def test_tikhonov_identity_and_rank_deficient():
    np.testing.assert_allclose(tikhonov_pinv(np.eye(3)).matrix, np.eye(3), atol=1e-9)
    t = tikhonov_pinv(np.diag([2.0, 0.0]), (1e-4, 1e-6, 1e-8))
    np.testing.assert_allclose(np.asarray(t), np.diag([0.5, 0.0]), atol=1e-8)
    assert len(t.steps) == 2 and t.converged


@pytest.mark.parametrize("deltas", [(1e-6, 1e-6), (1e-8, 1e-6), (1e-6, -1.0), ()])
def test_tikhonov_rejects_bad_ladders(deltas):
    with pytest.raises(InvalidArgumentError):
        tikhonov_pinv(np.eye(2), deltas)


def test_tikhonov_matches_closed_form_pseudoinverse():
    cf = closed_form("coherent_sr", alpha=1.0, r=0.5, phi=0.0)
    md = model_derivatives(coherent_squeeze_rotate_model(1.0, 0.5, 0.0))
    t = tikhonov_pinv(gamma(md.cov))
    np.testing.assert_allclose(t.matrix, cf["gamma_pinv"], atol=1e-6)


@pytest.mark.parametrize("spec", random_coherent_models(10, seed=4))
def test_tikhonov_agrees_with_svd_route(spec):
    cov = model_derivatives(spec).cov
    for a in (gamma(cov), rld_operator(cov), sld_operator(cov)):
        cond = np.linalg.cond(a) if np.linalg.matrix_rank(a) == a.shape[0] else 0
        if cond > 1e8:
            continue
        np.testing.assert_allclose(tikhonov_pinv(a).matrix, pinv(a), atol=1e-6)


def test_closed_form_examples():
    d = closed_form("displacement", nbar=1.0, r=0.0)
    assert (d["bound_rld"], d["bound_sld"]) == pytest.approx((4.0, 3.0))
    t = closed_form("thermal_sr", nbar=1.0, r=0.5)
    assert t["bound_rld"] == pytest.approx(0.7625454, rel=1e-6)
    assert t["bound_sld"] == pytest.approx(2 / np.tanh(1.0) ** 2 / 9, rel=1e-12)
    c = closed_form("coherent_sr", alpha=1.0, r=0.5)
    assert c["saturation_entry"] == pytest.approx(8 / np.e)


def test_closed_form_argument_errors():
    with pytest.raises(InvalidArgumentError):
        closed_form("bogus")
    with pytest.raises(InvalidArgumentError):
        closed_form("displacement", nbar=1.0)
    with pytest.raises(InvalidArgumentError):
        closed_form("thermal_sr", nbar=1.0, r=0.5, alpha=1.0)


def test_closed_form_thermal_gamma_inverse_matches_direct_inverse():
    cf = closed_form("thermal_sr", nbar=0.7, r=0.4, phi=1.1)
    cov = model_derivatives(thermal_squeeze_rotate_model(0.7, 0.4, 1.1)).cov
    np.testing.assert_allclose(cf["gamma_inv"], np.linalg.inv(gamma(cov)), atol=1e-12)


def test_residuals_thermal_all_pass():
    reports = residuals(model_derivatives(thermal_squeeze_rotate_model(1.0, 0.5, 0.3)))
    assert all(isinstance(r, ResidualReport) for r in reports)
    for r in reports:
        assert r.passed, r.describe()
        assert r.max_abs_residual < 1e-9


def test_residuals_coherent_reports_range_note():
    reports = {r.name: r for r in residuals(model_derivatives(coherent_squeeze_rotate_model(1 + 0.5j, 0.3, 0.0)))}
    assert reports["sld_relation[r]"].passed
    rld = reports["rld_relation[r]"]
    assert rld.passed and "rank 1/4" in rld.note and "out-of-range" in rld.note


def test_residuals_zero_input():
    md = MomentDerivatives([0, 0], 2 * np.eye(2), np.zeros((1, 2)), np.zeros((1, 2, 2)))
    for r in residuals(md):
        assert r.passed
        if r.name.startswith(("rld_", "sld_")):
            assert r.max_abs_residual == 0.0


def test_residuals_flag_unphysical_state():
    md = MomentDerivatives([0, 0], 0.5 * np.eye(2), np.zeros((1, 2)), np.zeros((1, 2, 2)))
    first = residuals(md)[0]
    assert first.name == "state_validity" and not first.passed
    assert "FAIL" in first.describe()


def test_report_pass_iff_within_tolerance():
    from gaussqfim.verify import _report

    assert _report("x", 1e-9, 1e-9).passed
    assert not _report("x", 2e-9, 1e-9).passed


def test_derivative_check_passes_on_builtins():
    for spec in (displacement_model(0.5, 0.3), thermal_squeeze_rotate_model(), coherent_squeeze_rotate_model()):
        assert derivative_check(spec).passed
