"""Gaussian unitary channels, parametrized model families and the
derivatives of their output moments."""

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping, Sequence, Union

import numpy as np

from .exceptions import InvalidArgumentError, UnsupportedDerivativeError
from .phase_space import GaussianState, _frozen, coherent_state, omega_matrix, thermal_state

Arg = Union[float, str]

SYMPLECTIC_TOL = 1e-10


@dataclass(frozen=True)
class GaussianUnitary:
    """Affine phase-space map ``d -> S d + shift``, ``cov -> S cov S^T``."""

    S: np.ndarray
    shift: np.ndarray

    def __post_init__(self):
        S = _frozen(self.S)
        shift = _frozen(self.shift)
        n = shift.size
        if shift.ndim != 1 or n == 0 or n % 2 or S.shape != (n, n):
            raise InvalidArgumentError(
                f"inconsistent channel shapes: S {S.shape}, shift {shift.shape}"
            )
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "shift", shift)

    @property
    def num_modes(self):
        return self.shift.size // 2

    def symplectic_residual(self):
        om = omega_matrix(self.num_modes)
        return float(np.max(np.abs(self.S @ om @ self.S.T - om)))


def _embed(block, mode, num_modes):
    if not 0 <= mode < num_modes:
        raise InvalidArgumentError(f"mode {mode} out of range for {num_modes} modes")
    full = np.eye(2 * num_modes)
    full[2 * mode:2 * mode + 2, 2 * mode:2 * mode + 2] = block
    return full


def _embed_block_only(block, mode, num_modes):
    full = np.zeros((2 * num_modes, 2 * num_modes))
    full[2 * mode:2 * mode + 2, 2 * mode:2 * mode + 2] = block
    return full


def _embed_vec(v, mode, num_modes):
    if not 0 <= mode < num_modes:
        raise InvalidArgumentError(f"mode {mode} out of range for {num_modes} modes")
    full = np.zeros(2 * num_modes)
    full[2 * mode:2 * mode + 2] = v
    return full


def _rotation_block(phi):
    c, s = np.cos(phi), np.sin(phi)
    return np.array([[c, s], [-s, c]])


def _rotation_block_dphi(phi):
    c, s = np.cos(phi), np.sin(phi)
    return np.array([[-s, c], [-c, -s]])


def _squeeze_block(r):
    return np.diag([np.exp(-r), np.exp(r)])


def _squeeze_block_dr(r):
    return np.diag([-np.exp(-r), np.exp(r)])


def identity(num_modes=1):
    return GaussianUnitary(np.eye(2 * num_modes), np.zeros(2 * num_modes))


def rotation(phi, mode=0, num_modes=1):
    """Phase-space rotation by ``phi``: ``S = [[cos, sin], [-sin, cos]]``."""
    return GaussianUnitary(_embed(_rotation_block(phi), mode, num_modes), np.zeros(2 * num_modes))


def squeeze(r, mode=0, num_modes=1):
    """Single-mode squeezer ``S = diag(exp(-r), exp(r))``."""
    return GaussianUnitary(_embed(_squeeze_block(r), mode, num_modes), np.zeros(2 * num_modes))


def displace(q0, p0, mode=0, num_modes=1):
    return GaussianUnitary(np.eye(2 * num_modes), _embed_vec([q0, p0], mode, num_modes))


def apply(u, state):
    """Push ``state`` through the channel ``u``."""
    if u.num_modes != state.num_modes:
        raise InvalidArgumentError(
            f"channel acts on {u.num_modes} modes, state has {state.num_modes}"
        )
    return GaussianState(u.S @ state.mean + u.shift, u.S @ state.cov @ u.S.T)


def compose(u2, u1):
    """The channel that applies ``u1`` first, then ``u2``."""
    if u1.num_modes != u2.num_modes:
        raise InvalidArgumentError(
            f"cannot compose channels on {u2.num_modes} and {u1.num_modes} modes"
        )
    return GaussianUnitary(u2.S @ u1.S, u2.S @ u1.shift + u2.shift)


# ---------------------------------------------------------------------------
# Model specifications


@dataclass(frozen=True)
class ThermalProbe:
    nbar: Arg = 0.0
    kind = "thermal"

    def names(self):
        return [a for a in (self.nbar,) if isinstance(a, str)]

    def fields(self):
        return {"nbar": self.nbar}


@dataclass(frozen=True)
class CoherentProbe:
    alpha_re: Arg = 0.0
    alpha_im: Arg = 0.0
    kind = "coherent"

    def names(self):
        return [a for a in (self.alpha_re, self.alpha_im) if isinstance(a, str)]

    def fields(self):
        return {"alpha_re": self.alpha_re, "alpha_im": self.alpha_im}


@dataclass(frozen=True)
class ExplicitProbe:
    """Probe given directly by numeric moments (no parameter dependence)."""

    mean: tuple
    cov: tuple
    kind = "explicit"

    def __post_init__(self):
        object.__setattr__(self, "mean", tuple(float(x) for x in self.mean))
        object.__setattr__(self, "cov", tuple(tuple(float(x) for x in row) for row in self.cov))
        GaussianState(self.mean, self.cov)  # shape check

    def names(self):
        return []

    def fields(self):
        return {"mean": list(self.mean), "cov": [list(r) for r in self.cov]}


Probe = Union[ThermalProbe, CoherentProbe, ExplicitProbe]

ELEMENT_ARITY = {"squeeze": 1, "rotate": 1, "displace": 2}


@dataclass(frozen=True)
class Element:
    """One channel in a model chain.

    ``args`` holds numbers or parameter names: one entry for ``squeeze``
    and ``rotate``, two (q, p) for ``displace``.
    """

    kind: str
    args: tuple
    mode: int = 0

    def __post_init__(self):
        if self.kind not in ELEMENT_ARITY:
            raise InvalidArgumentError(f"unknown channel element type {self.kind!r}")
        args = tuple(a if isinstance(a, str) else float(a) for a in self.args)
        if len(args) != ELEMENT_ARITY[self.kind]:
            raise InvalidArgumentError(
                f"{self.kind} takes {ELEMENT_ARITY[self.kind]} argument(s), got {len(args)}"
            )
        object.__setattr__(self, "args", args)

    def names(self):
        return [a for a in self.args if isinstance(a, str)]


def squeeze_element(r, mode=0):
    return Element("squeeze", (r,), mode)


def rotate_element(phi, mode=0):
    return Element("rotate", (phi,), mode)


def displace_element(q0, p0, mode=0):
    return Element("displace", (q0, p0), mode)


@dataclass(frozen=True)
class ModelSpec:
    """A parametrized family ``theta -> (d(theta), sigma(theta))``.

    The probe is pushed through ``elements`` in list order, so
    ``[squeeze, rotate]`` means rotate-after-squeeze. ``parameters`` are
    the estimated parameters (their order fixes the QFIM index order);
    ``values`` gives the model point.
    """

    probe: Probe
    elements: tuple = ()
    parameters: tuple = ()
    values: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        object.__setattr__(self, "parameters", tuple(self.parameters))
        object.__setattr__(
            self, "values", MappingProxyType({k: float(v) for k, v in dict(self.values).items()})
        )
        if not self.parameters:
            raise InvalidArgumentError("a model needs at least one estimated parameter")
        if len(set(self.parameters)) != len(self.parameters):
            raise InvalidArgumentError(f"duplicate parameter names in {self.parameters}")
        declared = set(self.parameters)
        for i, el in enumerate(self.elements):
            for name in el.names():
                if name not in declared:
                    raise InvalidArgumentError(
                        f"element {i} ({el.kind}) references undeclared parameter {name!r}"
                    )
        for name in self.probe.names():
            if name not in declared:
                raise InvalidArgumentError(f"probe references undeclared parameter {name!r}")

    @property
    def num_parameters(self):
        return len(self.parameters)

    @property
    def num_modes(self):
        if isinstance(self.probe, ExplicitProbe):
            return len(self.probe.mean) // 2
        return 1

    def with_values(self, **values):
        merged = dict(self.values)
        merged.update(values)
        return ModelSpec(self.probe, self.elements, self.parameters, merged)

    def with_probe(self, probe):
        return ModelSpec(probe, self.elements, self.parameters, self.values)


def _bind(spec, values):
    merged = dict(spec.values)
    if values:
        merged.update({k: float(v) for k, v in values.items()})
    missing = [p for p in spec.parameters if p not in merged]
    if missing:
        raise InvalidArgumentError(f"unbound parameter(s): {', '.join(missing)}")
    return merged


def _resolve(arg, vals):
    return vals[arg] if isinstance(arg, str) else arg


def _probe_state(probe, vals):
    if isinstance(probe, ThermalProbe):
        return thermal_state(_resolve(probe.nbar, vals))
    if isinstance(probe, CoherentProbe):
        return coherent_state(_resolve(probe.alpha_re, vals), _resolve(probe.alpha_im, vals))
    return GaussianState(probe.mean, probe.cov)


def element_unitary(el, vals, num_modes):
    a = [_resolve(x, vals) for x in el.args]
    if el.kind == "squeeze":
        return squeeze(a[0], el.mode, num_modes)
    if el.kind == "rotate":
        return rotation(a[0], el.mode, num_modes)
    return displace(a[0], a[1], el.mode, num_modes)


def model_moments(spec, values=None):
    """Evaluate the model at ``spec.values`` updated with ``values``."""
    vals = _bind(spec, values)
    state = _probe_state(spec.probe, vals)
    for el in spec.elements:
        state = apply(element_unitary(el, vals, state.num_modes), state)
    return state


@dataclass(frozen=True)
class MomentDerivatives:
    """Moments at a model point and their derivatives.

    ``d_mean[mu]`` and ``d_cov[mu]`` are the derivatives with respect to the
    ``mu``-th parameter.
    """

    mean: np.ndarray
    cov: np.ndarray
    d_mean: np.ndarray
    d_cov: np.ndarray
    parameters: tuple = ()

    def __post_init__(self):
        mean = _frozen(self.mean)
        cov = _frozen(self.cov)
        n = mean.size
        d_mean = _frozen(np.reshape(self.d_mean, (-1, n)) if np.size(self.d_mean) else np.zeros((0, n)))
        d_cov = _frozen(np.reshape(self.d_cov, (-1, n, n)) if np.size(self.d_cov) else np.zeros((0, n, n)))
        if mean.ndim != 1 or n == 0 or n % 2 or cov.shape != (n, n):
            raise InvalidArgumentError(f"inconsistent moments: mean {mean.shape}, cov {cov.shape}")
        if d_mean.shape[0] != d_cov.shape[0]:
            raise InvalidArgumentError(
                f"{d_mean.shape[0]} mean derivatives but {d_cov.shape[0]} covariance derivatives"
            )
        params = tuple(self.parameters) or tuple(f"theta{i}" for i in range(d_mean.shape[0]))
        if len(params) != d_mean.shape[0]:
            raise InvalidArgumentError(f"{len(params)} parameter names for {d_mean.shape[0]} derivatives")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "d_mean", d_mean)
        object.__setattr__(self, "d_cov", d_cov)
        object.__setattr__(self, "parameters", params)

    @property
    def num_modes(self):
        return self.mean.size // 2

    @property
    def num_parameters(self):
        return self.d_mean.shape[0]

    @property
    def state(self):
        return GaussianState(self.mean, self.cov)


def _element_jet(el, vals, num_modes, parameters):
    """Channel matrices plus ``{index: (dS, dshift)}`` for the parameters it uses."""
    u = element_unitary(el, vals, num_modes)
    zero_s = np.zeros((2 * num_modes, 2 * num_modes))
    zero_c = np.zeros(2 * num_modes)
    jet = {}
    for pos, arg in enumerate(el.args):
        if not isinstance(arg, str):
            continue
        x = vals[arg]
        if el.kind == "squeeze":
            dS = _embed_block_only(_squeeze_block_dr(x), el.mode, num_modes)
            dc = zero_c
        elif el.kind == "rotate":
            dS = _embed_block_only(_rotation_block_dphi(x), el.mode, num_modes)
            dc = zero_c
        else:
            dS = zero_s
            dc = _embed_vec(np.eye(2)[pos], el.mode, num_modes)
        mu = parameters.index(arg)
        prev = jet.get(mu, (zero_s, zero_c))
        jet[mu] = (prev[0] + dS, prev[1] + dc)
    return u, jet


def _analytic_derivatives(spec, vals):
    probe_params = spec.probe.names()
    if probe_params:
        raise UnsupportedDerivativeError(
            f"probe depends on parameter(s) {probe_params}; use mode='finite_difference'"
        )
    state = _probe_state(spec.probe, vals)
    n = state.num_modes
    m = spec.num_parameters
    d = state.mean.copy()
    s = state.cov.copy()
    dd = np.zeros((m, 2 * n))
    ds = np.zeros((m, 2 * n, 2 * n))
    for el in spec.elements:
        u, jet = _element_jet(el, vals, n, spec.parameters)
        S = u.S
        new_dd = dd @ S.T
        new_ds = np.einsum("ij,mjk,lk->mil", S, ds, S)
        for mu, (dS, dc) in jet.items():
            new_dd[mu] += dS @ d + dc
            new_ds[mu] += dS @ s @ S.T + S @ s @ dS.T
        d = S @ d + u.shift
        s = S @ s @ S.T
        dd, ds = new_dd, new_ds
    return MomentDerivatives(d, s, dd, ds, spec.parameters)


def default_step():
    return float(np.cbrt(np.finfo(float).eps))


def _fd_derivatives(spec, vals, h):
    state = model_moments(spec, vals)
    m = spec.num_parameters
    n2 = state.mean.size
    dd = np.zeros((m, n2))
    ds = np.zeros((m, n2, n2))
    for mu, name in enumerate(spec.parameters):
        x = vals[name]
        step = h * max(1.0, abs(x))
        plus = model_moments(spec, {**vals, name: x + step})
        minus = model_moments(spec, {**vals, name: x - step})
        dd[mu] = (plus.mean - minus.mean) / (2 * step)
        ds[mu] = (plus.cov - minus.cov) / (2 * step)
    return MomentDerivatives(state.mean, state.cov, dd, ds, spec.parameters)


def model_derivatives(spec, values=None, mode="analytic", h=None):
    """Moments and their parameter derivatives at a model point.

    ``mode="analytic"`` differentiates the channel chain exactly (product
    rule through every element); ``mode="finite_difference"`` uses central
    differences with step ``h * max(1, |theta|)`` (default ``h = cbrt(eps)``).
    """
    vals = _bind(spec, values)
    if mode == "analytic":
        return _analytic_derivatives(spec, vals)
    if mode == "finite_difference":
        h = default_step() if h is None else h
        if not h > 0:
            raise InvalidArgumentError(f"finite-difference step must be > 0, got {h!r}")
        return _fd_derivatives(spec, vals, h)
    raise InvalidArgumentError(f"unknown derivative mode {mode!r}")


# ---------------------------------------------------------------------------
# Built-in model families


def displacement_model(nbar=1.0, r=0.0, q0=0.0, p0=0.0):
    """Squeezed thermal probe followed by an unknown displacement ``(q0, p0)``."""
    return ModelSpec(
        ThermalProbe(nbar),
        (squeeze_element(r), displace_element("q0", "p0")),
        ("q0", "p0"),
        {"q0": q0, "p0": p0},
    )


def thermal_squeeze_rotate_model(nbar=1.0, r=0.5, phi=0.0):
    """Thermal probe, squeezing ``r`` then rotation ``phi``; estimates ``(r, phi)``."""
    return ModelSpec(
        ThermalProbe(nbar),
        (squeeze_element("r"), rotate_element("phi")),
        ("r", "phi"),
        {"r": r, "phi": phi},
    )


def coherent_squeeze_rotate_model(alpha=1.0, r=0.5, phi=0.0):
    """Coherent probe ``|alpha>``, squeezing ``r`` then rotation ``phi``."""
    alpha = complex(alpha)
    return ModelSpec(
        CoherentProbe(alpha.real, alpha.imag),
        (squeeze_element("r"), rotate_element("phi")),
        ("r", "phi"),
        {"r": r, "phi": phi},
    )
