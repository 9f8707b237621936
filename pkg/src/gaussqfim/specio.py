"""JSON model and sweep specifications, report documents, and CSV output."""

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np

from .channels import (
    CoherentProbe,
    Element,
    ExplicitProbe,
    ModelSpec,
    ThermalProbe,
    coherent_squeeze_rotate_model,
    displacement_model,
    thermal_squeeze_rotate_model,
)
from .exceptions import InvalidArgumentError, SpecError

CSV_DIGITS = 12

PROBE_FIELDS = {
    "thermal": ("nbar",),
    "coherent": ("alpha_re", "alpha_im"),
    "explicit": ("mean", "cov"),
}
SWEEPABLE_PROBE_FIELDS = {
    "thermal": ("nbar",),
    "coherent": ("alpha_re", "alpha_im", "alpha_abs2"),
    "explicit": (),
}
SWEEP_OUTPUTS = ("B_R", "B_S", "B_MI", "ratio", "saturation_norm", "qfim_entries")


# ---------------------------------------------------------------------------
# Model specs


def _is_number(x):
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def _arg(x, path):
    if isinstance(x, str):
        if not x:
            raise SpecError("parameter name must be non-empty", path)
        return x
    if _is_number(x):
        return float(x)
    raise SpecError(f"expected a number or parameter name, got {x!r}", path)


def _parse_probe(obj, path="probe"):
    if not isinstance(obj, dict):
        raise SpecError("probe must be an object", path)
    kind = obj.get("type")
    if kind not in PROBE_FIELDS:
        raise SpecError(f"unknown probe type {kind!r}; expected one of {sorted(PROBE_FIELDS)}", f"{path}.type")
    extra = set(obj) - {"type", *PROBE_FIELDS[kind]} - ({"alpha"} if kind == "coherent" else set())
    if extra:
        raise SpecError(f"unexpected field(s) {sorted(extra)}", path)
    if kind == "thermal":
        nbar = _arg(obj.get("nbar", 0.0), f"{path}.nbar")
        if isinstance(nbar, float) and nbar < 0:
            raise SpecError(f"nbar must be >= 0, got {nbar}", f"{path}.nbar")
        return ThermalProbe(nbar)
    if kind == "coherent":
        if "alpha" in obj:
            if "alpha_re" in obj or "alpha_im" in obj:
                raise SpecError("give either alpha or alpha_re/alpha_im", path)
            a = obj["alpha"]
            if _is_number(a):
                return CoherentProbe(float(a), 0.0)
            if isinstance(a, list) and len(a) == 2:
                return CoherentProbe(_arg(a[0], f"{path}.alpha[0]"), _arg(a[1], f"{path}.alpha[1]"))
            raise SpecError("alpha must be a number or a [re, im] pair", f"{path}.alpha")
        return CoherentProbe(
            _arg(obj.get("alpha_re", 0.0), f"{path}.alpha_re"),
            _arg(obj.get("alpha_im", 0.0), f"{path}.alpha_im"),
        )
    for key in ("mean", "cov"):
        if key not in obj:
            raise SpecError(f"explicit probe needs {key!r}", path)
    mean, cov = obj["mean"], obj["cov"]
    if not isinstance(mean, list) or not all(_is_number(x) for x in mean):
        raise SpecError("mean must be a list of numbers", f"{path}.mean")
    if not isinstance(cov, list) or not all(
        isinstance(row, list) and all(_is_number(x) for x in row) for row in cov
    ):
        raise SpecError("cov must be a list of lists of numbers", f"{path}.cov")
    try:
        return ExplicitProbe(mean, cov)
    except InvalidArgumentError as exc:
        raise SpecError(str(exc), path) from None


ARITY = {"squeeze": 1, "rotate": 1, "displace": 2}


def _parse_element(obj, path):
    if not isinstance(obj, dict):
        raise SpecError("channel element must be an object", path)
    kind = obj.get("type")
    if kind not in ARITY:
        raise SpecError(f"unknown channel type {kind!r}; expected one of {sorted(ARITY)}", f"{path}.type")
    extra = set(obj) - {"type", "param", "value", "mode"}
    if extra:
        raise SpecError(f"unexpected field(s) {sorted(extra)}", path)
    has_p, has_v = "param" in obj, "value" in obj
    if has_p == has_v:
        raise SpecError("exactly one of 'param' or 'value' is required", path)
    key = "param" if has_p else "value"
    raw = obj[key]
    n = ARITY[kind]
    if n == 1:
        if isinstance(raw, list):
            raise SpecError(f"{kind} takes a single {key}", f"{path}.{key}")
        args = (_arg(raw, f"{path}.{key}"),)
    else:
        if not isinstance(raw, list) or len(raw) != n:
            raise SpecError(f"{kind} takes a list of {n} entries", f"{path}.{key}")
        args = tuple(_arg(x, f"{path}.{key}[{i}]") for i, x in enumerate(raw))
    if key == "param" and n == 1 and not isinstance(args[0], str):
        raise SpecError("'param' must be a parameter name; use 'value' for numbers", f"{path}.param")
    if key == "value" and any(isinstance(a, str) for a in args):
        raise SpecError("'value' must be numeric; use 'param' for parameter names", f"{path}.value")
    mode = obj.get("mode", 0)
    if not isinstance(mode, int) or isinstance(mode, bool) or mode < 0:
        raise SpecError(f"mode must be a non-negative integer, got {mode!r}", f"{path}.mode")
    return Element(kind, args, mode), key


def model_spec_from_obj(obj, path="$"):
    """Build a :class:`ModelSpec` from decoded JSON, reporting errors by path."""
    prefix = "" if path == "$" else f"{path}."
    if not isinstance(obj, dict):
        raise SpecError("model spec must be a JSON object", path)
    extra = set(obj) - {"probe", "channel", "parameters", "values"}
    if extra:
        raise SpecError(f"unexpected field(s) {sorted(extra)}", path)
    if "probe" not in obj:
        raise SpecError("missing 'probe'", path)
    probe = _parse_probe(obj["probe"], f"{prefix}probe")

    params = obj.get("parameters")
    if not isinstance(params, list) or not params:
        raise SpecError("'parameters' must be a non-empty list of names", f"{prefix}parameters")
    for i, p in enumerate(params):
        if not isinstance(p, str) or not p:
            raise SpecError(f"parameter name must be a non-empty string, got {p!r}", f"{prefix}parameters[{i}]")
        if p in params[:i]:
            raise SpecError(f"duplicate parameter {p!r}", f"{prefix}parameters[{i}]")
    declared = set(params)

    chain = obj.get("channel", [])
    if not isinstance(chain, list):
        raise SpecError("'channel' must be a list", f"{prefix}channel")
    elements = []
    num_modes = len(probe.mean) // 2 if isinstance(probe, ExplicitProbe) else 1
    for i, el_obj in enumerate(chain):
        el_path = f"{prefix}channel[{i}]"
        el, key = _parse_element(el_obj, el_path)
        for j, a in enumerate(el.args):
            if isinstance(a, str) and a not in declared:
                sub = f"{el_path}.{key}" if len(el.args) == 1 else f"{el_path}.{key}[{j}]"
                raise SpecError(f"undeclared parameter {a!r}", sub)
        if el.mode >= num_modes:
            raise SpecError(f"mode {el.mode} out of range for a {num_modes}-mode probe", f"{el_path}.mode")
        elements.append(el)
    for field_name, value in probe.fields().items():
        if isinstance(value, str) and value not in declared:
            raise SpecError(f"undeclared parameter {value!r}", f"{prefix}probe.{field_name}")

    values = obj.get("values", {})
    if not isinstance(values, dict):
        raise SpecError("'values' must be an object", f"{prefix}values")
    for k, v in values.items():
        if not _is_number(v):
            raise SpecError(f"value must be a finite number, got {v!r}", f"{prefix}values.{k}")
    for p in params:
        if p not in values:
            raise SpecError(f"no value given for parameter {p!r}", f"{prefix}values")
    try:
        return ModelSpec(probe, tuple(elements), tuple(params), {k: float(v) for k, v in values.items()})
    except InvalidArgumentError as exc:
        raise SpecError(str(exc), path) from None


def _load_json(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"malformed JSON: {exc.msg} (line {exc.lineno}, column {exc.colno})", "$") from None


def parse_model_spec(text):
    return model_spec_from_obj(_load_json(text))


def model_spec_to_obj(spec):
    probe = {"type": spec.probe.kind, **spec.probe.fields()}
    chain = []
    for el in spec.elements:
        args = list(el.args)
        named = any(isinstance(a, str) for a in args)
        item = {"type": el.kind}
        item["param" if named else "value"] = args[0] if len(args) == 1 else args
        if el.mode:
            item["mode"] = el.mode
        chain.append(item)
    return {
        "probe": probe,
        "channel": chain,
        "parameters": list(spec.parameters),
        "values": dict(spec.values),
    }


def emit_model_spec(spec):
    return json.dumps(model_spec_to_obj(spec), indent=2) + "\n"


# ---------------------------------------------------------------------------
# Built-in examples

EXAMPLE_DEFAULTS = {
    "displacement": {"nbar": 1.0, "r": 0.0},
    "thermal-sr": {"nbar": 1.0, "r": 0.5, "phi": 0.3},
    "coherent-sr": {"alpha_re": 1.0, "alpha_im": 0.0, "r": 0.5, "phi": 0.0},
}


def builtin_model(name, **overrides):
    """Model spec of a built-in example; unknown/irrelevant overrides are errors."""
    if name not in EXAMPLE_DEFAULTS:
        raise InvalidArgumentError(f"unknown example {name!r}; expected one of {sorted(EXAMPLE_DEFAULTS)}")
    params = dict(EXAMPLE_DEFAULTS[name])
    for key, value in overrides.items():
        if value is None:
            continue
        if key not in params:
            raise InvalidArgumentError(f"{key} does not apply to example {name!r}")
        params[key] = float(value)
    if params.get("nbar", 0.0) < 0:
        raise InvalidArgumentError(f"nbar must be >= 0, got {params['nbar']}")
    if name == "displacement":
        return displacement_model(params["nbar"], params["r"])
    if name == "thermal-sr":
        return thermal_squeeze_rotate_model(params["nbar"], params["r"], params["phi"])
    alpha = complex(params["alpha_re"], params["alpha_im"])
    return coherent_squeeze_rotate_model(alpha, params["r"], params["phi"])


# ---------------------------------------------------------------------------
# Sweeps


@dataclass(frozen=True)
class Axis:
    name: str
    start: float
    stop: float
    step: float

    def points(self):
        n = int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        return [self.start + k * self.step for k in range(n)]


@dataclass(frozen=True)
class SweepSpec:
    model: ModelSpec
    axes: tuple
    outputs: tuple
    num_measurements: int = 1


def _axis_target(model, name):
    """``("probe", field)`` or ``("value", name)`` for a sweep axis name."""
    if name.startswith("probe."):
        field_name = name[len("probe."):]
        if field_name not in SWEEPABLE_PROBE_FIELDS[model.probe.kind]:
            raise KeyError(field_name)
        return ("probe", field_name)
    if name in model.parameters or name in model.values:
        return ("value", name)
    if name in SWEEPABLE_PROBE_FIELDS[model.probe.kind]:
        return ("probe", name)
    raise KeyError(name)


def parse_sweep_spec(text):
    obj = _load_json(text)
    if not isinstance(obj, dict):
        raise SpecError("sweep spec must be a JSON object", "$")
    extra = set(obj) - {"model", "axes", "outputs", "measurements"}
    if extra:
        raise SpecError(f"unexpected field(s) {sorted(extra)}", "$")
    if "model" not in obj:
        raise SpecError("missing 'model'", "$")
    model = model_spec_from_obj(obj["model"], "model")
    axes_obj = obj.get("axes")
    if not isinstance(axes_obj, list) or not 1 <= len(axes_obj) <= 2:
        raise SpecError("'axes' must be a list of one or two axes", "axes")
    axes = []
    for i, ax in enumerate(axes_obj):
        path = f"axes[{i}]"
        if not isinstance(ax, dict):
            raise SpecError("axis must be an object", path)
        missing = {"name", "start", "stop", "step"} - set(ax)
        if missing:
            raise SpecError(f"missing field(s) {sorted(missing)}", path)
        name = ax["name"]
        if not isinstance(name, str):
            raise SpecError("axis name must be a string", f"{path}.name")
        try:
            _axis_target(model, name)
        except KeyError:
            raise SpecError(f"{name!r} is neither a model value nor a sweepable probe field", f"{path}.name") from None
        for key in ("start", "stop", "step"):
            if not _is_number(ax[key]):
                raise SpecError(f"{key} must be a finite number", f"{path}.{key}")
        if not ax["step"] > 0:
            raise SpecError("step must be > 0", f"{path}.step")
        if ax["start"] > ax["stop"]:
            raise SpecError("start must be <= stop", f"{path}.start")
        if name in [a.name for a in axes]:
            raise SpecError(f"duplicate axis {name!r}", f"{path}.name")
        axes.append(Axis(name, float(ax["start"]), float(ax["stop"]), float(ax["step"])))
    outputs = obj.get("outputs", ["B_R", "B_S", "B_MI", "ratio"])
    if not isinstance(outputs, list) or not outputs:
        raise SpecError("'outputs' must be a non-empty list", "outputs")
    for i, out in enumerate(outputs):
        if out not in SWEEP_OUTPUTS:
            raise SpecError(f"unknown output {out!r}; expected a subset of {list(SWEEP_OUTPUTS)}", f"outputs[{i}]")
    nmeas = obj.get("measurements", 1)
    if not isinstance(nmeas, int) or isinstance(nmeas, bool) or nmeas < 1:
        raise SpecError("measurements must be a positive integer", "measurements")
    return SweepSpec(model, tuple(axes), tuple(outputs), nmeas)


def model_at(model, assignments):
    """Copy of ``model`` with axis values applied (probe fields or values)."""
    values = dict(model.values)
    probe = model.probe
    for name, x in assignments:
        kind, target = _axis_target(model, name)
        if kind == "value":
            values[target] = x
            continue
        current = probe.fields()
        if target == "alpha_abs2":
            if x < 0:
                raise InvalidArgumentError(f"alpha_abs2 must be >= 0, got {x}")
            re, im = current["alpha_re"], current["alpha_im"]
            if isinstance(re, str) or isinstance(im, str):
                raise InvalidArgumentError("alpha_abs2 cannot be swept when alpha is a parameter")
            angle = math.atan2(im, re) if (re or im) else 0.0
            probe = CoherentProbe(math.sqrt(x) * math.cos(angle), math.sqrt(x) * math.sin(angle))
        elif isinstance(current[target], str):
            values[current[target]] = x
        else:
            current[target] = x
            probe = type(probe)(**current)
    return ModelSpec(probe, model.elements, model.parameters, values)


def output_columns(outputs, parameters):
    cols = []
    for out in outputs:
        if out != "qfim_entries":
            cols.append(out)
            continue
        for i, a in enumerate(parameters):
            for b in parameters[i:]:
                cols += [f"F[{a},{b}].re", f"F[{a},{b}].im"]
        for i, a in enumerate(parameters):
            for b in parameters[i:]:
                cols.append(f"H[{a},{b}]")
    return cols


def report_outputs(report, outputs):
    row = []
    params = report.parameters
    for out in outputs:
        if out == "B_R":
            row.append(report.bound_rld)
        elif out == "B_S":
            row.append(report.bound_sld)
        elif out == "B_MI":
            row.append(report.bound_mi)
        elif out == "ratio":
            row.append(report.ratio)
        elif out == "saturation_norm":
            row.append(saturation_norm(report.saturation))
        else:
            m = len(params)
            for i in range(m):
                for j in range(i, m):
                    row += [report.rld_qfim[i, j].real, report.rld_qfim[i, j].imag]
            for i in range(m):
                for j in range(i, m):
                    row.append(report.sld_qfim[i, j])
    return [float(x) for x in row]


def saturation_norm(sat):
    return float(np.max(np.abs(sat))) if np.size(sat) else 0.0


# ---------------------------------------------------------------------------
# Formatting


def format_number(x):
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, f".{CSV_DIGITS}g")


def csv_text(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([v if isinstance(v, str) else format_number(v) for v in row])
    return buf.getvalue()


def json_number(x):
    x = float(x)
    return x if math.isfinite(x) else None


def matrix_obj(a):
    a = np.asarray(a)
    if np.iscomplexobj(a):
        return {"re": [[json_number(v) for v in row] for row in a.real], "im": [[json_number(v) for v in row] for row in a.imag]}
    return [[json_number(v) for v in row] for row in a]


def report_obj(report):
    return {
        "parameters": list(report.parameters),
        "num_measurements": report.num_measurements,
        "rld_qfim": matrix_obj(report.rld_qfim),
        "sld_qfim": matrix_obj(report.sld_qfim),
        "saturation": matrix_obj(report.saturation),
        "saturation_norm": saturation_norm(report.saturation),
        "bound_rld": report.bound_rld,
        "bound_sld": report.bound_sld,
        "bound_mi": report.bound_mi,
        "ratio": report.ratio,
        "attainable": report.attainable,
        "restricted": report.restricted,
    }


def residual_obj(r):
    return {
        "name": r.name,
        "max_abs_residual": r.max_abs_residual,
        "tolerance": r.tolerance,
        "passed": r.passed,
        "note": r.note,
    }


def report_rows(report):
    """Flatten a report into ``(quantity, value)`` rows for CSV output."""
    rows = [
        ("bound_rld", report.bound_rld),
        ("bound_sld", report.bound_sld),
        ("bound_mi", report.bound_mi),
        ("ratio", report.ratio),
        ("saturation_norm", saturation_norm(report.saturation)),
        ("num_measurements", report.num_measurements),
        ("attainable", int(report.attainable)),
        ("restricted", int(report.restricted)),
    ]
    p = report.parameters
    for i, a in enumerate(p):
        for j, b in enumerate(p):
            rows.append((f"F[{a},{b}].re", report.rld_qfim[i, j].real))
            rows.append((f"F[{a},{b}].im", report.rld_qfim[i, j].imag))
    for i, a in enumerate(p):
        for j, b in enumerate(p):
            rows.append((f"H[{a},{b}]", report.sld_qfim[i, j]))
    for i, a in enumerate(p):
        for j, b in enumerate(p):
            rows.append((f"saturation[{a},{b}]", report.saturation[i, j]))
    return rows
