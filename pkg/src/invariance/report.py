"""Scenario loading, check dispatch, and report assembly.

A scenario is a JSON document with a versioned schema: it names one
check kind, a kind-specific payload, optional tolerance/seed overrides,
and an ``expect`` block of anticipated pass/fail outcomes that the
runner re-asserts.  Reports are deterministic: with timestamps disabled,
two runs over the same inputs are byte-identical.
"""

import hashlib
import json
import time as _time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from . import checks as ck
from . import frames as fr
from . import mechanics as mech
from . import ns
from . import expr as ex
from .ns import closure as ns_closure
from .checks import geometry as geo
from .sampling import DEFAULT_SEED

__all__ = ["SchemaError", "ExecutionError", "run_scenario", "run_suite",
           "KINDS"]

SCHEMA_VERSION = 1


class SchemaError(Exception):
    """The scenario file does not conform to the schema."""


class ExecutionError(Exception):
    """The check could not be executed."""


QUANTITIES = {
    "scalar_isotropic": ck.scalar_quantity,
    "gradient": ck.gradient_quantity,
    "gradient_isotropic": lambda: ck.gradient_quantity(ck.ISOTROPIC_SCALAR),
    "hessian": ck.rank2_quantity,
    "velocity": ck.velocity_quantity,
    "velocity_relative": ck.velocity_relative_quantity,
    "strain_rate": ck.strain_rate_quantity,
    "vorticity": ck.vorticity_quantity,
    "vorticity_relative": ck.vorticity_relative_quantity,
    "z_tensor": ck.z_tensor_quantity,
    "composite_norm": ck.composite_norm_quantity,
}

CLOSURE_MODELS = {
    "compliant": ns_closure.compliant_model,
    "constant_phi2": ns_closure.constant_phi2_model,
    "nu_phi2": ns_closure.nu_phi2_model,
    "bare_mean_velocity": ns_closure.bare_mean_velocity_model,
}


def _parse_ns_spec(d):
    tag = d.get("tag")
    if tag == "G":
        a = np.eye(3)
        if "a_rotation" in d:
            ar = d["a_rotation"]
            a = fr.RotationSpec(axis=ar["axis"]).matrix(float(ar["angle"]))
        return fr.ns_galilei(c0=d.get("c0", 0.0), a_mat=a,
                             c1=d.get("c1"), c2=d.get("c2"))
    if tag == "S1":
        return fr.ns_s1(float(d["eps"]))
    if tag == "S2":
        f = [ex.parse_field_expr(s) for s in d["f"]]
        g = ex.parse_field_expr(d["g"]) if "g" in d else None
        return fr.ns_s2(f, g)
    if tag == "S3":
        return fr.ns_s3(int(d["axis"]) - 1)
    if tag == "S4":
        return fr.ns_s4()
    if tag == "S5":
        return fr.ns_s5(float(d["a"]))
    if tag == "S6":
        return fr.ns_s6(float(d["omega"]))
    if tag == "R3D":
        return fr.ns_rotation_3d(d.get("axis", (0.0, 0.0, 1.0)),
                                 float(d["rate"]))
    raise SchemaError("unknown symmetry tag %r" % tag)


def _parts_of(verdict):
    parts, residuals = {}, {}
    for name in ("tensor", "objective", "relative_objective", "symmetry"):
        part = getattr(verdict, name)
        if part is not None:
            parts[name] = bool(part.passed)
            residuals[name] = float(part.residual)
    return parts, residuals


# ---------------------------------------------------------------------------
# kind runners: each returns (parts, residuals, details)
# ---------------------------------------------------------------------------

def _run_classify(payload, tol, seed):
    name = payload.get("quantity")
    if name not in QUANTITIES:
        raise SchemaError("unknown quantity %r" % name)
    q = QUANTITIES[name]()
    specs = ck.random_rotations(int(payload.get("rotations", 10)), seed=seed)
    mode = payload.get("mode")
    if mode is not None and not q.relative:
        v = ck.check_objectivity(q, specs, tol=tol, seed=seed, mode=mode)
    else:
        v = ck.classify(q, specs, tol=tol, seed=seed,
                        objectivity_mode=mode)
    parts, residuals = _parts_of(v)
    return parts, residuals, {"witness": v.as_dict().get("witness"),
                              "notes": list(v.notes)}


def _run_christoffel(payload, tol, seed):
    chart_name = payload.get("chart")
    if chart_name not in geo.CHARTS:
        raise SchemaError("unknown chart %r" % chart_name)
    chart = geo.CHARTS[chart_name]
    which = payload.get("check", "transform")
    if which == "transform":
        pts = chart.sample(int(payload.get("points", 50)), seed)
        got = geo.christoffel_transform(np.zeros((3, 3, 3)), chart, pts)
        ref = geo.closed_form_christoffel(chart_name, pts)
        res = float(np.max(np.abs(got - ref)))
        return ({"match": res <= tol}, {"match": res},
                {"points": int(pts.shape[1])})
    if which == "covariant_derivative":
        phi = ex.parse_field_expr(payload.get("field", "dot(x, x)"))
        out = geo.check_covariant_derivative(ex.grad(phi), chart,
                                             int(payload.get("points", 50)),
                                             tol, seed)
        return ({"covariant": out["covariant"].passed,
                 "partial": out["partial"].passed},
                {"covariant": out["covariant"].residual,
                 "partial": out["partial"].residual}, {})
    raise SchemaError("unknown christoffel check %r" % which)


def _run_geometric_suite(payload, tol, seed):
    cases = geo.geometric_invariance_suite(
        int(payload.get("points", 100)), tol, seed)
    parts = {c["case"]: c["passed"] for c in cases}
    residuals = {c["case"]: c["residual"] for c in cases}
    return parts, residuals, {"cases": cases}


def _mechanics_model(payload):
    name = payload.get("model", "oscillator")
    params = payload.get("params", {})
    if name == "oscillator":
        return mech.oscillator_model(**params)
    if name == "drag_gravity":
        return mech.drag_gravity_model(**params)
    if name == "absolute_velocity":
        return mech.absolute_velocity_model(**params)
    raise SchemaError("unknown mechanics model %r" % name)


def _run_mechanics(payload, tol, seed):
    model = _mechanics_model(payload)
    check = payload.get("check")
    dt = float(payload.get("dt", 1e-3))
    steps = int(payload.get("steps", 1000))
    if check == "oscillator_reference":
        traj = mech.integrate(model, (np.array([1.0, 0, 0]),
                                      np.zeros(3), 0.0), dt, steps)
        res = float(np.max(np.abs(traj.x[0] - np.cos(traj.t))))
        return {"reference": res <= tol}, {"reference": res}, {}
    if check == "terminal_speed":
        traj = mech.integrate(model, (np.zeros(3), np.zeros(3), 0.0),
                              dt, steps)
        expected = payload.get("expected_vz", -1.0)
        res = float(abs(traj.v[2, -1] - expected))
        return ({"terminal": res <= tol}, {"terminal": res},
                {"vz": float(traj.v[2, -1])})
    if check == "frame_indifference":
        rng = np.random.default_rng(seed)
        spec = fr.GalileiSpec.random(rng)
        v = mech.check_force_frame_indifference(
            model, spec, tol=tol, seed=seed,
            transport_refs=payload.get("transport_refs", True))
        return ({"frame_indifference": v.objective.passed},
                {"frame_indifference": v.objective.residual}, {})
    if check == "galilei_covariance":
        rng = np.random.default_rng(seed)
        spec = fr.GalileiSpec.random(rng)
        ic = (np.array(payload.get("x0", [0.3, -0.2, 0.1])),
              np.array(payload.get("v0", [0.2, 0.1, 0.0])), 0.0)
        v = mech.check_galilei_covariance(model, spec, ic, dt, steps)
        return ({"covariance": v.objective.passed},
                {"covariance": v.objective.residual}, {})
    if check == "noninertial_closure":
        rot = payload.get("rotation", {"axis": [0, 0, 1], "rate": 0.5})
        spec = fr.EuclideanSpec(rotation=fr.RotationSpec(
            axis=rot["axis"], rate=float(rot["rate"])))
        ic = (np.array(payload.get("x0", [0.5, 0.2, 0.0])),
              np.array(payload.get("v0", [0.1, 0.0, 0.0])), 0.0)
        traj = mech.integrate(model, ic, dt, steps)
        v = mech.check_noninertial_closure(
            model, spec, traj, tol=tol,
            include_drag_term=payload.get("include_drag_term", True),
            drag_coeff=float(payload.get("drag_coeff", 1.0)))
        return ({"closure": v.objective.passed},
                {"closure": v.objective.residual}, {"notes": list(v.notes)})
    raise SchemaError("unknown mechanics check %r" % check)


def _run_ns_symmetry(payload, tol, seed):
    sol = payload.get("solution")
    if sol not in ns.SOLUTIONS:
        raise SchemaError("unknown solution %r" % sol)
    state = ns.SOLUTIONS[sol]()
    spec = _parse_ns_spec(payload.get("symmetry", {}))
    v = ns.check_ns_symmetry(state, spec, tol=tol, seed=seed)
    parts, residuals = _parts_of(v)
    return parts, residuals, {"notes": list(v.notes), "solution": sol}


def _run_decomposed(payload, tol, seed):
    ensemble = ns.Ensemble.random(int(payload.get("members", 4096)))
    spec = _parse_ns_spec(payload.get("symmetry", {}))
    v = ns.check_decomposed_symmetry(ensemble, spec, tol=tol, seed=seed)
    parts, residuals = _parts_of(v)
    return parts, residuals, {"notes": list(v.notes)}


def _run_closure_screen(payload, tol, seed):
    name = payload.get("model")
    if name not in CLOSURE_MODELS:
        raise SchemaError("unknown closure model %r" % name)
    model = CLOSURE_MODELS[name]()
    tags = tuple(payload.get("tags",
                             ("G", "S1", "S3", "S4", "S6approx")))
    reports = ns_closure.screen_closure(model, tags=tags, seed=seed)
    parts = {tag: v.symmetry.passed for tag, v in reports.items()}
    residuals = {tag: v.symmetry.residual for tag, v in reports.items()}
    return parts, residuals, {"model": name}


KINDS = {
    "tensor": _run_classify,
    "objectivity": _run_classify,
    "relative": _run_classify,
    "christoffel": _run_christoffel,
    "geometric-suite": _run_geometric_suite,
    "mechanics": _run_mechanics,
    "ns-symmetry": _run_ns_symmetry,
    "decomposed": _run_decomposed,
    "closure-screen": _run_closure_screen,
}

_DEFAULT_TOLS = {
    "decomposed": 1e-12,
    "closure-screen": 1e-10,
    "geometric-suite": 1e-10,
    "mechanics": 1e-6,
}


def _load(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError("cannot read scenario %s: %s" % (path, exc))
    return doc


def _validate(doc):
    if not isinstance(doc, dict):
        raise SchemaError("scenario must be a JSON object")
    if doc.get("schema") != SCHEMA_VERSION:
        raise SchemaError("unsupported schema version %r"
                          % doc.get("schema"))
    if not isinstance(doc.get("name"), str) or not doc["name"]:
        raise SchemaError("scenario needs a nonempty 'name'")
    if doc.get("kind") not in KINDS:
        raise SchemaError("unknown check kind %r" % doc.get("kind"))
    if not isinstance(doc.get("payload", {}), dict):
        raise SchemaError("'payload' must be an object")
    if not isinstance(doc.get("expect", {}), dict):
        raise SchemaError("'expect' must be an object")
    return doc


def run_scenario(path, tol=None, seed=None, no_timestamp=False):
    """Run one scenario file and return (report dict, exit code)."""
    try:
        doc = _validate(_load(path))
    except SchemaError as exc:
        return {"scenario": str(path), "error": str(exc),
                "error_kind": "schema"}, 2

    raw = json.dumps(doc, sort_keys=True).encode()
    digest = hashlib.sha256(raw).hexdigest()
    kind = doc["kind"]
    tolerance = (tol if tol is not None
                 else doc.get("tolerance", _DEFAULT_TOLS.get(kind, 1e-9)))
    seed_used = seed if seed is not None else doc.get("seed", DEFAULT_SEED)
    started = _time.time()
    try:
        parts, residuals, details = KINDS[kind](doc.get("payload", {}),
                                                tolerance, seed_used)
    except SchemaError as exc:
        return {"scenario": doc["name"], "error": str(exc),
                "error_kind": "schema"}, 2
    except Exception as exc:  # structured execution failure, not a verdict
        return {"scenario": doc["name"], "error": str(exc),
                "error_kind": "execution"}, 3

    expect = doc.get("expect", {})
    mismatches = sorted(k for k, v in expect.items()
                        if parts.get(k) is not bool(v))
    report = {
        "scenario": doc["name"],
        "kind": kind,
        "tolerance": tolerance,
        "seed": seed_used,
        "parts": parts,
        "residuals": residuals,
        "details": details,
        "expect": expect,
        "expectation_met": not mismatches,
        "mismatches": mismatches,
        "version": __version__,
        "input_digest": "sha256:" + digest,
        "runtime_s": 0.0 if no_timestamp else round(_time.time() - started,
                                                    6),
        "timestamp": 0.0 if no_timestamp else round(started, 6),
    }
    return report, 0


def run_suite(paths, tol=None, seed=None, no_timestamp=False, jobs=1):
    """Run many scenarios; reports merged deterministically by name."""
    paths = sorted(str(p) for p in paths)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(
                lambda p: run_scenario(p, tol, seed, no_timestamp), paths))
    else:
        results = [run_scenario(p, tol, seed, no_timestamp) for p in paths]
    reports = [r for r, _ in results]
    reports.sort(key=lambda r: r.get("scenario", ""))
    exit_code = max((c for _, c in results), default=0)
    return reports, exit_code
