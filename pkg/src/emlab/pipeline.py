"""Run configuration, pipeline orchestration, report assembly and export.

A run is: hypothesis checks, the 2D solve (plus the radial oracle on
radially symmetric shapes), then the tensor / maximum-principle / identity
analyses, folded into a single report whose numeric claims each carry the
tolerance they were checked against.  Identical configurations must produce
byte-identical ``report.json`` and ``fields.csv``; wall-clock timings
therefore live in a separate sidecar file.
"""

from __future__ import annotations

import json
import math
import os
import time
from dataclasses import dataclass, field

import numpy as np
import yaml
from jsonschema import validate as _jsonschema_validate

from .errors import (ConfigError, EllipticityError, EmlabError,
                     EmptyCriticalSetError)
from .geometry import build_domain, make_shape
from .identities import run_identity_suite
from .lagrangian import (check_hypotheses, divergence_coefficients, eval_jet,
                         make_expression_model, make_model)
from .pfunction import (check_max_principle_conditions, gradient_bound_check,
                        locate_max)
from .solver import (SolveResult, SolverConfig, _normal_derivative,
                     el_residual, gradient_operators, solve_euler_lagrange,
                     solve_radial)
from .tensor_field import (_interior_diff_ops, assemble_field,
                           classify_definiteness, consistency_report,
                           divergence_residual)

EXIT_OK = 0
EXIT_SOLVER = 1
EXIT_HYPOTHESIS = 2
EXIT_INVARIANT = 3
EXIT_CONFIG = 4

#: default hypothesis box used before a solution range is available
DEFAULT_HYPOTHESIS_BOX = ((0.0, 1.0), (-1.0, 1.0))


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

_ANALYSIS_KEYS = {"hypotheses", "tensor", "pfunction", "identities", "radial_oracle"}
_SOLVER_KEYS = {"residual_tol", "step_tol", "max_iterations", "damping", "newton_polish"}


@dataclass
class RunConfig:
    model: object
    shape: object
    spacing: float
    solver: SolverConfig
    analysis: dict
    x0: tuple = None
    raw: dict = field(default_factory=dict)


def _reject_unknown(mapping, allowed, context):
    unknown = set(mapping) - allowed
    if unknown:
        raise ConfigError(f"unknown {context} keys: {sorted(unknown)}")


def parse_config(data):
    """Validate a configuration mapping and build the runtime objects."""
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a mapping")
    _reject_unknown(data, {"model", "shape", "spacing", "solver", "analysis", "x0"},
                    "top-level")
    for key in ("model", "shape", "spacing"):
        if key not in data:
            raise ConfigError(f"missing required key {key!r}")

    mspec = data["model"]
    if not isinstance(mspec, dict):
        raise ConfigError("model must be a mapping")
    try:
        if "expression" in mspec:
            _reject_unknown(mspec, {"expression", "smooth_at_origin"}, "model")
            model = make_expression_model(str(mspec["expression"]),
                                          bool(mspec.get("smooth_at_origin", False)))
        else:
            _reject_unknown(mspec, {"name", "parameters"}, "model")
            model = make_model(mspec.get("name", ""), mspec.get("parameters", []))
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad model: {exc}") from None

    sspec = data["shape"]
    if not isinstance(sspec, dict):
        raise ConfigError("shape must be a mapping")
    _reject_unknown(sspec, {"kind", "parameters", "center"}, "shape")
    try:
        shape = make_shape(sspec.get("kind", ""), sspec.get("parameters", []),
                           center=tuple(sspec.get("center", (0.0, 0.0))))
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad shape: {exc}") from None

    try:
        spacing = float(data["spacing"])
    except (ValueError, TypeError):
        raise ConfigError("spacing must be numeric") from None
    if spacing <= 0:
        raise ConfigError("spacing must be positive")

    sol = data.get("solver", {})
    if not isinstance(sol, dict):
        raise ConfigError("solver must be a mapping")
    _reject_unknown(sol, _SOLVER_KEYS, "solver")
    try:
        solver = SolverConfig(**sol)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad solver config: {exc}") from None

    ana = data.get("analysis", {})
    if not isinstance(ana, dict):
        raise ConfigError("analysis must be a mapping")
    _reject_unknown(ana, _ANALYSIS_KEYS, "analysis")
    analysis = {k: bool(ana.get(k, True)) for k in _ANALYSIS_KEYS}

    x0 = data.get("x0")
    if x0 is not None:
        try:
            x0 = (float(x0[0]), float(x0[1]))
        except (ValueError, TypeError, IndexError):
            raise ConfigError("x0 must be a pair of numbers") from None

    raw = {
        "model": (dict(mspec)), "shape": dict(sspec), "spacing": spacing,
        "solver": solver.as_dict(), "analysis": analysis,
        "x0": list(x0) if x0 else None,
    }
    return RunConfig(model=model, shape=shape, spacing=spacing, solver=solver,
                     analysis=analysis, x0=x0, raw=raw)


def load_config(path):
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from None
    return parse_config(data)


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

@dataclass
class RunReport:
    config: dict
    solver: dict = None
    domain_info: dict = None
    hypotheses: dict = None
    spectral: dict = None
    pfunction: dict = None
    identities: dict = None
    checks: list = field(default_factory=list)
    exit_code: int = EXIT_OK
    violations: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    # runtime objects, not serialized
    result: object = field(default=None, repr=False)
    domain: object = field(default=None, repr=False)
    model: object = field(default=None, repr=False)
    spectral_field: object = field(default=None, repr=False)

    def add_check(self, name, value, tolerance, passed, gate=True):
        self.checks.append({"name": name, "value": value, "tolerance": tolerance,
                            "passed": bool(passed), "gate": bool(gate)})
        if gate and not passed:
            self.violations.append(name)

    def as_dict(self):
        return _sanitize({
            "config": self.config,
            "solver": self.solver,
            "domain": self.domain_info,
            "hypotheses": self.hypotheses,
            "spectral": self.spectral,
            "pfunction": self.pfunction,
            "identities": self.identities,
            "checks": self.checks,
            "status": {"exit_code": self.exit_code, "violations": self.violations},
        })


def _sanitize(obj):
    """Convert numpy scalars/arrays and tuples into plain JSON types."""
    if isinstance(obj, dict):
        return {str(k): _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return [_sanitize(v) for v in obj.tolist()]
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


REPORT_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "required": ["config", "solver", "checks", "status"],
    "additionalProperties": False,
    "properties": {
        "config": {"type": "object"},
        "domain": {
            "type": ["object", "null"],
            "properties": {
                "spacing": {"type": "number"},
                "interior_nodes": {"type": "integer"},
                "boundary_samples": {"type": "integer"},
                "boundary_components": {"type": "integer"},
                "smooth_boundary": {"type": "boolean"},
                "note": {"type": "string"},
            },
        },
        "solver": {
            "type": ["object", "null"],
            "required": ["converged", "iterations", "final_residual"],
            "properties": {
                "converged": {"type": "boolean"},
                "iterations": {"type": "integer", "minimum": 0},
                "final_residual": {"type": "number"},
                "solution_range": {"type": "array", "items": {"type": "number"}},
                "gradient_range": {"type": "array", "items": {"type": "number"}},
                "regularity_note": {"type": "string"},
                "radial_oracle": {"type": ["object", "null"]},
                "failure": {"type": ["string", "null"]},
            },
        },
        "hypotheses": {"type": ["object", "null"]},
        "spectral": {"type": ["object", "null"]},
        "pfunction": {"type": ["object", "null"]},
        "identities": {"type": ["object", "null"]},
        "checks": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "value", "tolerance", "passed", "gate"],
                "additionalProperties": False,
                "properties": {
                    "name": {"type": "string"},
                    "value": {},
                    "tolerance": {},
                    "passed": {"type": "boolean"},
                    "gate": {"type": "boolean"},
                },
            },
        },
        "status": {
            "type": "object",
            "required": ["exit_code", "violations"],
            "properties": {
                "exit_code": {"type": "integer", "minimum": 0, "maximum": 4},
                "violations": {"type": "array", "items": {"type": "string"}},
            },
        },
    },
}


def validate_report(report_dict):
    _jsonschema_validate(report_dict, REPORT_SCHEMA)


def identity_tolerance(h):
    """Residual budget for the integral identities, 2e-2 at h = 1/64 and
    scaled quadratically on coarser grids."""
    return 2e-2 * max(1.0, (64.0 * h) ** 2)


# ---------------------------------------------------------------------------
# pipeline
# ---------------------------------------------------------------------------

def run_pipeline(config, strict=False):
    """Execute the configured run end to end and assemble the report.

    Solver failure short-circuits with a partial report (exit 1); strict
    mode escalates a convexity violation to exit 2 before solving; gated
    invariant check failures yield exit 3.
    """
    report = RunReport(config=config.raw)
    timings = {}
    t0 = time.perf_counter()

    pilot = check_hypotheses(config.model, box=DEFAULT_HYPOTHESIS_BOX, samples=256)
    if strict and not pilot.convexity_ok:
        report.hypotheses = pilot.as_dict()
        report.exit_code = EXIT_HYPOTHESIS
        report.violations.append("hypothesis_convexity")
        return report
    timings["hypotheses_pilot"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    try:
        domain = build_domain(config.shape, config.spacing)
    except EmlabError as exc:
        raise ConfigError(f"domain build failed: {exc}") from None
    timings["domain"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    try:
        result = solve_euler_lagrange(config.model, domain, config.solver)
    except EllipticityError as exc:
        report.solver = {"converged": False, "iterations": 0,
                         "final_residual": float("nan"),
                         "failure": f"ellipticity breakdown: {exc}",
                         "witness": exc.witness}
        report.hypotheses = pilot.as_dict()
        report.exit_code = EXIT_SOLVER
        return report
    timings["solve"] = time.perf_counter() - t0
    report.result, report.domain, report.model = result, domain, config.model

    report.solver = {
        "converged": result.converged,
        "iterations": result.iterations,
        "final_residual": result.residual_history[-1],
        "solution_range": list(result.solution_range),
        "gradient_range": list(result.gradient_range),
        "regularity_note": result.regularity_note,
        "radial_oracle": None,
        "failure": None,
    }
    analyze_into(report, config, domain, result, strict=strict, timings=timings)
    report.timings = timings
    return report


def _domain_section(domain):
    sec = {
        "spacing": domain.h,
        "interior_nodes": domain.n_interior,
        "boundary_samples": domain.n_boundary,
        "boundary_components": domain.boundary_component_count,
        "smooth_boundary": domain.shape.smooth_boundary,
    }
    if not domain.shape.smooth_boundary:
        sec["note"] = ("boundary is not C^{2+alpha}: theorem hypotheses not "
                       "met, results are a stress test")
    return sec


def analyze_into(report, config, domain, result, strict=False, timings=None):
    """Run the configured analyses on a solved field, filling the report.

    Shared between a fresh pipeline run and re-analysis of persisted fields;
    everything here is deterministic given (config, u).
    """
    timings = {} if timings is None else timings
    report.result, report.domain, report.model = result, domain, config.model
    report.domain_info = _domain_section(domain)
    t0 = time.perf_counter()

    if config.analysis.get("hypotheses", True):
        m, M = result.solution_range
        pad = 0.1 * max(M - m, 1e-6)
        box = ((0.0, 1.1 * max(result.gradient_range[1], 1e-6)), (m - pad, M + pad))
        hyp = check_hypotheses(config.model, box=box, samples=512)
        report.hypotheses = hyp.as_dict()
        report.add_check("hypothesis_convexity", hyp.min_F_pp, 0.0,
                         hyp.convexity_ok, gate=False)
        if config.model.smooth_at_origin:
            # a false smoothness claim silently corrupts g near p = 0
            report.add_check("origin_smoothness_claim", hyp.origin_smooth_ok,
                             None, hyp.origin_smooth_ok)
        if strict and not hyp.convexity_ok:
            report.exit_code = EXIT_HYPOTHESIS
            report.violations.append("hypothesis_convexity")
            return report
        timings["hypotheses"] = time.perf_counter() - t0
    else:
        hyp = None

    if not result.converged:
        report.exit_code = EXIT_SOLVER
        report.violations.append("solver_convergence")
        return report

    # recompute the equation residual from the field actually analyzed; on a
    # fresh solve this repeats the convergence check, on a reloaded run it
    # guards against tampered or mismatched persisted data
    try:
        recheck = float(np.max(np.abs(el_residual(config.model, domain, result.u))))
        report.add_check("solver_residual_recheck", recheck,
                         config.solver.residual_tol,
                         recheck <= config.solver.residual_tol)
    except EmlabError as exc:
        report.add_check("solver_residual_recheck", f"failed: {exc}",
                         config.solver.residual_tol, False)

    if config.analysis.get("radial_oracle", True) and config.shape.kind in ("disc", "annulus"):
        t0 = time.perf_counter()
        radii = ((0.0, config.shape.R) if config.shape.kind == "disc"
                 else (config.shape.a, config.shape.b))
        try:
            profile = solve_radial(config.model, radii, n=2,
                                   resolution=max(1024, 16 * int(1.0 / config.spacing)))
            r = np.hypot(domain.xy[:, 0] - config.shape.cx,
                         domain.xy[:, 1] - config.shape.cy)
            dev = float(np.max(np.abs(result.u - profile.u_at(r))))
            report.solver["radial_oracle"] = {
                "max_deviation": dev, "parameter": profile.parameter,
                "tolerance": 5e-3}
            report.add_check("radial_oracle_agreement", dev, 5e-3, dev <= 5e-3)
        except EmlabError as exc:
            report.solver["radial_oracle"] = {"failure": str(exc)}
        timings["radial_oracle"] = time.perf_counter() - t0

    if hyp is not None and hyp.monotone_q_ok:
        # non-decreasing source models obey the maximum principle: u <= 0
        report.add_check("maximum_principle_nonpositive", float(np.max(result.u)),
                         1e-8, float(np.max(result.u)) <= 1e-8)

    fld = None
    if config.analysis.get("tensor", True):
        t0 = time.perf_counter()
        fld = classify_definiteness(assemble_field(config.model, result, domain))
        _, div_norm = divergence_residual(fld)
        stride = max(1, domain.n_interior // 4096)
        cons = consistency_report(fld, sample_stride=stride)
        report.spectral_field = fld
        report.spectral = {
            "definiteness_class": fld.definiteness_class,
            "uniform_constant_C": fld.uniform_constant_C,
            "sup_lambda1": fld.sup_lambda1,
            "sup_location": list(fld.sup_location),
            "sup_location_class": fld.sup_location_class,
            "div_T_sup_norm_core": div_norm,
            "consistency": cons,
        }
        report.add_check("tensor_symmetry", cons["symmetry_max"], 0.0,
                         cons["symmetry_max"] == 0.0)
        report.add_check("tensor_eigenvector_residual",
                         cons["eigenvector_residual_max"], 1e-10,
                         cons["eigenvector_residual_max"] <= 1e-10)
        report.add_check("tensor_spectrum_crosscheck",
                         cons["spectrum_crosscheck_max"], 1e-10,
                         cons["spectrum_crosscheck_max"] <= 1e-10)
        report.add_check("tensor_trace_consistency",
                         cons["trace_consistency_max"], 1e-12,
                         cons["trace_consistency_max"] <= 1e-12)
        report.add_check("tensor_det_consistency",
                         cons["det_consistency_max_rel"], 1e-10,
                         cons["det_consistency_max_rel"] <= 1e-10)
        report.add_check("det_convention_flip",
                         cons["det_convention_flip_residual"], 1e-10,
                         cons["det_convention_flip_residual"] <= 1e-10)
        timings["tensor"] = time.perf_counter() - t0

    if config.analysis.get("pfunction", True):
        t0 = time.perf_counter()
        prep = locate_max(config.model, result, domain)
        report.add_check("lambda1_location_class", prep.location_class, None,
                         prep.location_class != "interior_noncritical")
        two_branch = prep.two_branch_bound()
        report.add_check("lambda1_two_branch_bound",
                         prep.sup_value - two_branch, 5e-3,
                         prep.sup_value <= two_branch + 5e-3)
        if prep.H_min >= 0.0 and not prep.critical_set_empty:
            Dx, Dy = _interior_diff_ops(domain)
            lip = float(np.max(np.hypot(Dx @ prep.lambda1, Dy @ prep.lambda1)))
            tol = max(5e-3, 2.0 * domain.h * lip)
            dev = abs(prep.sup_value - prep.critical_formula_value)
            report.add_check("lambda1_critical_branch_equality", dev, tol, dev <= tol)
        prep.checks["critical_set_flagged_empty"] = prep.critical_set_empty
        if fld is not None:
            agreement = float(np.max(np.abs(prep.lambda1 - fld.lambda1)))
            report.add_check("lambda1_matches_tensor_eigenvalue", agreement,
                             1e-12, agreement <= 1e-12)
        try:
            gb = gradient_bound_check(config.model, result, domain, prep)
            report.add_check("gradient_bound_margin", gb["worst_margin"], -1e-6,
                             gb["ok"], gate=gb["applicable"])
        except EmptyCriticalSetError:
            gb = {"applicable": False, "note": "critical set empty at this resolution"}
        mpc = check_max_principle_conditions(config.model, result)
        report.add_check("compatibility_identity_residual",
                         mpc["identity_residual_max"], 1e-11, mpc["identity_ok"])
        report.pfunction = prep.as_dict()
        report.pfunction["gradient_bound"] = gb
        report.pfunction["max_principle_conditions"] = mpc
        timings["pfunction"] = time.perf_counter() - t0

    if config.analysis.get("identities", True):
        t0 = time.perf_counter()
        idr = run_identity_suite(config.model, result, domain, config.x0)
        report.identities = idr.as_dict()
        tol = identity_tolerance(domain.h)
        report.add_check("rellich_identity_residual", idr.rellich_residual, tol,
                         idr.rellich_residual <= tol)
        report.add_check("rellich_source_residual", idr.source_residual, tol,
                         idr.source_residual <= tol)
        if idr.pohozaev_residual is not None:
            report.add_check("pohozaev_identity_residual", idr.pohozaev_residual,
                             tol, idr.pohozaev_residual <= tol)
        report.add_check("vanishing_boundary_term",
                         abs(idr.vanishing_boundary_term), 1e-10,
                         abs(idr.vanishing_boundary_term) <= 1e-10)
        timings["identities"] = time.perf_counter() - t0

    if report.violations:
        report.exit_code = EXIT_INVARIANT
    return report


# ---------------------------------------------------------------------------
# export / reload
# ---------------------------------------------------------------------------

FIELD_COLUMNS = ["x", "y", "u", "u_x", "u_y", "lambda1", "lambda2",
                 "det", "trace", "divT_x", "divT_y"]
TENSOR_COLUMNS = ["x", "y", "T11", "T12", "T22", "lambda1", "lambda2",
                  "det", "trace", "divT_x", "divT_y"]
BOUNDARY_COLUMNS = ["y_x", "y_y", "nu_x", "nu_y", "H", "weight", "dnu_u",
                    "rellich_density", "pohozaev_density"]


def _fmt(x):
    return f"{x:.17g}"


def export_fields(report, out_dir):
    """Write config echo, CSV fields, report JSON, solver log and timings.

    Identical runs produce byte-identical fields.csv / boundary.csv /
    report.json; timings.json is the only non-deterministic artifact.
    """
    os.makedirs(out_dir, exist_ok=True)
    result, domain, model = report.result, report.domain, report.model
    if result is None:
        _write_report_files(report, out_dir)
        return

    fld = report.spectral_field
    n = domain.n_interior
    nan = np.full(n, np.nan)
    if fld is not None:
        div, _ = divergence_residual(fld)
        cols = [domain.xy[:, 0], domain.xy[:, 1], result.u,
                result.grad[:, 0], result.grad[:, 1], fld.lambda1,
                fld.lambda_rest, fld.det, fld.trace, div[:, 0], div[:, 1]]
    else:
        cols = [domain.xy[:, 0], domain.xy[:, 1], result.u,
                result.grad[:, 0], result.grad[:, 1]] + [nan] * 6
    with open(os.path.join(out_dir, "fields.csv"), "w") as fh:
        fh.write(",".join(FIELD_COLUMNS) + "\n")
        for row in zip(*cols):
            fh.write(",".join(_fmt(v) for v in row) + "\n")

    if fld is not None:
        tcols = [domain.xy[:, 0], domain.xy[:, 1], fld.T11, fld.T12, fld.T22,
                 fld.lambda1, fld.lambda_rest, fld.det, fld.trace,
                 div[:, 0], div[:, 1]]
        with open(os.path.join(out_dir, "tensor.csv"), "w") as fh:
            fh.write(",".join(TENSOR_COLUMNS) + "\n")
            for row in zip(*tcols):
                fh.write(",".join(_fmt(v) for v in row) + "\n")

    x0 = report.config.get("x0") or [domain.shape.cx, domain.shape.cy]
    X_dot_nu = ((domain.bpts[:, 0] - x0[0]) * domain.bnu[:, 0]
                + (domain.bpts[:, 1] - x0[1]) * domain.bnu[:, 1])
    pb = np.abs(result.normal_derivative)
    g, _ = divergence_coefficients(model, pb, np.zeros_like(pb))
    F = eval_jet(model, pb, np.zeros_like(pb)).F
    rellich_density = X_dot_nu * (g * result.normal_derivative ** 2 - F)
    phi0 = float(eval_jet(model, 0.0, 0.0).F)
    pohozaev_density = X_dot_nu * (0.5 * result.normal_derivative ** 2 - phi0)
    bcols = [domain.bpts[:, 0], domain.bpts[:, 1], domain.bnu[:, 0],
             domain.bnu[:, 1], domain.bH, domain.bw, result.normal_derivative,
             rellich_density, pohozaev_density]
    with open(os.path.join(out_dir, "boundary.csv"), "w") as fh:
        fh.write(",".join(BOUNDARY_COLUMNS) + "\n")
        for row in zip(*bcols):
            fh.write(",".join(_fmt(v) for v in row) + "\n")

    with open(os.path.join(out_dir, "solver_log.json"), "w") as fh:
        json.dump(_sanitize(result.log), fh, indent=2, sort_keys=True)
        fh.write("\n")
    _write_report_files(report, out_dir)


def _write_report_files(report, out_dir):
    with open(os.path.join(out_dir, "config.yaml"), "w") as fh:
        yaml.safe_dump(report.config, fh, sort_keys=True)
    doc = report.as_dict()
    validate_report(doc)
    with open(os.path.join(out_dir, "report.json"), "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(os.path.join(out_dir, "timings.json"), "w") as fh:
        json.dump(_sanitize(report.timings), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_run(run_dir):
    """Reload a persisted run: config, domain, model and the solution field.

    The gradient and boundary traces are recomputed deterministically from
    the persisted u, so re-analysis does not require re-solving.
    """
    config = load_config(os.path.join(run_dir, "config.yaml"))
    try:
        with open(os.path.join(run_dir, "report.json")) as fh:
            report_doc = json.load(fh)
        u = []
        with open(os.path.join(run_dir, "fields.csv")) as fh:
            header = fh.readline().strip().split(",")
            iu = header.index("u")
            for line in fh:
                u.append(float(line.split(",")[iu]))
    except (OSError, ValueError, KeyError) as exc:
        raise ConfigError(f"cannot reload run from {run_dir}: {exc}") from None

    domain = build_domain(config.shape, config.spacing)
    u = np.asarray(u)
    if len(u) != domain.n_interior:
        raise ConfigError("persisted field does not match the configured grid")

    Gx, Gy = gradient_operators(domain)
    grad = np.column_stack([Gx @ u, Gy @ u])
    dnu = _normal_derivative(domain, grad)
    p = np.hypot(grad[:, 0], grad[:, 1])
    solver_doc = report_doc.get("solver") or {}
    result = SolveResult(
        u=u, grad=grad, normal_derivative=dnu,
        residual_history=[solver_doc.get("final_residual", float("nan"))],
        converged=bool(solver_doc.get("converged", False)),
        iterations=int(solver_doc.get("iterations", 0)),
        solution_range=(min(float(np.min(u)), 0.0), max(float(np.max(u)), 0.0)),
        gradient_range=(0.0, max(float(np.max(p)), float(np.max(np.abs(dnu))))),
        model=config.model, domain=domain)
    return config, domain, result, report_doc
