"""The scalar maximum-principle diagnostic lambda1 = p F_p - F along a solution.

This is the eigenvalue of the associated tensor in the gradient direction,
evaluated at (|grad u|, u) in the interior and at (|du/dnu|, 0) on the
boundary.  Its maximum must sit on the critical set of u or on the boundary;
an interior non-critical maximum is a red-alert invariant violation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyCriticalSetError, UnconvergedError
from .lagrangian import _box_samples, eval_jet, pfunction_identity_residual
from .tensor_field import critical_gradient_tolerance

#: models of the quadratic-gradient family F = p^2/2 + Phi(q)
QUADRATIC_FAMILY = {"dirichlet_affine", "dirichlet_exponential", "dirichlet_power"}


@dataclass
class PFunctionReport:
    lambda1: np.ndarray            # interior nodes
    boundary_lambda1: np.ndarray   # boundary samples
    sup_value: float
    argmax: tuple
    location_class: str            # critical_set | boundary | interior_noncritical
    critical_set_idx: np.ndarray
    critical_formula_value: float  # -min over the critical set of F(0, u); None if empty
    boundary_formula_value: float  # max over boundary of p F_p(p,0) - F(p,0)
    H_min: float
    p_crit_tol: float
    critical_set_empty: bool
    checks: dict = field(default_factory=dict)

    def two_branch_bound(self):
        """max of the admissible branches of the sup formula."""
        branches = [self.boundary_formula_value]
        if not self.critical_set_empty:
            branches.append(self.critical_formula_value)
        return max(branches)

    def as_dict(self):
        return {
            "sup_value": self.sup_value,
            "argmax": list(self.argmax),
            "location_class": self.location_class,
            "critical_set_size": int(len(self.critical_set_idx)),
            "critical_set_empty": self.critical_set_empty,
            "critical_formula_value": self.critical_formula_value,
            "boundary_formula_value": self.boundary_formula_value,
            "H_min": self.H_min,
            "p_crit_tol": self.p_crit_tol,
            "checks": self.checks,
        }


def lambda1_field(model, result, domain):
    """Pointwise p F_p - F at interior nodes and boundary samples."""
    if not result.converged:
        raise UnconvergedError("lambda1 evaluation requires a converged solution")
    p = result.p
    jet = eval_jet(model, p, result.u)
    lam = p * jet.F_p - jet.F
    pb = np.abs(result.normal_derivative)
    bjet = eval_jet(model, pb, np.zeros_like(pb))
    blam = pb * bjet.F_p - bjet.F
    return lam, blam


def locate_max(model, result, domain):
    """Locate and classify the maximum of lambda1 over the closure.

    Also evaluates both branches of the sup formula: the critical branch
    ``-min over the critical set of F(0, u)`` and the boundary branch
    ``max over the boundary of p F_p(p, 0) - F(p, 0)``.
    """
    lam, blam = lambda1_field(model, result, domain)
    p = result.p
    p_tol = critical_gradient_tolerance(domain, result.gradient_range[1])
    crit = np.nonzero(p <= p_tol)[0]

    i_int = int(np.argmax(lam))
    i_bnd = int(np.argmax(blam))
    if lam[i_int] >= blam[i_bnd]:
        sup_value = float(lam[i_int])
        argmax = (float(domain.xy[i_int, 0]), float(domain.xy[i_int, 1]))
        if p[i_int] <= p_tol:
            location_class = "critical_set"
        elif domain.dist[i_int] <= 2.0 * domain.h:
            # inside the cut collar a nodal maximum is indistinguishable
            # from a boundary one at grid resolution (same tolerance
            # philosophy as p_crit_tol)
            location_class = "boundary"
        else:
            location_class = "interior_noncritical"
    else:
        sup_value = float(blam[i_bnd])
        argmax = (float(domain.bpts[i_bnd, 0]), float(domain.bpts[i_bnd, 1]))
        location_class = "boundary"

    empty = len(crit) == 0
    if empty:
        critical_value = None
    else:
        jets0 = eval_jet(model, np.zeros(len(crit)), result.u[crit])
        critical_value = float(-np.min(jets0.F))

    return PFunctionReport(
        lambda1=lam, boundary_lambda1=blam, sup_value=sup_value, argmax=argmax,
        location_class=location_class, critical_set_idx=crit,
        critical_formula_value=critical_value,
        boundary_formula_value=float(np.max(blam)),
        H_min=float(np.min(domain.bH)), p_crit_tol=p_tol,
        critical_set_empty=empty)


def lambda1_radial(model, profile):
    """lambda1 along a radial profile; constant when n = 1 (the divergence-
    free tensor is scalar there, so its derivative vanishes)."""
    p = np.abs(profile.du)
    jet = eval_jet(model, p, profile.u)
    return p * jet.F_p - jet.F


def gradient_bound_check(model, result, domain, report=None, tol=1e-6):
    """Check lambda1 <= -min F(0, u) over the critical set, nodewise.

    For the quadratic-gradient family additionally checks the pointwise
    bound p^2/2 <= Phi(u) - Phi(m).  The eigenvalue bound is only asserted
    when the boundary curvature is non-negative or the maximum sits on the
    critical set; otherwise the margins are reported unasserted.
    """
    report = report or locate_max(model, result, domain)
    if report.critical_set_empty:
        raise EmptyCriticalSetError(
            "no critical-set nodes at this resolution; the eigenvalue bound "
            "has no evaluable right-hand side")
    applicable = report.H_min >= 0.0 or report.location_class == "critical_set"
    bound = report.critical_formula_value
    margins = bound - np.concatenate([report.lambda1, report.boundary_lambda1])
    worst = float(np.min(margins))

    family_worst = None
    if model.name in QUADRATIC_FAMILY:
        m = result.solution_range[0]
        phi_u = eval_jet(model, np.zeros_like(result.u), result.u).F
        phi_m = float(eval_jet(model, 0.0, m).F)
        family_margin = (phi_u - phi_m) - 0.5 * result.p ** 2
        family_worst = float(np.min(family_margin))

    ok = (not applicable) or worst >= -tol
    if family_worst is not None and applicable:
        ok = ok and family_worst >= -tol
    return {"applicable": applicable, "worst_margin": worst,
            "family_margin": family_worst, "bound": bound, "ok": bool(ok),
            "tolerance": tol}


def check_max_principle_conditions(model, result, samples=1000):
    """Evaluate the maximum-principle prerequisites on the realized range.

    Over the solution's (p, q) range inflated by 10%: the ellipticity
    minimum (min F_pp, whose positivity also makes the candidate increasing
    in p^2 since its p^2-derivative is F_pp/2), and the compatibility
    identity residual maximum.
    """
    if not result.converged:
        raise UnconvergedError("condition checks require a converged solution")
    p_max = result.gradient_range[1]
    m, M = result.solution_range
    half = 0.5 * (M - m)
    q_lo, q_hi = m - 0.2 * half - 1e-12, M + 0.2 * half + 1e-12
    box = ((max(1e-6, 1e-3 * p_max), 1.1 * max(p_max, 1e-6)), (q_lo, q_hi))
    pts = _box_samples(box, samples)
    jet = eval_jet(model, pts[:, 0], pts[:, 1])
    res = pfunction_identity_residual(model, pts[:, 0], pts[:, 1])
    min_fpp = float(np.min(jet.F_pp))
    i_min = int(np.argmin(jet.F_pp))
    out = {
        "box": [list(box[0]), list(box[1])],
        "min_F_pp": min_fpp,
        "min_candidate_p2_derivative": 0.5 * min_fpp,
        "identity_residual_max": float(np.max(res)),
        "ellipticity_ok": min_fpp > 0.0,
        "identity_ok": float(np.max(res)) < 1e-11,
    }
    if min_fpp <= 0.0:
        out["ellipticity_witness"] = [float(pts[i_min, 0]), float(pts[i_min, 1]), min_fpp]
    return out
