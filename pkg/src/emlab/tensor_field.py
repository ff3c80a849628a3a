"""Pointwise tensor assembly, closed-form spectrum and discrete divergence.

The tensor associated with a solution is ``T = (F_p/p) grad_u x grad_u -
F Id``: rank-one plus a multiple of the identity, hence symmetric with
eigenvalue ``p F_p - F`` along the gradient and ``-F`` on its orthogonal
complement.  The closed-form spectrum is primary; a direct characteristic
polynomial solve (n <= 3) is the cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .errors import UnconvergedError
from .lagrangian import ORIGIN_EPS, eval_jet

_E, _W, _N, _S = 0, 1, 2, 3

DEGENERACY_RTOL = 1e-10


@dataclass
class TensorPoint:
    """Tensor, closed-form spectrum and jet at one evaluation point."""

    T: np.ndarray
    lambda1: float
    lambda_rest: float
    p: float
    jet: object


def assemble_tensor(jet, grad, p):
    """Assemble T from a jet and the gradient vector at a point.

    For p below ORIGIN_EPS the rank-one part vanishes identically and the
    analytic limit is -F(0, q) Id with every eigenvalue equal to -F.
    """
    grad = np.asarray(grad, dtype=float)
    if abs(np.linalg.norm(grad) - p) > 1e-12 * max(1.0, p):
        raise ValueError("|grad| must agree with p to 1e-12")
    n = len(grad)
    if p > ORIGIN_EPS:
        T = (jet.F_p / p) * np.outer(grad, grad) - jet.F * np.eye(n)
        lambda1 = p * jet.F_p - jet.F
    else:
        T = -jet.F * np.eye(n)
        lambda1 = -jet.F
    return TensorPoint(T=T, lambda1=float(lambda1), lambda_rest=float(-jet.F),
                       p=float(p), jet=jet)


def _eigvals_sym2(T):
    mean = 0.5 * (T[0, 0] + T[1, 1])
    disc = math.hypot(0.5 * (T[0, 0] - T[1, 1]), T[0, 1])
    return np.array([mean - disc, mean + disc])


def _eigvals_sym3(T):
    # trigonometric solve of the characteristic polynomial
    p1 = T[0, 1] ** 2 + T[0, 2] ** 2 + T[1, 2] ** 2
    q = np.trace(T) / 3.0
    if p1 == 0.0:
        return np.sort(np.diag(T))
    p2 = sum((T[i, i] - q) ** 2 for i in range(3)) + 2.0 * p1
    pp = math.sqrt(p2 / 6.0)
    B = (T - q * np.eye(3)) / pp
    r = np.linalg.det(B) / 2.0
    r = min(1.0, max(-1.0, r))
    phi = math.acos(r) / 3.0
    e1 = q + 2.0 * pp * math.cos(phi)
    e3 = q + 2.0 * pp * math.cos(phi + 2.0 * math.pi / 3.0)
    return np.sort(np.array([e3, 3.0 * q - e1 - e3, e1]))


def spectrum_crosscheck(point):
    """Max deviation between the closed-form spectrum and a direct solve."""
    n = point.T.shape[0]
    direct = _eigvals_sym2(point.T) if n == 2 else _eigvals_sym3(point.T)
    closed = np.sort(np.array([point.lambda1] + [point.lambda_rest] * (n - 1)))
    return float(np.max(np.abs(direct - closed)))


def det_trace(point, n=None):
    """(det, trace) from the spectrum: the eigenvalue product and sum."""
    if n is None:
        n = point.T.shape[0]
    trace = point.lambda1 + (n - 1) * point.lambda_rest
    det = point.lambda1 * point.lambda_rest ** (n - 1)
    return float(det), float(trace)


def det_trace_direct(point):
    """(det, trace) straight from the matrix entries, as the cross-check."""
    T = point.T
    n = T.shape[0]
    trace = float(np.trace(T))
    if n == 2:
        det = T[0, 0] * T[1, 1] - T[0, 1] * T[1, 0]
    else:
        det = (T[0, 0] * (T[1, 1] * T[2, 2] - T[1, 2] * T[2, 1])
               - T[0, 1] * (T[1, 0] * T[2, 2] - T[1, 2] * T[2, 0])
               + T[0, 2] * (T[1, 0] * T[2, 1] - T[1, 1] * T[2, 0]))
    return float(det), trace


# ---------------------------------------------------------------------------
# whole-field assembly
# ---------------------------------------------------------------------------

@dataclass
class SpectralField:
    """Per-node tensor entries and spectrum over a solved field."""

    T11: np.ndarray
    T12: np.ndarray
    T22: np.ndarray
    lambda1: np.ndarray
    lambda_rest: np.ndarray
    det: np.ndarray
    trace: np.ndarray
    det_convention_flip: np.ndarray   # lambda1 * (+F)^{n-1}: the other sign convention
    p: np.ndarray
    boundary_lambda1: np.ndarray
    boundary_lambda_rest: np.ndarray
    definiteness_class: str = "unclassified"
    uniform_constant_C: float = None
    sup_lambda1: float = None
    sup_location: tuple = None
    sup_location_class: str = None
    model: object = field(default=None, repr=False)
    domain: object = field(default=None, repr=False)
    result: object = field(default=None, repr=False)

    @property
    def n(self):
        return 2


def assemble_field(model, result, domain):
    """Evaluate the tensor, spectrum and det/trace at every interior node
    and at the boundary samples (p = |du/dnu|, q = 0 there)."""
    if not result.converged:
        raise UnconvergedError("tensor assembly requires a converged solution")
    p = result.p
    jet = eval_jet(model, p, result.u)
    coef = np.where(p > ORIGIN_EPS, jet.F_p / np.maximum(p, ORIGIN_EPS), 0.0)
    ux, uy = result.grad[:, 0], result.grad[:, 1]
    T11 = coef * ux * ux - jet.F
    T12 = coef * ux * uy
    T22 = coef * uy * uy - jet.F
    lambda1 = np.where(p > ORIGIN_EPS, p * jet.F_p - jet.F, -jet.F)
    lambda_rest = -jet.F
    det = lambda1 * lambda_rest
    trace = lambda1 + lambda_rest
    det_flip = lambda1 * jet.F

    pb = np.abs(result.normal_derivative)
    bjet = eval_jet(model, pb, np.zeros_like(pb))
    blambda1 = np.where(pb > ORIGIN_EPS, pb * bjet.F_p - bjet.F, -bjet.F)
    blambda_rest = -bjet.F

    return SpectralField(T11=T11, T12=T12, T22=T22, lambda1=lambda1,
                         lambda_rest=lambda_rest, det=det, trace=trace,
                         det_convention_flip=det_flip, p=p,
                         boundary_lambda1=blambda1,
                         boundary_lambda_rest=blambda_rest,
                         model=model, domain=domain, result=result)


def critical_gradient_tolerance(domain, p_max):
    """Grid-scaled threshold below which a node counts as a critical point."""
    return max(1e-6, 2.0 * domain.h * p_max)


def classify_definiteness(fld, boundary_points_included=True):
    """Fill the definiteness class, the uniform constant and the location of
    the top eigenvalue on a SpectralField; returns the same object."""
    eigs = [fld.lambda1, fld.lambda_rest]
    if boundary_points_included:
        eigs += [fld.boundary_lambda1, fld.boundary_lambda_rest]
    eigs = np.concatenate(eigs)
    scale = float(np.max(np.abs(eigs)))
    lo, hi = float(np.min(eigs)), float(np.max(eigs))
    if np.any(np.abs(eigs) <= DEGENERACY_RTOL * scale):
        fld.definiteness_class = "degenerate"
    elif hi < 0.0:
        fld.definiteness_class = "negative_definite"
        fld.uniform_constant_C = -hi
    elif lo > 0.0:
        fld.definiteness_class = "positive_definite"
    else:
        fld.definiteness_class = "indefinite"

    domain, result = fld.domain, fld.result
    i_int = int(np.argmax(fld.lambda1))
    best_interior = float(fld.lambda1[i_int])
    i_bnd = int(np.argmax(fld.boundary_lambda1))
    best_boundary = float(fld.boundary_lambda1[i_bnd]) if boundary_points_included else -np.inf
    p_tol = critical_gradient_tolerance(domain, result.gradient_range[1])
    if best_interior >= best_boundary:
        fld.sup_lambda1 = best_interior
        fld.sup_location = (float(domain.xy[i_int, 0]), float(domain.xy[i_int, 1]))
        if fld.p[i_int] <= p_tol:
            fld.sup_location_class = "critical_set"
        elif domain.dist[i_int] <= 2.0 * domain.h:
            fld.sup_location_class = "boundary"  # within the cut collar
        else:
            fld.sup_location_class = "interior_noncritical"
    else:
        fld.sup_lambda1 = best_boundary
        fld.sup_location = (float(domain.bpts[i_bnd, 0]), float(domain.bpts[i_bnd, 1]))
        fld.sup_location_class = "boundary"
    return fld


# ---------------------------------------------------------------------------
# discrete divergence
# ---------------------------------------------------------------------------

def _interior_diff_ops(domain):
    """d/dx and d/dy using interior nodes only (no boundary values).

    Centered where both neighbors exist; otherwise one-sided second order
    into the interior when two nodes are available, first order for one,
    zero for isolated nodes.  Norms downstream exclude the boundary collar,
    where these stencils lose an order.
    """
    cached = getattr(domain, "_tensor_diff_ops", None)
    if cached is not None:
        return cached
    n = domain.n_interior
    h = domain.h
    nbr = domain.nbr
    ops = []
    for d_plus, d_minus in ((_E, _W), (_N, _S)):
        rows, cols, vals = [], [], []
        for i in range(n):
            jp, jm = nbr[i, d_plus], nbr[i, d_minus]
            if jp >= 0 and jm >= 0:
                rows += [i, i]
                cols += [jp, jm]
                vals += [0.5 / h, -0.5 / h]
            elif jp >= 0:
                jpp = nbr[jp, d_plus]
                if jpp >= 0:
                    rows += [i, i, i]
                    cols += [i, jp, jpp]
                    vals += [-1.5 / h, 2.0 / h, -0.5 / h]
                else:
                    rows += [i, i]
                    cols += [i, jp]
                    vals += [-1.0 / h, 1.0 / h]
            elif jm >= 0:
                jmm = nbr[jm, d_minus]
                if jmm >= 0:
                    rows += [i, i, i]
                    cols += [i, jm, jmm]
                    vals += [1.5 / h, -2.0 / h, 0.5 / h]
                else:
                    rows += [i, i]
                    cols += [i, jm]
                    vals += [1.0 / h, -1.0 / h]
        ops.append(sparse.csr_matrix((vals, (rows, cols)), shape=(n, n)))
    domain._tensor_diff_ops = tuple(ops)
    return domain._tensor_diff_ops


def divergence_residual(fld, domain=None, collar_depth=2.0):
    """Row-wise discrete divergence of T and its sup norm away from the
    boundary collar (the claim Div T = 0 is interior)."""
    domain = domain or fld.domain
    Dx, Dy = _interior_diff_ops(domain)
    div_x = Dx @ fld.T11 + Dy @ fld.T12
    div_y = Dx @ fld.T12 + Dy @ fld.T22
    core = domain.core_mask(collar_depth)
    residual = np.column_stack([div_x, div_y])
    norm = float(np.max(np.abs(residual[core]))) if core.any() else float("nan")
    return residual, norm


def consistency_report(fld, sample_stride=1):
    """Max deviations of the spectral algebra across the field.

    Materializes the full matrix at (strided) nodes and checks: symmetry,
    eigenvector residuals, closed-form vs direct spectrum, trace and det
    against the direct matrix computation, and the relation between the two
    determinant sign conventions (they differ by (-1)^(n-1)).
    """
    idx = np.arange(0, len(fld.lambda1), sample_stride)
    sym_max = 0.0
    eigvec_max = 0.0
    spectrum_max = 0.0
    trace_max = 0.0
    det_max = 0.0
    flip_max = 0.0
    result = fld.result
    for i in idx:
        grad = result.grad[i]
        pt = TensorPoint(
            T=np.array([[fld.T11[i], fld.T12[i]], [fld.T12[i], fld.T22[i]]]),
            lambda1=float(fld.lambda1[i]), lambda_rest=float(fld.lambda_rest[i]),
            p=float(fld.p[i]), jet=None)
        sym_max = max(sym_max, abs(pt.T[0, 1] - pt.T[1, 0]))
        spectrum_max = max(spectrum_max, spectrum_crosscheck(pt))
        det_c, trace_c = det_trace(pt)
        det_d, trace_d = det_trace_direct(pt)
        scale = max(1.0, abs(det_d))
        trace_max = max(trace_max, abs(trace_c - trace_d))
        det_max = max(det_max, abs(det_c - det_d) / scale)
        flip_max = max(flip_max,
                       abs(det_c - (-1.0) * fld.det_convention_flip[i]) / scale)
        if pt.p > ORIGIN_EPS:
            tnorm = float(np.max(np.abs(pt.T)))
            r1 = pt.T @ grad - pt.lambda1 * grad
            eigvec_max = max(eigvec_max, float(np.linalg.norm(r1))
                             / max(1e-300, tnorm * pt.p))
            perp = np.array([-grad[1], grad[0]])
            r2 = pt.T @ perp - pt.lambda_rest * perp
            eigvec_max = max(eigvec_max, float(np.linalg.norm(r2))
                             / max(1e-300, tnorm * pt.p))
    return {"symmetry_max": sym_max,
            "eigenvector_residual_max": eigvec_max,
            "spectrum_crosscheck_max": spectrum_max,
            "trace_consistency_max": trace_max,
            "det_consistency_max_rel": det_max,
            "det_convention_flip_residual": flip_max,
            "min_abs_det": float(np.min(np.abs(fld.det))),
            "nodes_checked": int(len(idx))}
