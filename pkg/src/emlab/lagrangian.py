"""Integrand models F(p, q) with exact second-order derivative jets.

``p`` stands for the gradient magnitude ``|grad u|`` and ``q`` for the field
value ``u``.  Every model evaluates through :class:`~emlab.autodiff.Dual2`,
so the six jet entries are exact (no divided differences) and vectorize over
numpy arrays.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .autodiff import Dual2
from .errors import EvaluationError, OriginLimitError

#: below this gradient magnitude the analytic p -> 0 limit of F_p/p is used
ORIGIN_EPS = 1e-8


@dataclass(frozen=True)
class Jet2:
    """Value and derivatives of F at a single (p, q), or arrays thereof."""

    F: object
    F_p: object
    F_q: object
    F_pp: object
    F_pq: object
    F_qq: object

    def as_tuple(self):
        return (self.F, self.F_p, self.F_q, self.F_pp, self.F_pq, self.F_qq)


@dataclass(frozen=True)
class LagrangianModel:
    """A concrete integrand F(p, q) plus the structural flags analyses need.

    ``smooth_at_origin`` asserts F_p(0, q) = 0, which makes F(|xi|, eta)
    twice differentiable at xi = 0 and gives F_p/p a finite limit there.
    """

    name: str
    parameters: tuple
    evaluator: object  # callable (Dual2, Dual2) -> Dual2
    smooth_at_origin: bool = True
    admissible_box: tuple = ((0.0, 8.0), (-8.0, 8.0))

    def describe(self):
        return {"name": self.name, "parameters": list(self.parameters),
                "smooth_at_origin": self.smooth_at_origin}


@dataclass
class HypothesisReport:
    """Sampled checks of the structural hypotheses on F over a (p, q) box.

    Violations are data, not errors; each failed check carries a witness
    sample that reproduces the reported value on re-evaluation.
    """

    convexity_ok: bool
    min_F_pp: float
    case2_ok: bool          # F > 0 throughout the box
    min_F: float
    case3_ok: bool          # F < 0 and p F_p - F > 0 throughout the box
    max_F: float
    min_p_F_p_minus_F: float
    monotone_q_ok: bool     # F_q >= 0 throughout the box
    min_F_q: float
    origin_smooth_ok: bool  # F_p(0, q) = 0 wherever smooth_at_origin claims it
    sample_box: tuple
    samples: int
    violation_witnesses: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            "convexity_ok": self.convexity_ok,
            "min_F_pp": self.min_F_pp,
            "case2_ok": self.case2_ok,
            "min_F": self.min_F,
            "case3_ok": self.case3_ok,
            "max_F": self.max_F,
            "min_p_F_p_minus_F": self.min_p_F_p_minus_F,
            "monotone_q_ok": self.monotone_q_ok,
            "min_F_q": self.min_F_q,
            "origin_smooth_ok": self.origin_smooth_ok,
            "sample_box": [list(self.sample_box[0]), list(self.sample_box[1])],
            "samples": self.samples,
            "violation_witnesses": {k: list(v) for k, v in self.violation_witnesses.items()},
        }


# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------

def _dirichlet_affine(a, b):
    def ev(p, q):
        return 0.5 * p * p + a + b * q
    return ev


def _dirichlet_exponential(a, b):
    def ev(p, q):
        return 0.5 * p * p + a * ad.exp(b * q)
    return ev


def _dirichlet_power(a, k):
    def ev(p, q):
        return 0.5 * p * p + a * q ** k
    return ev


def _power_dirichlet(m, a, b):
    def ev(p, q):
        return (1.0 / m) * p ** m + a + b * q
    return ev


def _minimal_surface(a, b):
    def ev(p, q):
        return ad.sqrt(1.0 + p * p) + a + b * q
    return ev


#: name -> (factory, parameter count, short description)
CATALOG = {
    "dirichlet_affine": (_dirichlet_affine, 2,
                         "F = p^2/2 + a + b*q"),
    "dirichlet_exponential": (_dirichlet_exponential, 2,
                              "F = p^2/2 + a*exp(b*q)"),
    "dirichlet_power": (_dirichlet_power, 2,
                        "F = p^2/2 + a*q^k (k a positive integer >= 2)"),
    "power_dirichlet": (_power_dirichlet, 3,
                        "F = p^m/m + a + b*q (m > 1)"),
    "minimal_surface": (_minimal_surface, 2,
                        "F = sqrt(1 + p^2) + a + b*q"),
}


def make_model(name, parameters):
    """Build a catalog model from its name and numeric parameter list."""
    if name not in CATALOG:
        raise ValueError(f"unknown model {name!r}; choose from {sorted(CATALOG)}")
    factory, nparams, _ = CATALOG[name]
    params = tuple(float(x) for x in parameters)
    if len(params) != nparams:
        raise ValueError(f"model {name!r} expects {nparams} parameters, got {len(params)}")
    if name == "dirichlet_power":
        k = params[1]
        if k != int(k) or k < 2:
            raise ValueError("dirichlet_power exponent must be an integer >= 2")
        params = (params[0], int(k))
    if name == "power_dirichlet" and params[0] <= 1.0:
        raise ValueError("power_dirichlet exponent m must exceed 1")
    return LagrangianModel(name=name, parameters=params, evaluator=factory(*params))


# ---------------------------------------------------------------------------
# expression models
# ---------------------------------------------------------------------------

_ALLOWED_CALLS = {"exp": ad.exp, "log": ad.log, "sqrt": ad.sqrt}
_ALLOWED_BINOPS = {ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow}


def _compile_expression(text):
    """Compile a +,-,*,/,**,exp,log,sqrt expression over p, q into an evaluator."""
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"cannot parse expression {text!r}: {exc}") from None

    def build(node):
        if isinstance(node, ast.Expression):
            return build(node.body)
        if isinstance(node, ast.Constant):
            if not isinstance(node.value, (int, float)):
                raise ValueError(f"non-numeric constant {node.value!r}")
            c = float(node.value)
            return lambda p, q: c
        if isinstance(node, ast.Name):
            if node.id == "p":
                return lambda p, q: p
            if node.id == "q":
                return lambda p, q: q
            raise ValueError(f"unknown name {node.id!r}; only p and q are available")
        if isinstance(node, ast.UnaryOp):
            inner = build(node.operand)
            if isinstance(node.op, ast.USub):
                return lambda p, q: -inner(p, q)
            if isinstance(node.op, ast.UAdd):
                return inner
            raise ValueError("unsupported unary operator")
        if isinstance(node, ast.BinOp):
            if type(node.op) not in _ALLOWED_BINOPS:
                raise ValueError("unsupported binary operator")
            left, right = build(node.left), build(node.right)
            op = type(node.op)
            if op is ast.Add:
                return lambda p, q: left(p, q) + right(p, q)
            if op is ast.Sub:
                return lambda p, q: left(p, q) - right(p, q)
            if op is ast.Mult:
                return lambda p, q: left(p, q) * right(p, q)
            if op is ast.Div:
                return lambda p, q: left(p, q) / right(p, q)
            # power: constant exponents stay numeric so integer rules apply
            if isinstance(node.right, ast.Constant):
                exponent = float(node.right.value)
                return lambda p, q: left(p, q) ** exponent
            return lambda p, q: left(p, q) ** right(p, q)
        if isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in _ALLOWED_CALLS:
                raise ValueError("only exp, log and sqrt calls are allowed")
            if len(node.args) != 1 or node.keywords:
                raise ValueError(f"{node.func.id} takes exactly one positional argument")
            fn = _ALLOWED_CALLS[node.func.id]
            inner = build(node.args[0])
            return lambda p, q: fn(inner(p, q))
        raise ValueError(f"unsupported syntax element {type(node).__name__}")

    return build(tree)


def make_expression_model(expression, smooth_at_origin=False):
    """Build a custom model from an arithmetic expression string over p and q."""
    evaluator = _compile_expression(expression)
    return LagrangianModel(name="expression", parameters=(),
                           evaluator=lambda p, q: Dual2._lift(evaluator(p, q)),
                           smooth_at_origin=smooth_at_origin)


# ---------------------------------------------------------------------------
# jet evaluation
# ---------------------------------------------------------------------------

def eval_jet(model, p, q, validate=True):
    """Evaluate F and all partials up to second order at (p, q).

    Scalars in, scalar jet out; arrays in, array jet out.  Raises on p < 0
    and on non-finite results (singular expression at the evaluation point).
    """
    p_arr = np.asarray(p, dtype=float)
    q_arr = np.asarray(q, dtype=float)
    if np.any(p_arr < 0):
        raise ValueError("gradient magnitude p must be non-negative")
    scalar = p_arr.ndim == 0 and q_arr.ndim == 0
    with np.errstate(all="ignore"):  # singular points surface as non-finite
        out = model.evaluator(Dual2.var_p(p_arr), Dual2.var_q(q_arr))
    out = Dual2._lift(out)
    entries = [np.broadcast_to(np.asarray(e, dtype=float),
                               np.broadcast_shapes(p_arr.shape, q_arr.shape))
               for e in (out.v, out.dp, out.dq, out.dpp, out.dpq, out.dqq)]
    if validate and not all(np.all(np.isfinite(e)) for e in entries):
        raise EvaluationError(
            f"model {model.name!r} produced a non-finite jet entry")
    if scalar:
        entries = [float(e) for e in entries]
    return Jet2(*entries)


def divergence_coefficients(model, p, q):
    """Coefficients (g, h) of the divergence form of the optimality equation.

    g(p, q) = F_p/p with the analytic limit F_pp(0, q) used for p below
    ORIGIN_EPS (valid when F_p(0, q) = 0), and h = -F_q.
    """
    p_arr = np.asarray(p, dtype=float)
    q_arr = np.asarray(q, dtype=float)
    scalar = p_arr.ndim == 0 and q_arr.ndim == 0
    small = p_arr <= ORIGIN_EPS
    if np.any(small) and not model.smooth_at_origin:
        raise OriginLimitError(
            f"model {model.name!r} is not smooth at the origin; "
            "g = F_p/p has no declared p -> 0 limit")
    jet = eval_jet(model, np.maximum(p_arr, ORIGIN_EPS), q_arr)
    g = jet.F_p / np.maximum(p_arr, ORIGIN_EPS)
    if np.any(small):
        jet0 = eval_jet(model, np.zeros_like(p_arr), q_arr)
        g = np.where(small, jet0.F_pp, g)
    h = -eval_jet(model, p_arr, q_arr).F_q
    if scalar:
        return float(g), float(h)
    return np.asarray(g, dtype=float), np.asarray(h, dtype=float)


def candidate_p2_derivative(model, p, q):
    """d(p F_p - F)/d(p^2) built from quotient pieces of the jet.

    Equals F_pp/2 analytically (the F_p terms cancel); kept unsimplified so
    the cancellation itself is checkable.
    """
    p_arr = np.asarray(p, dtype=float)
    jet = eval_jet(model, p_arr, np.asarray(q, dtype=float))
    return (jet.F_p + p_arr * jet.F_pp - jet.F_p) / (2.0 * p_arr)


def pfunction_identity_residual(model, p, q):
    """Residual of the compatibility identity satisfied by phi = p F_p - F.

    With g = F_p/p and h = -F_q the candidate phi must satisfy
    ``2 (h + p^2 dg/dq) phi_{p2} = (g + 2 p^2 dg/dp2) phi_q``; the two sides
    cancel algebraically, so any returned magnitude is rounding noise.  Each
    factor is rebuilt separately from the jet rather than simplified first.
    """
    p_arr = np.asarray(p, dtype=float)
    q_arr = np.asarray(q, dtype=float)
    if np.any(p_arr <= 0):
        raise ValueError("the identity residual requires p > 0")
    jet = eval_jet(model, p_arr, q_arr)
    g = jet.F_p / p_arr
    h = -jet.F_q
    dg_dq = jet.F_pq / p_arr
    dg_dp2 = (p_arr * jet.F_pp - jet.F_p) / (2.0 * p_arr ** 3)
    phi_p2 = candidate_p2_derivative(model, p_arr, q_arr)
    phi_q = p_arr * jet.F_pq - jet.F_q
    lhs = 2.0 * (h + p_arr ** 2 * dg_dq) * phi_p2
    rhs = (g + 2.0 * p_arr ** 2 * dg_dp2) * phi_q
    res = np.abs(lhs - rhs)
    if p_arr.ndim == 0 and q_arr.ndim == 0:
        return float(res)
    return res


def ellipticity_coefficient(model, p, q):
    """g + 2 p^2 dg/dp2, rebuilt from quotient pieces; equals F_pp analytically."""
    p_arr = np.asarray(p, dtype=float)
    jet = eval_jet(model, p_arr, np.asarray(q, dtype=float))
    g = jet.F_p / p_arr
    dg_dp2 = (p_arr * jet.F_pp - jet.F_p) / (2.0 * p_arr ** 3)
    return g + 2.0 * p_arr ** 2 * dg_dp2


# ---------------------------------------------------------------------------
# hypothesis checking
# ---------------------------------------------------------------------------

def halton_samples(count, box):
    """Deterministic low-discrepancy (p, q) samples over a box (bases 2 and 3)."""

    def vdc(n, base):
        x, denom = 0.0, 1.0
        while n:
            n, rem = divmod(n, base)
            denom *= base
            x += rem / denom
        return x

    (p_lo, p_hi), (q_lo, q_hi) = box
    pts = np.empty((count, 2))
    for i in range(count):
        pts[i, 0] = p_lo + (p_hi - p_lo) * vdc(i + 1, 2)
        pts[i, 1] = q_lo + (q_hi - q_lo) * vdc(i + 1, 3)
    return pts


def _box_samples(box, samples):
    """Corners, edge midpoints and center plus a Halton fill of the box."""
    (p_lo, p_hi), (q_lo, q_hi) = box
    ps = [p_lo, p_hi, (p_lo + p_hi) / 2.0]
    qs = [q_lo, q_hi, (q_lo + q_hi) / 2.0]
    fixed = np.array([(a, b) for a in ps for b in qs])
    if samples > 0:
        return np.vstack([fixed, halton_samples(samples, box)])
    return fixed


def check_hypotheses(model, box=((0.0, 1.0), (-1.0, 1.0)), samples=512):
    """Sample the box deterministically and test the structural hypotheses on F.

    Checks convexity F_pp > 0, positivity F > 0 (case 2), the pair F < 0 and
    p F_p - F > 0 (case 3), and monotonicity F_q >= 0, recording extremal
    values and one witness per violated check.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    pts = _box_samples(box, samples)
    p, q = pts[:, 0], pts[:, 1]
    jet = eval_jet(model, p, q)
    phi = p * jet.F_p - jet.F

    witnesses = {}

    def first_violation(mask, values):
        idx = int(np.argmax(mask))
        return (float(p[idx]), float(q[idx]), float(values[idx]))

    conv_bad = jet.F_pp <= 0.0
    convexity_ok = not bool(conv_bad.any())
    if not convexity_ok:
        witnesses["convexity"] = first_violation(conv_bad, jet.F_pp)

    case2_bad = jet.F <= 0.0
    case2_ok = not bool(case2_bad.any())
    if not case2_ok:
        witnesses["case2"] = first_violation(case2_bad, jet.F)

    case3_bad = (jet.F >= 0.0) | (phi <= 0.0)
    case3_ok = not bool(case3_bad.any())
    if not case3_ok:
        bad_F = jet.F >= 0.0
        if bad_F.any():
            witnesses["case3"] = first_violation(bad_F, jet.F)
        else:
            witnesses["case3"] = first_violation(phi <= 0.0, phi)

    mono_bad = jet.F_q < 0.0
    monotone_q_ok = not bool(mono_bad.any())
    if not monotone_q_ok:
        witnesses["monotone_q"] = first_violation(mono_bad, jet.F_q)

    origin_smooth_ok = True
    if model.smooth_at_origin:
        jet0 = eval_jet(model, np.zeros_like(q), q)
        origin_bad = np.abs(jet0.F_p) > 1e-12
        origin_smooth_ok = not bool(origin_bad.any())
        if not origin_smooth_ok:
            idx = int(np.argmax(origin_bad))
            witnesses["origin_smoothness"] = (0.0, float(q[idx]), float(jet0.F_p[idx]))

    return HypothesisReport(
        convexity_ok=convexity_ok,
        min_F_pp=float(np.min(jet.F_pp)),
        case2_ok=case2_ok,
        min_F=float(np.min(jet.F)),
        case3_ok=case3_ok,
        max_F=float(np.max(jet.F)),
        min_p_F_p_minus_F=float(np.min(phi)),
        monotone_q_ok=monotone_q_ok,
        min_F_q=float(np.min(jet.F_q)),
        origin_smooth_ok=origin_smooth_ok,
        sample_box=box,
        samples=len(pts),
        violation_witnesses=witnesses,
    )
