"""Model jets, divergence coefficients, hypothesis checks, identity residual."""

import math

import numpy as np
import pytest

from emlab.errors import OriginLimitError
from emlab.lagrangian import (
    CATALOG,
    candidate_p2_derivative,
    check_hypotheses,
    divergence_coefficients,
    ellipticity_coefficient,
    eval_jet,
    halton_samples,
    make_expression_model,
    make_model,
    pfunction_identity_residual,
)

TORSION = make_model("dirichlet_affine", [0.5, 1.0])          # F = p^2/2 + q + 1/2
SHIFTED = make_model("dirichlet_affine", [-0.2, 1.0])         # F = p^2/2 + q - 0.2
EXP = make_model("dirichlet_exponential", [1.0, 1.0])         # F = p^2/2 + e^q
QUARTIC = make_model("power_dirichlet", [4.0, 0.0, 1.0])      # F = p^4/4 + q
MINSURF = make_model("minimal_surface", [0.0, 0.0])           # F = sqrt(1 + p^2)

CATALOG_MODELS = [TORSION, SHIFTED, EXP, QUARTIC, MINSURF,
                  make_model("dirichlet_power", [0.5, 3]),
                  make_model("minimal_surface", [2.0, 1.0])]


class TestEvalJet:
    def test_torsion_point(self):
        jet = eval_jet(TORSION, 1.0, 0.0)
        assert jet.F == pytest.approx(1.0)  # 1/2 + 0 + 1/2
        assert jet.F_p == pytest.approx(1.0)
        assert jet.F_q == pytest.approx(1.0)
        assert jet.F_pp == pytest.approx(1.0)
        assert jet.F_pq == pytest.approx(0.0, abs=1e-15)

    def test_minimal_surface_origin(self):
        jet = eval_jet(MINSURF, 0.0, 3.7)
        assert jet.F == pytest.approx(1.0)
        assert jet.F_p == pytest.approx(0.0, abs=1e-15)
        assert jet.F_pp == pytest.approx(1.0)

    def test_exponential_second_derivatives(self):
        jet = eval_jet(EXP, 2.0, 1.0)
        assert jet.F_pq == pytest.approx(0.0, abs=1e-15)
        assert jet.F_qq == pytest.approx(math.e, rel=1e-12)


class TestDivergenceCoefficients:
    def test_quadratic_family_gives_laplacian(self):
        for p in (0.0, 0.3, 2.0):
            g, h = divergence_coefficients(TORSION, p, -0.1)
            assert g == pytest.approx(1.0)
            assert h == pytest.approx(-1.0)

    def test_minimal_surface_origin_limit(self):
        g, _ = divergence_coefficients(MINSURF, 0.0, 0.0)
        assert g == pytest.approx(1.0)

    def test_quartic_origin_limit_matches_extrapolation(self):
        g0, _ = divergence_coefficients(QUARTIC, 0.0, 0.0)
        assert g0 == pytest.approx(0.0, abs=1e-15)
        # g(p) = p^2: Richardson extrapolation of samples at 1e-3, 1e-4 -> 0
        g1, _ = divergence_coefficients(QUARTIC, 1e-3, 0.0)
        g2, _ = divergence_coefficients(QUARTIC, 1e-4, 0.0)
        assert g1 == pytest.approx(1e-6, rel=1e-10)
        extrapolated = g2 + (g2 - g1) / (10.0**2 - 1.0) * 1.0
        assert abs(extrapolated) < 1e-7

    def test_non_smooth_origin_raises(self):
        model = make_expression_model("p + q*q")  # F_p(0, q) = 1 != 0
        with pytest.raises(OriginLimitError):
            divergence_coefficients(model, 0.0, 0.0)


class TestCheckHypotheses:
    def test_torsion_box(self):
        rep = check_hypotheses(TORSION, box=((0.0, 1.0), (-0.25, 0.0)), samples=256)
        assert rep.convexity_ok
        assert rep.case2_ok
        assert rep.monotone_q_ok
        assert rep.min_F == pytest.approx(0.25)  # corner p=0, q=-1/4
        assert rep.min_F_pp == pytest.approx(1.0)

    def test_shifted_box_is_case3(self):
        rep = check_hypotheses(SHIFTED, box=((0.0, 0.5), (-0.25, 0.0)), samples=256)
        assert rep.case3_ok
        assert not rep.case2_ok
        assert rep.max_F == pytest.approx(-0.075)
        assert rep.min_p_F_p_minus_F == pytest.approx(0.2)

    def test_minimal_surface_always_case2(self):
        rep = check_hypotheses(MINSURF, box=((0.0, 3.0), (-5.0, 5.0)), samples=256)
        assert rep.case2_ok
        assert not rep.case3_ok
        assert rep.min_F >= 1.0

    def test_witnesses_reproduce(self):
        rep = check_hypotheses(QUARTIC, box=((0.0, 1.0), (-1.0, 1.0)), samples=128)
        assert not rep.convexity_ok  # F_pp = 3p^2 vanishes at p = 0
        p, q, value = rep.violation_witnesses["convexity"]
        assert eval_jet(QUARTIC, p, q).F_pp == pytest.approx(value, abs=1e-15)
        assert value <= 0.0

    def test_false_origin_smoothness_claim_witnessed(self):
        # declared smooth but F_p(0, q) = 1: the claim must be caught
        model = make_expression_model("p + 0.5*p**2 + q", smooth_at_origin=True)
        rep = check_hypotheses(model, box=((0.0, 1.0), (-1.0, 1.0)), samples=64)
        assert not rep.origin_smooth_ok
        _, q, value = rep.violation_witnesses["origin_smoothness"]
        assert value == pytest.approx(1.0)

    def test_catalog_models_origin_smooth(self):
        for model in CATALOG_MODELS:
            rep = check_hypotheses(model, box=((0.0, 1.0), (-1.0, 1.0)), samples=64)
            assert rep.origin_smooth_ok


class TestPFunctionIdentity:
    @pytest.mark.parametrize("model", CATALOG_MODELS, ids=lambda m: m.name)
    def test_residual_at_single_points(self, model):
        assert pfunction_identity_residual(model, 1.0, 0.0) < 1e-12

    def test_exponential_point(self):
        assert pfunction_identity_residual(EXP, 0.3, -2.0) < 1e-12

    @pytest.mark.parametrize("model", CATALOG_MODELS, ids=lambda m: m.name)
    def test_low_discrepancy_sweep(self, model):
        pts = halton_samples(1000, ((1e-3, 2.0), (-2.0, 2.0)))
        res = pfunction_identity_residual(model, pts[:, 0], pts[:, 1])
        assert float(np.max(res)) < 1e-11

    @pytest.mark.parametrize("model", CATALOG_MODELS, ids=lambda m: m.name)
    def test_ellipticity_coefficient_equals_F_pp(self, model):
        pts = halton_samples(200, ((1e-3, 2.0), (-2.0, 2.0)))
        coeff = ellipticity_coefficient(model, pts[:, 0], pts[:, 1])
        jet = eval_jet(model, pts[:, 0], pts[:, 1])
        assert float(np.max(np.abs(coeff - jet.F_pp))) < 1e-12

    @pytest.mark.parametrize("model", CATALOG_MODELS, ids=lambda m: m.name)
    def test_candidate_p2_derivative_is_half_F_pp(self, model):
        pts = halton_samples(200, ((1e-3, 2.0), (-2.0, 2.0)))
        deriv = candidate_p2_derivative(model, pts[:, 0], pts[:, 1])
        jet = eval_jet(model, pts[:, 0], pts[:, 1])
        assert float(np.max(np.abs(deriv - 0.5 * jet.F_pp))) < 1e-12

    def test_domain_error_at_zero(self):
        with pytest.raises(ValueError):
            pfunction_identity_residual(TORSION, 0.0, 0.0)


class TestExpressionModels:
    def test_expression_matches_catalog(self):
        custom = make_expression_model("0.5*p**2 + q + 0.5", smooth_at_origin=True)
        for p, q in [(0.0, 0.0), (1.0, -0.2), (2.0, 1.0)]:
            a = eval_jet(custom, p, q)
            b = eval_jet(TORSION, p, q)
            for x, y in zip(a.as_tuple(), b.as_tuple()):
                assert x == pytest.approx(y, abs=1e-15)

    def test_rejects_unknown_names(self):
        with pytest.raises(ValueError):
            make_expression_model("p + r")

    def test_singular_evaluation_raises(self):
        from emlab.errors import EvaluationError
        model = make_expression_model("log(p) + q")
        with pytest.raises(EvaluationError):
            eval_jet(model, 0.0, 1.0)

    def test_rejects_calls(self):
        with pytest.raises(ValueError):
            make_expression_model("__import__('os').system('true')")


def test_catalog_names_stable():
    assert set(CATALOG) == {"dirichlet_affine", "dirichlet_exponential",
                            "dirichlet_power", "power_dirichlet", "minimal_surface"}
