import math

import numpy as np
import pytest

from brwllt.llt import (
    constants,
    constants_for,
    expansion_bracket,
    fit_correction_coefficients,
    gamma_residual,
    gaussian_identity_check,
    quad_form,
    rw_expansion,
    second_order_candidates,
)
from brwllt.step_law import (
    Moments,
    WalkClass,
    classify,
    lazy_simple_law,
    moments,
    validate,
)

SIMPLE = validate(1, 0.0, [[1.0]])
LAZY_HALF = validate(1, 0.5, [[0.5]])


def identity_moments(d):
    ones = (1.0,) * d
    return Moments(
        gamma2=ones,
        gamma4=ones,
        gamma6=ones,
        det_gamma2=1.0,
        tr_g4g2m2=float(d),
        tr_g6g2m3=float(d),
        tr_g4sq_g2m4=float(d),
    )


def random_moments(d, rng):
    g2 = tuple(rng.uniform(0.3, 2.0, size=d))
    g4 = tuple(rng.uniform(0.3, 3.0, size=d))
    g6 = tuple(rng.uniform(0.3, 4.0, size=d))
    return Moments(
        gamma2=g2,
        gamma4=g4,
        gamma6=g6,
        det_gamma2=math.prod(g2),
        tr_g4g2m2=math.fsum(a / b**2 for a, b in zip(g4, g2)),
        tr_g6g2m3=math.fsum(a / b**3 for a, b in zip(g6, g2)),
        tr_g4sq_g2m4=math.fsum(a**2 / b**4 for a, b in zip(g4, g2)),
    )


class TestConstants:
    def test_identity_d1(self):
        c = constants(identity_moments(1), WalkClass.APERIODIC)
        assert abs(c.tau_d - (-0.25)) <= 1e-13
        assert abs(c.lambda_d[0] - (-0.625)) <= 1e-13
        assert abs(c.chi_d - 1.0 / 32.0) <= 1e-13

    def test_chi_terms_identity_d1(self):
        # term-by-term: -15/64 + 1/12 + 1/128 - 1/48 + 75/384
        total = -15 / 64 + 1 / 12 + 1 / 128 - 1 / 48 + 75 / 384
        assert abs(total - 1 / 32) <= 1e-15
        c = constants(identity_moments(1), WalkClass.APERIODIC)
        assert abs(c.chi_d - total) <= 1e-13

    def test_tau_d2_half_moments(self):
        m = Moments(
            gamma2=(0.5, 0.5),
            gamma4=(0.5, 0.5),
            gamma6=(0.5, 0.5),
            det_gamma2=0.25,
            tr_g4g2m2=4.0,
            tr_g6g2m3=8.0,
            tr_g4sq_g2m4=8.0,
        )
        c = constants(m, WalkClass.APERIODIC)
        assert abs(c.tau_d - (-0.5)) <= 1e-13

    def test_invariants_random(self):
        rng = np.random.default_rng(3)
        for d in (1, 2, 3):
            m = random_moments(d, rng)
            c = constants(m, WalkClass.APERIODIC)
            d_ = float(d)
            assert abs(c.tau_d - (m.tr_g4g2m2 / 8 - d_ * (d_ + 2) / 8)) <= 1e-13
            for s in range(d):
                expect = (m.tr_g4g2m2 - (d_ + 2) * (d_ + 4)) / (16 * m.gamma2[s]) + m.gamma4[
                    s
                ] / (4 * m.gamma2[s] ** 3)
                assert abs(c.lambda_d[s] - expect) <= 1e-13

    def test_scale_consistency(self):
        # constants from step_law-built moments match hand-built moments bit-for-bit
        law = validate(2, 0.1, [[0.2, 0.3], [0.15, 0.25]])
        m = moments(law)
        hand = Moments(
            gamma2=m.gamma2,
            gamma4=m.gamma4,
            gamma6=m.gamma6,
            det_gamma2=m.det_gamma2,
            tr_g4g2m2=m.tr_g4g2m2,
            tr_g6g2m3=m.tr_g6g2m3,
            tr_g4sq_g2m4=m.tr_g4sq_g2m4,
        )
        assert constants(m, WalkClass.APERIODIC) == constants(hand, WalkClass.APERIODIC)


class TestRwExpansion:
    def test_z0_formula(self):
        c = constants_for(SIMPLE)
        m = moments(SIMPLE)
        n = 100
        expect = 2.0 * (2 * math.pi * n) ** -0.5 * (1 - 1 / (4 * n) + (1 / 32) / n**2)
        assert abs(rw_expansion(c, m, n, (0,)) - expect) <= 1e-15

    def test_parity_mismatch_zero(self):
        c = constants_for(SIMPLE)
        m = moments(SIMPLE)
        assert rw_expansion(c, m, 3, (0,)) == 0.0

    def test_factor_two(self):
        # bipartite value is exactly twice the aperiodic bracket
        c = constants_for(SIMPLE)
        m = moments(SIMPLE)
        n, z = 50, (2,)
        aper = (2 * math.pi * n) ** -0.5 * c.norm * expansion_bracket(c, m, n, z)
        assert rw_expansion(c, m, n, z) == 2.0 * aper

    def test_corollary_first_order_specialization(self):
        # tau_d - q/2 for the lazy nearest-neighbour law
        for sigma in (0.0, 0.25, 0.5):
            for d in (1, 2, 3):
                law = lazy_simple_law(d, sigma)
                m = moments(law)
                c = constants(m, classify(law))
                for z in [(0,) * d, (1,) + (0,) * (d - 1), (2,) * d]:
                    lhs = c.tau_d - 0.5 * quad_form(m, z)
                    z2 = sum(v * v for v in z)
                    rhs = (d / (1 - sigma)) * (sigma * (d + 2) / 8 - 0.25 - z2 / 2)
                    assert abs(lhs - rhs) <= 1e-12


class TestGammaResidual:
    def test_decreasing_lazy(self):
        law = LAZY_HALF
        assert abs(gamma_residual(law, 1024, (0,))) < abs(gamma_residual(law, 64, (0,)))

    def test_definition_unrolled(self):
        c = constants_for(SIMPLE)
        m = moments(SIMPLE)
        g = gamma_residual(SIMPLE, 2, (0,))
        assert abs(g - 2**2.5 * (0.5 - rw_expansion(c, m, 2, (0,)))) <= 1e-14

    def test_parity_mismatch_residual_zero(self):
        assert gamma_residual(SIMPLE, 4, (1,)) == 0.0


class TestCoefficientFit:
    def test_simple_walk_z0(self):
        fit = fit_correction_coefficients(SIMPLE, (0,), (256, 1024, 4096))
        assert abs(fit.c1_hat - (-0.25)) <= 0.01 * 0.25
        assert abs(fit.c2_hat - 1 / 32) <= 0.05 * (1 / 32)

    def test_lazy_walk_z0(self):
        c = constants_for(LAZY_HALF)
        fit = fit_correction_coefficients(LAZY_HALF, (0,), (256, 1024, 4096))
        assert abs(fit.c1_hat - c.tau_d) <= 0.01 * abs(c.tau_d)

    def test_z0_independent_of_lambda(self):
        fit = fit_correction_coefficients(SIMPLE, (0,), (64, 128, 256))
        assert fit.c2_theorem == fit.c2_flipped

    def test_sign_arbiter_prefers_theorem(self):
        # the exact probabilities decide the Lambda sign question
        fit = fit_correction_coefficients(SIMPLE, (2,), (256, 1024, 4096))
        assert abs(fit.c2_hat - fit.c2_theorem) < abs(fit.c2_hat - fit.c2_flipped)

    def test_needs_three_points(self):
        with pytest.raises(ValueError):
            fit_correction_coefficients(SIMPLE, (0,), (64, 128))

    def test_parity_gate(self):
        with pytest.raises(ValueError):
            fit_correction_coefficients(SIMPLE, (1,), (64, 128, 256))


class TestGaussianIdentities:
    @pytest.mark.parametrize("idx", range(1, 14))
    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_randomized(self, idx, d):
        rng = np.random.default_rng(100 * d + idx)
        m = random_moments(d, rng)
        z = tuple(int(v) for v in rng.integers(-3, 4, size=d)) if idx <= 4 else None
        assert gaussian_identity_check(m, idx, z=z) <= 1e-8

    def test_identity5_pure_mass(self):
        rng = np.random.default_rng(9)
        assert gaussian_identity_check(random_moments(2, rng), 5) <= 1e-8

    def test_identity7_d1_closed_form(self):
        # brute 4th moment: integral = 3 sqrt(2 pi)
        m = identity_moments(1)
        err = gaussian_identity_check(m, 7)
        assert err <= 1e-10

    def test_identity1_z0(self):
        m = identity_moments(2)
        assert gaussian_identity_check(m, 1, z=(0, 0)) <= 1e-12

    def test_second_order_candidates_differ_off_origin(self):
        m = moments(SIMPLE)
        c = constants(m, WalkClass.BIPARTITE)
        a, b = second_order_candidates(c, m, (2,))
        assert a != b
        assert abs((a - b) - 2 * (5 / 8) * 4) <= 1e-12  # 2*|Lambda|*z^2 at d=1
