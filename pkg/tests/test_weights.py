"""Weight-sequence analytics against closed forms and zeta oracles."""

import math
from fractions import Fraction

import pytest
from scipy.special import zeta

from simgen import weights as W
from simgen.errors import (BoundaryImprecise, CapacityExceeded, EmptySupport,
                           RationalUnavailable, RhoRequired)

INF = float("inf")


def z(s):
    return float(zeta(s, 1))


class TestFamilies:
    def test_uniform_basics(self):
        u = W.uniform()
        assert u.rho == 1.0
        assert u.span == 1
        assert u.weight(0) == 1.0 and u.weight(7) == 1.0
        assert u.weight_fraction(3) == Fraction(1)

    def test_geometric_weights(self):
        g = W.geometric(0.25)
        assert g.weight_fraction(0) == Fraction(1, 4)
        assert g.weight_fraction(2) == Fraction(1, 4) * Fraction(3, 4) ** 2
        assert g.rho == pytest.approx(4 / 3)

    def test_poisson_weights(self):
        p = W.poisson(2.0)
        assert p.weight(3) == pytest.approx(8 / 6 * math.exp(-2))
        assert p.rho == INF

    def test_binary_full_support(self):
        b = W.binary_full()
        assert b.span == 2
        assert b.omega == 2
        assert b.weight(1) == 0.0
        assert b.weight_fraction(2) == 1

    def test_dary_binomial_weights(self):
        d = W.dary(3)
        assert d.omega == 3
        assert d.weight_fraction(2) == 3

    def test_powerlaw_weights(self):
        p = W.powerlaw(4)
        assert p.weight(0) == 1.0
        assert p.weight(1) == pytest.approx(1 / 16)
        assert p.weight_fraction(3) == Fraction(1, 256)
        # non-integer exponent has no exact rationals
        with pytest.raises(RationalUnavailable):
            W.powerlaw(2.5).weight_fraction(2)

    def test_forest_weights(self):
        r = W.rooted_forest()
        # k^(k-1)/k!: 1, 1, 1, 3/2, 8/3
        assert r.weight_fraction(3) == Fraction(3, 2)
        assert r.weight_fraction(4) == Fraction(8, 3)
        assert r.rho == pytest.approx(math.exp(-1))
        u = W.unrooted_forest()
        # k^(k-2)/k!: w_3 = 3/6 = 1/2, w_4 = 16/24 = 2/3
        assert u.weight_fraction(3) == Fraction(1, 2)
        assert u.weight_fraction(4) == Fraction(2, 3)

    def test_loglaw_weights(self):
        l = W.loglaw()
        assert l.weight(0) == 0.0
        assert l.alpha_min == 1
        assert l.weight_fraction(4) == Fraction(1, 4)

    def test_factorial_zero_radius(self):
        f = W.factorial()
        assert f.rho == 0.0
        assert f.weight(3) == pytest.approx(6.0)

    def test_explicit_and_empty(self):
        e = W.explicit([1, 0, 3], rho=INF)
        assert e.weight_fraction(2) == 3
        assert e.omega == 2
        with pytest.raises(EmptySupport):
            W.explicit([0, 0, 0])

    def test_by_name_parsing(self):
        assert W.by_name("uniform") == W.uniform()
        assert W.by_name("dary(3)") == W.dary(3)
        assert W.by_name("powerlaw(2.5)") == W.powerlaw(2.5)
        assert W.by_name("geometric(0.3)") == W.geometric(0.3)

    def test_value_equality_across_instances(self):
        assert W.powerlaw(2.5) == W.powerlaw(2.5)
        assert hash(W.uniform()) == hash(W.uniform())
        assert W.powerlaw(2.5) != W.powerlaw(4)


class TestSupportMeta:
    def test_span_detection(self):
        assert W.binary_full().span == 2
        assert W.uniform().span == 1
        assert W.explicit([1, 0, 0, 5], rho=INF).span == 3

    def test_alpha_min(self):
        assert W.loglaw().alpha_min == 1
        assert W.explicit([0, 0, 1, 0, 1], rho=INF).alpha_min == 2


class TestBoundaryAnalytics:
    def test_phi_uniform(self):
        assert W.phi(W.uniform(), 0.5) == pytest.approx(2.0, rel=1e-10)
        assert W.phi(W.uniform(), 1.0) == INF

    def test_phi_finite_support_exact(self):
        assert W.phi(W.binary_full(), 1.0) == pytest.approx(2.0)
        assert W.phi(W.dary(2), 3.0) == pytest.approx((1 + 3) ** 2)

    def test_psi_monotone_uniform(self):
        u = W.uniform()
        vals = [W.psi(u, t) for t in (0.1, 0.3, 0.5, 0.7)]
        assert vals == sorted(vals)
        assert W.psi(u, 0.5) == pytest.approx(1.0, rel=1e-9)

    # boundary mean for (k+1)^-beta comes out of zeta differences
    def test_nu_powerlaw4_zeta_oracle(self):
        want = (z(3) - z(4)) / z(4)
        assert W.nu(W.powerlaw(4)) == pytest.approx(want, abs=5e-8)
        assert W.nu(W.powerlaw(4)) == pytest.approx(0.110627, abs=1e-6)

    def test_nu_powerlaw25_zeta_oracle(self):
        want = (z(1.5) - z(2.5)) / z(2.5)
        assert W.nu(W.powerlaw(2.5)) == pytest.approx(want, abs=5e-7)

    def test_nu_near_unit_exponent(self):
        # the exponent where the boundary mean crosses 1
        assert W.nu(W.powerlaw(2.478749)) == pytest.approx(1.0, abs=2e-5)

    def test_nu_divergent_families(self):
        for spec in (W.uniform(), W.loglaw(), W.rooted_forest(),
                     W.poisson(1.0), W.geometric(0.3), W.inv_factorial()):
            assert W.nu(spec) == INF

    def test_nu_finite_support(self):
        assert W.nu(W.binary_full()) == 2.0
        assert W.nu(W.dary(3)) == 3.0
        assert W.nu(W.motzkin()) == 2.0

    def test_nu_zero_radius(self):
        assert W.nu(W.factorial()) == 0.0

    def test_nu_unrooted_forest(self):
        assert W.nu(W.unrooted_forest()) == pytest.approx(2.0, abs=1e-6)

    def test_nu_requires_rho(self):
        with pytest.raises(RhoRequired):
            W.nu(W.explicit([1, 1, 1]))


class TestTauSolver:
    def test_uniform_critical(self):
        assert W.tau_of(W.uniform(), 1.0) == pytest.approx(0.5, abs=1e-11)

    def test_uniform_mean_two(self):
        assert W.tau_of(W.uniform(), 2.0) == pytest.approx(2 / 3, abs=1e-11)

    def test_saturates_at_rho(self):
        p = W.powerlaw(4)
        assert W.tau_of(p, 1.0) == 1.0     # above nu: clamp to the boundary
        assert W.tau_of(p, W.nu(p)) == 1.0

    def test_infinite_radius_bracket_growth(self):
        assert W.tau_of(W.poisson(1.0), 3.0) == pytest.approx(3.0, rel=1e-10)

    def test_capacity_errors(self):
        with pytest.raises(CapacityExceeded):
            W.tau_of(W.dary(3), 3.0)
        with pytest.raises(CapacityExceeded):
            W.tau_of(W.loglaw(), 0.5)

    def test_zero_mean_degenerate(self):
        assert W.tau_of(W.uniform(), 0.0) == 0.0


class TestCanonicalLaw:
    def test_uniform_critical(self):
        law = W.canonical_law(W.uniform(), 1.0)
        assert law.tau == pytest.approx(0.5, abs=1e-11)
        assert law.phi_tau == pytest.approx(2.0, rel=1e-10)
        assert law.sigma2 == pytest.approx(2.0, rel=1e-9)
        assert law.mu == 1.0
        assert law.case_label == "Ia"
        # pi_k = 2^-(k+1)
        for k in range(6):
            assert law.pi(k) == pytest.approx(2.0 ** -(k + 1), rel=1e-9)
        assert law.rho_Z == pytest.approx(0.25, rel=1e-9)

    def test_uniform_supercritical_alloc(self):
        law = W.canonical_law(W.uniform(), 2.0)
        assert law.tau == pytest.approx(2 / 3, abs=1e-11)
        assert law.phi_tau == pytest.approx(3.0, rel=1e-9)
        assert law.mu == 2.0

    def test_dary3_binomial_offspring(self):
        law = W.canonical_law(W.dary(3), 1.0)
        assert law.tau == pytest.approx(0.5, rel=1e-9)
        for k, want in enumerate((8, 12, 6, 1)):
            assert law.pi(k) == pytest.approx(want / 27, rel=1e-8)
        assert law.sigma2 == pytest.approx(3 * (1 / 3) * (2 / 3), rel=1e-8)

    def test_motzkin_flat_offspring(self):
        law = W.canonical_law(W.motzkin(), 1.0)
        for k in range(3):
            assert law.pi(k) == pytest.approx(1 / 3, rel=1e-9)
        assert law.sigma2 == pytest.approx(2 / 3, rel=1e-9)

    def test_binary_full_critical(self):
        law = W.canonical_law(W.binary_full(), 1.0)
        assert law.tau == pytest.approx(1.0)
        assert law.pi(0) == pytest.approx(0.5)
        assert law.pi(2) == pytest.approx(0.5)
        assert law.sigma2 == pytest.approx(1.0)
        assert law.case_label == "Ia"

    def test_poisson_critical(self):
        law = W.canonical_law(W.poisson(1.0), 1.0)
        assert law.tau == pytest.approx(1.0, rel=1e-9)
        assert law.sigma2 == pytest.approx(1.0, rel=1e-8)
        # Poisson(1) offspring
        assert law.pi(2) == pytest.approx(math.exp(-1) / 2, rel=1e-8)

    def test_powerlaw4_subcritical_mean(self):
        # nu < 1 means the tree mean sticks at nu and tau at the boundary
        p = W.powerlaw(4)
        law = W.canonical_law(p, 1.0)
        want_nu = (z(3) - z(4)) / z(4)
        assert law.tau == 1.0
        assert law.mu == pytest.approx(want_nu, abs=5e-8)
        assert law.case_label == "II"
        s2 = (z(2) - 2 * z(3) + z(4)) / z(4) - want_nu ** 2
        assert law.sigma2 == pytest.approx(s2, abs=1e-7)

    def test_powerlaw25_critical_variance_infinite(self):
        # nu < 1 here, so the tree-mode law saturates below mean one
        law = W.canonical_law(W.powerlaw(2.5), 1.0)
        assert law.sigma2 == INF
        assert law.case_label == "II"

    def test_powerlaw25_interior_alloc(self):
        # mpmath oracle: tau and sigma2 at mean 0.9 (120-step bisection,
        # 30 digits); sigma2 conditioning amplifies tau error by ~1e4
        law = W.canonical_law(W.powerlaw(2.5), 0.9)
        assert law.tau == pytest.approx(0.9996563185649172, abs=1e-7)
        assert law.sigma2 == pytest.approx(66.60445113982349, abs=1e-2)
        assert law.alloc_regime == "subcritical"

    def test_factorial_case_iii(self):
        law = W.canonical_law(W.factorial(), 1.0)
        assert law.tau == 0.0
        assert law.case_label == "III"
        assert law.pi(0) == 1.0

    def test_rooted_forest_mean_two(self):
        law = W.canonical_law(W.rooted_forest(), 2.0)
        assert W.psi(law.spec, law.tau) == pytest.approx(2.0, abs=1e-8)
        # infinite boundary mean: every finite target stays subcritical
        assert law.alloc_regime == "subcritical"

    def test_pi_sums_to_one(self):
        for spec, lam in ((W.uniform(), 1.0), (W.dary(3), 1.5),
                          (W.powerlaw(4), 0.05), (W.motzkin(), 1.0)):
            law = W.canonical_law(spec, lam)
            total = sum(law.pi(k) for k in range(200))
            assert total == pytest.approx(1.0, abs=1e-9)

    def test_pi_mean_matches_mu(self):
        for spec, lam in ((W.uniform(), 1.3), (W.poisson(1.0), 0.7),
                          (W.dary(4), 2.0)):
            law = W.canonical_law(spec, lam)
            mean = sum(k * law.pi(k) for k in range(400))
            assert mean == pytest.approx(law.mu, abs=1e-8)

    def test_pi_tail_consistency(self):
        law = W.canonical_law(W.uniform(), 1.0)
        assert law.pi_tail(3) == pytest.approx(2.0 ** -3, rel=1e-9)

    def test_degenerate_top(self):
        law = W.canonical_law(W.dary(3), 3.0)
        assert law.pi(3) == pytest.approx(1.0)
        assert law.sigma2 == pytest.approx(0.0, abs=1e-12)


class TestTiltAndShift:
    def test_tilt_preserves_offspring_law(self):
        base = W.canonical_law(W.uniform(), 1.0)
        tilted_spec = W.tilt(W.uniform(), 3.0, 0.5)
        tilted = W.canonical_law(tilted_spec, 1.0)
        for k in range(8):
            assert tilted.pi(k) == pytest.approx(base.pi(k), rel=1e-8)

    def test_tilt_moves_radius(self):
        t = W.tilt(W.uniform(), 1.0, 0.5)
        assert t.rho == 2.0
        assert W.tau_of(t, 1.0) == pytest.approx(1.0, rel=1e-9)

    def test_tilt_rational_composition(self):
        t = W.tilt(W.geometric(0.5), Fraction(2), Fraction(1, 2))
        assert t.weight_fraction(1) == Fraction(2) * Fraction(1, 2) * Fraction(1, 4)

    def test_shift_kills_offset(self):
        shifted, alpha = W.shift_support(W.loglaw())
        assert alpha == 1
        assert shifted.alpha_min == 0
        assert shifted.weight(0) == pytest.approx(1.0)

    def test_shift_identity_when_grounded(self):
        shifted, alpha = W.shift_support(W.uniform())
        assert alpha == 0
        assert shifted == W.uniform()


class TestClassify:
    def test_labels(self):
        assert W.classify(W.uniform())["label"] == "Ia"
        assert W.classify(W.powerlaw(4))["label"] == "II"
        assert W.classify(W.factorial())["label"] == "III"
        # the crossing exponent is only known to six decimals, so the
        # boundary-mean equality test needs a matching tolerance
        assert W.classify(W.powerlaw(2.478749), tol=1e-4)["label"] == "Ib"

    def test_refinement(self):
        assert W.classify(W.uniform())["refinement"] == "I_alpha"
        assert W.classify(W.powerlaw(2.478749), tol=1e-4)["refinement"] == "I_beta"


class TestWeightFiles:
    def test_round_trip(self, tmp_path):
        p = tmp_path / "w.txt"
        p.write_text(W.format_weight_file(W.geometric(0.5), kmax=40))
        spec = W.parse_weight_file(p)
        assert spec.rho == pytest.approx(2.0)
        for k in range(10):
            assert spec.weight(k) == pytest.approx(W.geometric(0.5).weight(k))

    def test_parse_with_comments_and_mode(self):
        text = "# test file\nrho = inf\nmode = alloc\n0 1\n2 3/4\n"
        spec, mode = W.parse_weight_text(text, with_mode=True)
        assert mode == "alloc"
        assert spec.rho == INF
        assert spec.weight_fraction(2) == Fraction(3, 4)
        assert spec.span == 2

    def test_missing_rho_is_none(self):
        spec = W.parse_weight_text("0 1\n1 1\n")
        assert spec.rho is None
        with pytest.raises(RhoRequired):
            W.nu(spec)
