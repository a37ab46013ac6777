"""Closed-form scaling laws, discrepancy metrics, and their Monte Carlo twins."""

import math

import numpy as np
import pytest

from multiris.errors import (
    DegenerateDenominator,
    DimensionMismatch,
    EmptySample,
    EmptySequence,
    RangeExceeded,
)
from multiris.fading import FadingSpec, draw_los_link
from multiris.rng import RandomStream
from multiris.scaling import (
    GainMetrics,
    ScalingInputs,
    estimate_mean_sq_singular_values,
    expected_gain_physics_los,
    expected_gain_suboptimal_los,
    expected_gain_widely_los,
    gain_widely_los,
    mc_normalized_gain,
    mc_relative_difference,
    normalized_gain_los,
    relative_difference_los,
    structural_scattering_strength,
)


class TestClosedForms:
    def test_single_element_two_hop_value(self):
        val = expected_gain_physics_los(ScalingInputs(n_i=1, l=2, n_t=2, n_r=2))
        assert val == pytest.approx(56.92563222884743, rel=1e-12)

    def test_widely_used_value(self):
        val = expected_gain_widely_los(ScalingInputs(n_i=4, l=4, n_t=2, n_r=2))
        assert val == pytest.approx(262144.0, rel=1e-12)
        assert gain_widely_los is expected_gain_widely_los

    def test_suboptimal_value(self):
        val = expected_gain_suboptimal_los(ScalingInputs(n_i=4, l=2, n_t=2, n_r=2))
        assert val == pytest.approx(1600.0, rel=1e-12)

    def test_path_gain_scales_quadratically(self):
        base = ScalingInputs(n_i=8, l=3, n_t=2, n_r=4)
        scaled = ScalingInputs(n_i=8, l=3, n_t=2, n_r=4, path_gain=3.0)
        for fn in (expected_gain_physics_los, expected_gain_widely_los,
                   expected_gain_suboptimal_los):
            assert fn(scaled) == pytest.approx(9.0 * fn(base), rel=1e-12)

    def test_suboptimal_depth_doubling_identity(self):
        # squaring the two-hop value and stripping one gain/aperture factor
        # lands exactly on the four-hop value
        for n in (2, 8, 32):
            two = expected_gain_suboptimal_los(ScalingInputs(n_i=n, l=2, n_t=2, n_r=2,
                                                             path_gain=1.3))
            four = expected_gain_suboptimal_los(ScalingInputs(n_i=n, l=4, n_t=2, n_r=2,
                                                              path_gain=1.3))
            assert two ** 2 / (1.3 ** 2 * 2 * 2) == pytest.approx(four, rel=1e-12)

    def test_metric_factorizations(self):
        for n, l in ((4, 1), (16, 3), (64, 5)):
            inp = ScalingInputs(n_i=n, l=l, n_t=3, n_r=2)
            physics = expected_gain_physics_los(inp)
            widely = expected_gain_widely_los(inp)
            sub = expected_gain_suboptimal_los(inp)
            assert physics / widely == pytest.approx(1.0 + relative_difference_los(n, l),
                                                     rel=1e-12)
            assert sub / physics == pytest.approx(normalized_gain_los(n, l), rel=1e-12)

    def test_eta_anchor_values(self):
        assert relative_difference_los(16, 4) == pytest.approx(4.138708207123815, rel=1e-12)
        assert relative_difference_los(128, 4) == pytest.approx(0.8387526551504014, rel=1e-12)

    def test_rho_anchor_values(self):
        assert normalized_gain_los(16, 4) == pytest.approx(0.24800577692314102, rel=1e-12)
        assert normalized_gain_los(128, 4) == pytest.approx(0.5610423561438945, rel=1e-12)

    def test_depth_zero(self):
        assert relative_difference_los(64, 0) == 0.0
        assert normalized_gain_los(64, 0) == 1.0

    def test_eta_asymptote(self):
        # eta -> l sqrt(pi / n) for wide surfaces
        n, l = 10 ** 6, 2
        assert relative_difference_los(n, l) == pytest.approx(l * math.sqrt(math.pi / n),
                                                              rel=2e-3)

    def test_eta_crossover_in_element_count(self):
        # gains from structure dominate for small surfaces and fade for large ones
        assert relative_difference_los(16, 4) > 1.0
        assert relative_difference_los(128, 4) < 1.0

    def test_rho_increases_with_elements(self):
        values = [normalized_gain_los(n, 4) for n in (4, 16, 64, 256)]
        assert all(b > a for a, b in zip(values, values[1:]))

    def test_overflow_guard(self):
        with pytest.raises(RangeExceeded):
            expected_gain_physics_los(ScalingInputs(n_i=10 ** 9, l=40, n_t=1, n_r=1))
        with pytest.raises(RangeExceeded):
            relative_difference_los(10 ** 9, 40)


class TestInputValidation:
    def test_rejects_nonpositive_dims(self):
        with pytest.raises(DimensionMismatch):
            ScalingInputs(n_i=0, l=2, n_t=2, n_r=2)
        with pytest.raises(DimensionMismatch):
            ScalingInputs(n_i=4, l=2, n_t=2, n_r=-1)

    def test_rejects_bool_dims(self):
        with pytest.raises(DimensionMismatch):
            ScalingInputs(n_i=True, l=2, n_t=2, n_r=2)

    def test_rejects_bad_path_gain(self):
        with pytest.raises(DimensionMismatch):
            ScalingInputs(n_i=4, l=2, n_t=2, n_r=2, path_gain=-0.5)
        with pytest.raises(DimensionMismatch):
            ScalingInputs(n_i=4, l=2, n_t=2, n_r=2, path_gain=float("nan"))

    def test_gain_metrics_ranges(self):
        GainMetrics(eta=0.5, rho=0.9, s=0.1)
        with pytest.raises(DimensionMismatch):
            GainMetrics(eta=float("inf"), rho=0.9, s=0.1)
        with pytest.raises(DimensionMismatch):
            GainMetrics(eta=0.5, rho=0.0, s=0.1)
        with pytest.raises(DimensionMismatch):
            GainMetrics(eta=0.5, rho=1.5, s=0.1)
        with pytest.raises(DimensionMismatch):
            GainMetrics(eta=0.5, rho=0.9, s=0.0)


class TestMonteCarloMetrics:
    def test_eta_matches_closed_form_on_los_draws(self):
        n, l = 4, 2
        stream = RandomStream(101, ("mc-eta",))
        widely = expected_gain_widely_los(ScalingInputs(n_i=n, l=l, n_t=2, n_r=2))
        physics = []
        for t in range(400):
            sub = stream.child(t)
            links = [draw_los_link(n, 2, 1.0, sub.child(0)),
                     draw_los_link(n, n, 1.0, sub.child(1)),
                     draw_los_link(2, n, 1.0, sub.child(2))]
            g = 4.0
            for k in range(l):
                c = links[k + 1].b @ links[k].a
                g *= (abs(c) + n) ** 2
            physics.append(g)
        eta_hat = mc_relative_difference(physics, [widely] * 400)
        assert eta_hat == pytest.approx(3.563465477029342, rel=0.1)

    def test_rho_of_identical_samples_is_one(self):
        g = [1.0, 2.0, 3.0]
        assert mc_normalized_gain(g, g) == pytest.approx(1.0, rel=1e-12)

    def test_empty_samples_rejected(self):
        with pytest.raises(EmptySample):
            mc_relative_difference([], [])
        with pytest.raises(EmptySample):
            mc_normalized_gain([], [1.0])

    def test_unpaired_samples_rejected(self):
        with pytest.raises(DimensionMismatch):
            mc_relative_difference([1.0, 2.0], [1.0])

    def test_degenerate_denominator(self):
        with pytest.raises(DegenerateDenominator):
            mc_relative_difference([1.0], [0.0])
        with pytest.raises(DegenerateDenominator):
            mc_normalized_gain([1.0], [0.0])


class TestScatteringStrength:
    def test_rank_one_spectrum(self):
        lam = np.zeros(8)
        lam[0] = 2.5
        assert structural_scattering_strength(lam) == pytest.approx(1.0 / 64.0, rel=1e-12)

    def test_flat_spectrum(self):
        assert structural_scattering_strength(np.ones(8)) == pytest.approx(1.0 / 8.0, rel=1e-12)

    def test_rejects_empty_and_unsorted(self):
        with pytest.raises(EmptySequence):
            structural_scattering_strength([])
        with pytest.raises(DimensionMismatch):
            structural_scattering_strength([1.0, 2.0])
        with pytest.raises(DegenerateDenominator):
            structural_scattering_strength([0.0, 0.0])

    def test_los_estimate_is_rank_one(self):
        lam = estimate_mean_sq_singular_values(4, 4, FadingSpec("los"),
                                               RandomStream(31, ("s-los",)), draws=50)
        s = structural_scattering_strength(lam)
        assert s == pytest.approx(1.0 / 16.0, rel=1e-9)

    def test_rayleigh_sits_between_extremes(self):
        lam = estimate_mean_sq_singular_values(4, 4, FadingSpec("rayleigh"),
                                               RandomStream(37, ("s-ray",)), draws=400)
        s = structural_scattering_strength(lam)
        assert 1.0 / 16.0 < s < 1.0 / 4.0

    def test_nonincreasing_in_rician_k(self):
        values = []
        for k in (0.0, 1.0, 10.0, 1e6):
            lam = estimate_mean_sq_singular_values(
                4, 4, FadingSpec("rician", rician_k=k),
                RandomStream(41, ("s-rice",)), draws=400)
            values.append(structural_scattering_strength(lam))
        assert all(b <= a + 1e-12 for a, b in zip(values, values[1:]))
        assert values[-1] == pytest.approx(1.0 / 16.0, rel=1e-3)
