"""Closed-form anchors: frequency map, angle slope, efficiencies, limits.

Expected numbers were fixed ahead of time from independent evaluations
of the defining expressions (hand calculation or mpmath), not from
running this package.
"""

import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gemscope import (
    absorption_efficiency,
    angle_slope,
    efficiency_chain,
    emission_angle,
    gem_frequency_to_position,
    position_to_frequency,
    resolution_limits,
    transverse_wavevector,
)
from gemscope.errors import BandwidthExceededError
from gemscope.formulas import RAYLEIGH_FACTOR

TWO_PI = 2.0 * math.pi


def mrad_per_mhz(slope_si: float) -> float:
    return slope_si * TWO_PI * 1e6 * 1e3


class TestFrequencyMap:
    def test_carrier_maps_to_center(self, cfg):
        assert gem_frequency_to_position(cfg.carrier_frequency, cfg) == 0.0

    def test_band_edge(self, cfg):
        z = gem_frequency_to_position(cfg.carrier_frequency + cfg.half_bandwidth, cfg)
        assert z == pytest.approx(cfg.cloud_length / 2)

    @given(st.floats(min_value=-0.5, max_value=0.5))
    def test_round_trip(self, frac):
        from gemscope import paper_defaults

        cfg = paper_defaults()
        omega = cfg.carrier_frequency + frac * cfg.bandwidth
        z = gem_frequency_to_position(omega, cfg)
        assert position_to_frequency(z, cfg) == pytest.approx(omega, rel=1e-12)

    def test_out_of_band_frequency(self, cfg):
        with pytest.raises(BandwidthExceededError):
            gem_frequency_to_position(cfg.carrier_frequency + 0.51 * cfg.bandwidth, cfg)

    def test_out_of_band_position(self, cfg):
        with pytest.raises(BandwidthExceededError):
            position_to_frequency(0.51 * cfg.cloud_length, cfg)


class TestAngleSlope:
    def test_default_value(self, cfg):
        # kappa / (L beta k0) with kappa = 2pi*20/mm
        assert mrad_per_mhz(angle_slope(cfg)) == pytest.approx(13.086420, abs=1e-5)

    def test_retuned_value(self, cfg):
        tuned = cfg.replace(prism_wavevector=TWO_PI * 20.4e3)
        assert mrad_per_mhz(angle_slope(tuned)) == pytest.approx(13.348148, abs=1e-5)

    def test_linear_in_kappa(self, cfg):
        doubled = cfg.replace(prism_wavevector=2 * cfg.prism_wavevector)
        assert angle_slope(doubled) == pytest.approx(2 * angle_slope(cfg), rel=1e-12)

    def test_emission_angle_consistent(self, cfg):
        # adding ~1e6 rad/s to a ~1e15 rad/s carrier and subtracting it
        # again costs ~7 digits, hence the loose tolerance
        delta = TWO_PI * 200e3
        theta = emission_angle(cfg.carrier_frequency + delta, cfg)
        assert theta == pytest.approx(angle_slope(cfg) * delta, rel=1e-6)
        kx = transverse_wavevector(cfg.carrier_frequency + delta, cfg)
        assert theta == pytest.approx(kx / cfg.wavevector, rel=1e-12)

    def test_angle_at_band_edge(self, cfg):
        # half the band deflects by ~7.95 mrad, inside the camera strip
        theta = emission_angle(cfg.carrier_frequency + cfg.half_bandwidth, cfg)
        assert theta == pytest.approx(13.086420e-3 * 1.215 / 2, rel=1e-5)


class TestEfficiency:
    def test_absorption_formula(self, cfg):
        # 1 - exp(-2pi OD Gamma / B), OD=60, Gamma=9.1 kHz, B=1.215 MHz
        assert absorption_efficiency(cfg) == pytest.approx(0.9406056, abs=1e-6)

    def test_chain_uses_override_and_warns(self, cfg):
        with pytest.warns(UserWarning, match="override"):
            eff = efficiency_chain(cfg)
        assert eff.eta_absorption == pytest.approx(0.365)
        assert eff.eta_absorption_formula == pytest.approx(0.9406056, abs=1e-6)

    def test_chain_without_override(self, cfg):
        bare = cfg.replace(absorption_override=None)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            eff = efficiency_chain(bare)
        assert eff.eta_absorption == pytest.approx(0.9406056, abs=1e-6)

    def test_memory_and_total(self, cfg):
        with pytest.warns(UserWarning):
            eff = efficiency_chain(cfg)
        # 0.365^2 * 0.6 * 0.75 and then * 0.2 * 0.6
        assert eff.eta_memory == pytest.approx(0.05995125, rel=1e-9)
        assert eff.eta_total == pytest.approx(0.00719415, rel=1e-9)

    def test_stage_order_and_product(self, cfg):
        with pytest.warns(UserWarning):
            eff = efficiency_chain(cfg)
        names = [name for name, _ in eff.stages]
        assert names == [
            "absorption_in",
            "absorption_out",
            "thermal",
            "readout_coupling",
            "camera_qe",
            "filter",
        ]
        product = np.prod([f for _, f in eff.stages])
        assert eff.eta_total == pytest.approx(product, rel=1e-12)

    def test_cumulative_monotone(self, cfg):
        with pytest.warns(UserWarning):
            eff = efficiency_chain(cfg)
        running = [v for _, v in eff.cumulative()]
        assert all(b <= a + 1e-15 for a, b in zip(running, running[1:]))
        assert running[-1] == pytest.approx(eff.eta_total, rel=1e-12)


class TestResolutionLimits:
    def test_beam_divergence(self, cfg):
        lim = resolution_limits(cfg)
        # lambda / (pi R) = 795nm / (pi * 208um)
        assert lim.beam_divergence == pytest.approx(1.2166171e-3, abs=1e-9)

    def test_frequency_waist(self, cfg):
        lim = resolution_limits(cfg)
        assert lim.beam_divergence_omega / TWO_PI == pytest.approx(92967.91, rel=1e-6)

    def test_min_resolvable(self, cfg):
        lim = resolution_limits(cfg)
        assert RAYLEIGH_FACTOR == 1.33
        assert lim.min_resolvable_omega / TWO_PI == pytest.approx(123647.3, rel=1e-6)

    def test_resolving_power(self, cfg):
        lim = resolution_limits(cfg)
        assert lim.resolving_power == pytest.approx(3.0490e9, rel=1e-4)

    def test_mask_wavevector_limit(self, cfg):
        lim = resolution_limits(cfg)
        # 2pi sqrt(pi / (lambda R))
        assert lim.mask_wavevector_limit / TWO_PI == pytest.approx(137.835e3, rel=1e-4)

    def test_divergence_scaling(self, cfg):
        # doubling the radius halves the angular waist
        wide = cfg.replace(cloud_radius=2 * cfg.cloud_radius)
        assert resolution_limits(wide).beam_divergence == pytest.approx(
            resolution_limits(cfg).beam_divergence / 2, rel=1e-12
        )

    def test_waist_consistency(self, cfg):
        lim = resolution_limits(cfg)
        assert lim.beam_divergence_omega == pytest.approx(
            lim.beam_divergence / angle_slope(cfg), rel=1e-12
        )
        assert lim.min_resolvable_omega == pytest.approx(
            RAYLEIGH_FACTOR * lim.beam_divergence_omega, rel=1e-12
        )
