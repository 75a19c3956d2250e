"""Closed-form relations of the spectrum-to-position converter.

These are the scalar anchors the numerical pipeline is tested against:
the linear frequency/position map set by the magnetic gradient, the
mask-induced emission angle, absorption and end-to-end efficiencies,
and the diffraction-limited resolution figures.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .config import PhysicalConfig
from .errors import BandwidthExceededError

__all__ = [
    "RAYLEIGH_FACTOR",
    "gem_frequency_to_position",
    "position_to_frequency",
    "transverse_wavevector",
    "emission_angle",
    "angle_slope",
    "absorption_efficiency",
    "EfficiencyBreakdown",
    "efficiency_chain",
    "ResolutionLimits",
    "resolution_limits",
]

# Separation-to-width ratio of the generalized Rayleigh criterion for
# two Gaussian lines: centers 1.33 waists apart are marginally resolved.
RAYLEIGH_FACTOR = 1.33


def _check_in_band(detuning: float, cfg: PhysicalConfig, what: str) -> None:
    half = cfg.half_bandwidth
    if abs(detuning) > half:
        raise BandwidthExceededError(
            f"{what} lies 2pi*{abs(detuning) / (2 * math.pi):.4g} Hz from the carrier, "
            f"outside the memory half-bandwidth of 2pi*{half / (2 * math.pi):.4g} Hz "
            f"(B = gradient * length = 2pi*{cfg.bandwidth / (2 * math.pi):.4g} Hz)"
        )


def gem_frequency_to_position(omega: float, cfg: PhysicalConfig) -> float:
    """Longitudinal position z where angular frequency ``omega`` is stored.

    The gradient maps omega = omega_0 + beta * z, so
    z = (omega - omega_0) / beta.  Frequencies outside the memory band
    |omega - omega_0| <= B/2 raise :class:`BandwidthExceededError`.
    """
    detuning = omega - cfg.carrier_frequency
    _check_in_band(detuning, cfg, "requested frequency")
    return detuning / cfg.magnetic_gradient


def position_to_frequency(z: float, cfg: PhysicalConfig) -> float:
    """Inverse of :func:`gem_frequency_to_position`."""
    detuning = cfg.magnetic_gradient * z
    _check_in_band(detuning, cfg, "requested position")
    return cfg.carrier_frequency + detuning


def transverse_wavevector(omega: float, cfg: PhysicalConfig) -> float:
    """Transverse kick k_x the prism mask gives light stored at ``omega``.

    The mask phase kappa*x*z/L has local transverse wavevector
    kappa*z/L, and z encodes the detuning, so
    k_x = (omega - omega_0) * kappa / (beta * L).
    """
    detuning = omega - cfg.carrier_frequency
    _check_in_band(detuning, cfg, "requested frequency")
    return detuning * cfg.prism_wavevector / cfg.bandwidth


def emission_angle(omega: float, cfg: PhysicalConfig) -> float:
    """Far-field emission angle for light stored at ``omega``, rad.

    theta = k_x / k0 = kappa * (omega - omega_0) / (L * beta * k0),
    linear in detuning.
    """
    return transverse_wavevector(omega, cfg) / cfg.wavevector


def angle_slope(cfg: PhysicalConfig) -> float:
    """d(theta)/d(omega) of the converter, rad per (rad/s)."""
    return cfg.prism_wavevector / (cfg.bandwidth * cfg.wavevector)


def absorption_efficiency(cfg: PhysicalConfig) -> float:
    """Single-pass absorption efficiency from the optical-depth formula.

    eta = 1 - exp(-2*pi * OD * Gamma / B) with the decoherence rate
    Gamma and the bandwidth B compared in the same (ordinary-frequency)
    units.  Returns the formula value; any measured override is applied
    only by :func:`efficiency_chain`.
    """
    bandwidth_hz = cfg.bandwidth / (2.0 * math.pi)
    exponent = 2.0 * math.pi * cfg.optical_depth * cfg.coupling_decoherence_hz / bandwidth_hz
    return 1.0 - math.exp(-exponent)


@dataclass(frozen=True)
class EfficiencyBreakdown:
    """Per-stage intensity efficiencies of the full detection chain.

    ``stages`` lists ``(name, factor)`` pairs in physical order;
    ``eta_total`` is their product and ``eta_memory`` the product of the
    memory-only stages (absorption in and out, thermal decay, read-out
    coupling).
    """

    eta_absorption: float
    eta_memory: float
    eta_total: float
    stages: tuple[tuple[str, float], ...]
    eta_absorption_formula: float

    def cumulative(self) -> list[tuple[str, float]]:
        """Running product along the chain (monotone non-increasing)."""
        out = []
        acc = 1.0
        for name, factor in self.stages:
            acc *= factor
            out.append((name, acc))
        return out


def efficiency_chain(cfg: PhysicalConfig) -> EfficiencyBreakdown:
    """Combine all stage efficiencies into memory and total figures.

    Uses the measured absorption override when the config provides one,
    warning if it disagrees with the optical-depth formula; the camera
    QE and filter are applied exactly once, here.
    """
    formula = absorption_efficiency(cfg)
    eta = formula
    if cfg.absorption_override is not None:
        if abs(cfg.absorption_override - formula) > 1e-3:
            warnings.warn(
                f"absorption efficiency override {cfg.absorption_override:.4g} differs "
                f"from the optical-depth formula value {formula:.4g}; using the override",
                stacklevel=2,
            )
        eta = cfg.absorption_override

    stages = (
        ("absorption_in", eta),
        ("absorption_out", eta),
        ("thermal", cfg.thermal_efficiency),
        ("readout_coupling", cfg.coupling_efficiency),
        ("camera_qe", cfg.camera_qe),
        ("filter", cfg.filter_transmission),
    )
    eta_memory = eta * eta * cfg.thermal_efficiency * cfg.coupling_efficiency
    eta_total = eta_memory * cfg.camera_qe * cfg.filter_transmission
    return EfficiencyBreakdown(
        eta_absorption=eta,
        eta_memory=eta_memory,
        eta_total=eta_total,
        stages=stages,
        eta_absorption_formula=formula,
    )


@dataclass(frozen=True)
class ResolutionLimits:
    """Diffraction-limited resolution figures of the converter.

    ``beam_divergence`` is the far-field waist w_theta = lambda/(pi R)
    of the emitted beam (1/e^2 intensity half-angle), and
    ``beam_divergence_omega`` its image 2*L*beta/(kappa*R) on the
    frequency axis.  ``min_resolvable_omega`` applies the Rayleigh
    factor; ``resolving_power`` divides the carrier by it.
    ``mask_wavevector_limit`` is the largest transverse wavevector a
    mask of feature size matched to the beam can usefully apply,
    2*pi*sqrt(pi/(lambda R)).
    """

    beam_divergence: float
    beam_divergence_omega: float
    min_resolvable_omega: float
    resolving_power: float
    mask_wavevector_limit: float


def resolution_limits(cfg: PhysicalConfig) -> ResolutionLimits:
    """Evaluate the closed-form resolution limits for ``cfg``."""
    w_theta = cfg.wavelength / (math.pi * cfg.cloud_radius)
    w_omega = w_theta / angle_slope(cfg)
    delta_omega = RAYLEIGH_FACTOR * w_omega
    return ResolutionLimits(
        beam_divergence=w_theta,
        beam_divergence_omega=w_omega,
        min_resolvable_omega=delta_omega,
        resolving_power=cfg.carrier_frequency / delta_omega,
        mask_wavevector_limit=2.0
        * math.pi
        * math.sqrt(math.pi / (cfg.wavelength * cfg.cloud_radius)),
    )
