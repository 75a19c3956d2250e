"""Experiment configuration: all physical constants with explicit units.

Internally everything is SI with frequencies as angular frequencies in
rad/s.  The one deliberate exception is ``coupling_decoherence_hz``: the
coupling-induced decoherence rate is conventionally quoted as an
ordinary frequency, so it is stored in Hz and the 2*pi appears
explicitly in the absorption formula that consumes it.

Configuration files are JSON with unit-suffixed strings (see
:mod:`gemscope.units`); ``paper_defaults`` ships a bundled profile with
the reference cold-atom parameter set.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path

from .detector import CameraModel
from .errors import ConfigError, UnitParseError
from .units import dimensionless, parse_quantity, require

__all__ = ["PhysicalConfig", "load_config", "paper_defaults"]

_SIGMA_CONSISTENCY_TOL = 1e-9


@dataclass(frozen=True)
class PhysicalConfig:
    """Physical constants of the converter, all in SI units.

    Attributes
    ----------
    magnetic_gradient:
        Frequency-to-position gradient beta, rad/s per m.
    prism_wavevector:
        Phase-mask wavevector scale kappa, rad/m.
    cloud_length, cloud_radius:
        Longitudinal 1/e^2 half-length L and transverse 1/e^2 radius R
        of the atomic density, m.
    wavelength:
        Optical wavelength, m.
    carrier_frequency:
        Carrier angular frequency omega_0 at the cloud center, rad/s.
    optical_depth:
        Resonant optical depth, dimensionless.
    coupling_decoherence_hz:
        Coupling-induced decoherence rate Gamma as an ordinary
        frequency, Hz.
    storage_time:
        Hold time between write-in and read-out, s.  The write-in phase
        acquired during this time is exactly removed by the unwinding
        step, so far-field results do not depend on it.
    lifetime:
        Thermal-motion memory lifetime, s (context for the thermal
        efficiency; not used in any formula here).
    pulse_sigma_t:
        Temporal 1-sigma width of the Gaussian probe pulse, s.
    thermal_efficiency, coupling_efficiency, camera_qe,
    filter_transmission:
        Per-stage intensity efficiencies, each in [0, 1].
    absorption_override:
        Measured two-pass absorption amplitude efficiency.  When set it
        replaces the optical-depth formula value in the efficiency
        chain (a warning reports the discrepancy).
    slm_wavevector_limit:
        Largest grating wavevector the mask display renders with the
        first diffraction order still dominant, rad/m.
    slm_pixels_per_m:
        Mask display resolution projected onto the cloud, px/m.
    super_gaussian_order:
        Default order of the longitudinal density profile.
    camera:
        Camera geometry and count rates.
    """

    magnetic_gradient: float
    prism_wavevector: float
    cloud_length: float
    cloud_radius: float
    wavelength: float
    carrier_frequency: float
    optical_depth: float
    coupling_decoherence_hz: float
    storage_time: float
    lifetime: float
    pulse_sigma_t: float
    thermal_efficiency: float
    coupling_efficiency: float
    camera_qe: float
    filter_transmission: float
    camera: CameraModel
    absorption_override: float | None = None
    slm_wavevector_limit: float = 2.0 * math.pi * 12e3
    slm_pixels_per_m: float = 104e3
    super_gaussian_order: int = 4

    def __post_init__(self) -> None:
        positive = (
            "magnetic_gradient",
            "prism_wavevector",
            "cloud_length",
            "cloud_radius",
            "wavelength",
            "carrier_frequency",
            "optical_depth",
            "coupling_decoherence_hz",
            "lifetime",
            "pulse_sigma_t",
            "slm_wavevector_limit",
            "slm_pixels_per_m",
        )
        for name in positive:
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.storage_time < 0:
            raise ConfigError("storage_time must be non-negative")
        for name in (
            "thermal_efficiency",
            "coupling_efficiency",
            "camera_qe",
            "filter_transmission",
        ):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {value}")
        if self.absorption_override is not None and not 0.0 <= self.absorption_override <= 1.0:
            raise ConfigError("absorption_override must lie in [0, 1]")
        if int(self.super_gaussian_order) < 1:
            raise ConfigError("super_gaussian_order must be a positive integer")

    # Derived quantities -------------------------------------------------

    @property
    def wavevector(self) -> float:
        """Optical wavevector k0 = 2*pi / wavelength, rad/m."""
        return 2.0 * math.pi / self.wavelength

    @property
    def bandwidth(self) -> float:
        """Memory bandwidth B = gradient * cloud length, rad/s."""
        return self.magnetic_gradient * self.cloud_length

    @property
    def half_bandwidth(self) -> float:
        return 0.5 * self.bandwidth

    @property
    def pulse_sigma_omega(self) -> float:
        """Spectral 1-sigma width of the probe pulse, rad/s (= 1/sigma_t)."""
        return 1.0 / self.pulse_sigma_t

    def replace(self, **changes) -> "PhysicalConfig":
        return replace(self, **changes)


def _camera_from_mapping(raw: dict) -> CameraModel:
    pitch_raw = raw.get("pixel_pitch_angle")
    if pitch_raw is None:
        raise ConfigError("camera block needs 'pixel_pitch_angle'")
    qty = parse_quantity(pitch_raw, "camera.pixel_pitch_angle")
    if qty.dimension not in ("1", "1/PX") or not qty.angular:
        raise UnitParseError(
            "camera.pixel_pitch_angle must be an angle per pixel, e.g. '0.27 mrad'"
        )
    known = {
        "n_pixels": int(raw.get("n_pixels", 400)),
        "mean_signal_per_frame": dimensionless(
            raw.get("mean_signal_per_frame", 2.5), "camera.mean_signal_per_frame"
        ),
        "mean_noise_per_frame": dimensionless(
            raw.get("mean_noise_per_frame", 0.1), "camera.mean_noise_per_frame"
        ),
        "mean_dark_per_frame": dimensionless(
            raw.get("mean_dark_per_frame", 0.0007), "camera.mean_dark_per_frame"
        ),
    }
    extra = set(raw) - set(known) - {"pixel_pitch_angle", "seed"}
    if extra:
        raise ConfigError(f"unknown camera fields: {sorted(extra)}")
    return CameraModel(pixel_pitch_angle=qty.value, seed=int(raw.get("seed", 0)), **known)


_REQUIRED_FIELDS = (
    "magnetic_gradient",
    "prism_wavevector",
    "cloud_length",
    "cloud_radius",
    "wavelength",
    "carrier_frequency",
    "optical_depth",
    "coupling_decoherence",
    "storage_time",
    "lifetime",
    "pulse_sigma_t",
    "thermal_efficiency",
    "coupling_efficiency",
    "camera_qe",
    "filter_transmission",
)


def _config_from_mapping(raw: dict) -> PhysicalConfig:
    missing = [name for name in _REQUIRED_FIELDS if name not in raw]
    if missing:
        raise ConfigError(f"missing required config fields: {missing}")

    def req(field: str, dimension: str, angular: bool | None) -> float:
        return require(raw[field], field, dimension, angular)

    sigma_t = req("pulse_sigma_t", "T", None)
    if "pulse_sigma_omega" in raw:
        sigma_omega = require(raw["pulse_sigma_omega"], "pulse_sigma_omega", "1/T", True)
        if abs(sigma_omega * sigma_t - 1.0) > _SIGMA_CONSISTENCY_TOL:
            raise ConfigError(
                "pulse_sigma_omega and pulse_sigma_t are inconsistent: a Gaussian "
                f"pulse requires sigma_omega * sigma_t = 1, got {sigma_omega * sigma_t!r}"
            )

    known_fields = {
        "magnetic_gradient",
        "prism_wavevector",
        "cloud_length",
        "cloud_radius",
        "wavelength",
        "carrier_frequency",
        "optical_depth",
        "coupling_decoherence",
        "storage_time",
        "lifetime",
        "pulse_sigma_t",
        "pulse_sigma_omega",
        "thermal_efficiency",
        "coupling_efficiency",
        "camera_qe",
        "filter_transmission",
        "absorption_override",
        "slm_wavevector_limit",
        "slm_pixels_per_m",
        "super_gaussian_order",
        "camera",
    }
    unknown = set(raw) - known_fields
    if unknown:
        raise ConfigError(f"unknown config fields: {sorted(unknown)}")

    override = raw.get("absorption_override")
    return PhysicalConfig(
        magnetic_gradient=req("magnetic_gradient", "1/L*T", True),
        prism_wavevector=req("prism_wavevector", "1/L", True),
        cloud_length=req("cloud_length", "L", None),
        cloud_radius=req("cloud_radius", "L", None),
        wavelength=req("wavelength", "L", None),
        carrier_frequency=req("carrier_frequency", "1/T", True),
        optical_depth=dimensionless(raw["optical_depth"], "optical_depth"),
        coupling_decoherence_hz=req("coupling_decoherence", "1/T", False),
        storage_time=req("storage_time", "T", None),
        lifetime=req("lifetime", "T", None),
        pulse_sigma_t=sigma_t,
        thermal_efficiency=dimensionless(raw["thermal_efficiency"], "thermal_efficiency"),
        coupling_efficiency=dimensionless(raw["coupling_efficiency"], "coupling_efficiency"),
        camera_qe=dimensionless(raw["camera_qe"], "camera_qe"),
        filter_transmission=dimensionless(raw["filter_transmission"], "filter_transmission"),
        absorption_override=None if override is None else dimensionless(override, "absorption_override"),
        slm_wavevector_limit=require(
            raw.get("slm_wavevector_limit", "2pi*12 1/mm"), "slm_wavevector_limit", "1/L", True
        ),
        slm_pixels_per_m=require(
            raw.get("slm_pixels_per_m", "104 1/mm"), "slm_pixels_per_m", "1/L", False
        ),
        super_gaussian_order=int(raw.get("super_gaussian_order", 4)),
        camera=_camera_from_mapping(raw.get("camera", {"pixel_pitch_angle": "0.27 mrad"})),
    )


def load_config(source: str | Path | dict) -> PhysicalConfig:
    """Build a :class:`PhysicalConfig` from a JSON file path or a mapping."""
    if isinstance(source, dict):
        return _config_from_mapping(source)
    path = Path(source)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"config file {path} must contain a JSON object")
    return _config_from_mapping(raw)


def paper_defaults() -> PhysicalConfig:
    """The bundled reference parameter set (warm-start profile)."""
    text = resources.files("gemscope").joinpath("data/paper_defaults.json").read_text()
    return _config_from_mapping(json.loads(text))
