"""Storage, phase modulation and far-field read-out of the memory.

A probe pulse writes its spectrum along the cloud (the gradient maps
frequency to longitudinal position), a phase mask stamps its pattern
onto the stored coherence, the gradient-unwinding step removes the
write-in phase, and the read-out beam's far field is the Fourier
transform of the coherence summed along the cloud.  Intensity versus
angle is what the camera sees.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import PhysicalConfig
from .errors import BandwidthExceededError, GridMismatchError
from .grid import CloudDensity, Grid2D, build_cloud
from .masks import PhaseMask

__all__ = [
    "GaussianSpectrum",
    "TwoPeakSpectrum",
    "UniformSpectrum",
    "Coherence",
    "AngularIntensity",
    "AngularSpectrum",
    "store_pulse",
    "modulate",
    "unwind",
    "modulate_and_unwind",
    "far_field",
    "frequency_scan",
    "scan_detunings",
]

# A Gaussian's amplitude at 4 sigma is e^-8; beyond that the stored
# signal is treated as absent for bandwidth checks.
_SUPPORT_SIGMAS = 4.0

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class GaussianSpectrum:
    """Gaussian spectral amplitude exp(-delta^2 / (2 sigma_omega^2))."""

    sigma_omega: float

    def __post_init__(self) -> None:
        if self.sigma_omega <= 0:
            raise ValueError("sigma_omega must be positive")

    def amplitude(self, delta: np.ndarray) -> np.ndarray:
        return np.exp(-0.5 * (delta / self.sigma_omega) ** 2)

    def support_halfwidth(self) -> float:
        return _SUPPORT_SIGMAS * self.sigma_omega

    def describe(self) -> dict:
        return {"kind": "gaussian", "sigma_omega": self.sigma_omega}


@dataclass(frozen=True)
class TwoPeakSpectrum:
    """Two equal Gaussian lines separated by ``separation``.

    ``coherent=False`` (the default) treats the lines as mutually
    incoherent: their far-field intensities add, as for two independent
    sources or for a beat whose phase drifts shot to shot.  With
    ``coherent=True`` the amplitudes add inside a single coherence.
    """

    sigma_omega: float
    separation: float
    coherent: bool = False

    def __post_init__(self) -> None:
        if self.sigma_omega <= 0:
            raise ValueError("sigma_omega must be positive")
        if self.separation < 0:
            raise ValueError("separation must be non-negative")

    def amplitude(self, delta: np.ndarray) -> np.ndarray:
        half = 0.5 * self.separation
        scale = -0.5 / self.sigma_omega**2
        return np.exp(scale * (delta - half) ** 2) + np.exp(scale * (delta + half) ** 2)

    def support_halfwidth(self) -> float:
        return 0.5 * self.separation + _SUPPORT_SIGMAS * self.sigma_omega

    def components(self) -> list[tuple[float, GaussianSpectrum]]:
        line = GaussianSpectrum(self.sigma_omega)
        return [(-0.5 * self.separation, line), (+0.5 * self.separation, line)]

    def describe(self) -> dict:
        return {
            "kind": "two_peak",
            "sigma_omega": self.sigma_omega,
            "separation": self.separation,
            "coherent": self.coherent,
        }


@dataclass(frozen=True)
class UniformSpectrum:
    """Flat spectral amplitude over the whole band (for diagnostics)."""

    def amplitude(self, delta: np.ndarray) -> np.ndarray:
        return np.ones_like(np.asarray(delta, dtype=float))

    def support_halfwidth(self) -> float:
        return math.inf

    def describe(self) -> dict:
        return {"kind": "uniform"}


@dataclass
class Coherence:
    """Complex stored coherence on the simulation grid.

    ``stage`` is one of ``stored``, ``modulated``, ``unwound``; the
    pipeline only ever advances it in that order.
    """

    grid: Grid2D
    values: np.ndarray
    stage: str
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (self.grid.nx, self.grid.nz):
            raise ValueError("coherence shape does not match its grid")


def store_pulse(
    cfg: PhysicalConfig,
    cloud: CloudDensity,
    detuning: float,
    spectrum=None,
    storage_time: float | None = None,
) -> Coherence:
    """Write a pulse of the given spectrum into the memory.

    The stored coherence is
    ``amplitude(x, z) * A(beta z - detuning) * exp(i beta z T)``
    with ``A`` the spectral amplitude and ``T`` the storage time.  The
    spectral envelope must overlap the band the grid represents,
    otherwise nothing is stored and :class:`BandwidthExceededError` is
    raised; partial overlap is allowed (the cloud edge clips it, exactly
    as falling optical depth does).
    """
    if spectrum is None:
        spectrum = GaussianSpectrum(cfg.pulse_sigma_omega)
    grid = cloud.grid
    beta = cfg.magnetic_gradient
    half_support = spectrum.support_halfwidth()
    lo = beta * grid.z[0]
    hi = beta * grid.z[-1]
    if detuning + half_support < lo or detuning - half_support > hi:
        raise BandwidthExceededError(
            f"pulse at detuning 2pi*{detuning / TWO_PI:.4g} Hz (support "
            f"+-2pi*{half_support / TWO_PI:.4g} Hz) has no overlap with the stored band "
            f"[2pi*{lo / TWO_PI:.4g}, 2pi*{hi / TWO_PI:.4g}] Hz "
            f"(memory bandwidth B = 2pi*{cfg.bandwidth / TWO_PI:.4g} Hz)"
        )

    storage = cfg.storage_time if storage_time is None else float(storage_time)
    envelope = spectrum.amplitude(beta * grid.z - detuning)
    winding = np.exp(1j * beta * grid.z * storage)
    values = cloud.amplitude() * (envelope * winding)[None, :]
    return Coherence(
        grid=grid,
        values=values,
        stage="stored",
        metadata={
            "detuning": float(detuning),
            "storage_time": storage,
            "envelope_center_z": float(detuning / beta),
            "spectrum": spectrum.describe(),
        },
    )


def modulate(coherence: Coherence, mask: PhaseMask) -> Coherence:
    """Apply the mask phase: rho -> rho * exp(i phi)."""
    if coherence.stage != "stored":
        raise ValueError(f"can only modulate a stored coherence, got stage {coherence.stage!r}")
    if not coherence.grid.same_as(mask.grid):
        raise GridMismatchError("coherence and mask live on different grids")
    metadata = dict(coherence.metadata)
    metadata["mask_provenance"] = mask.provenance
    return Coherence(
        grid=coherence.grid,
        values=coherence.values * np.exp(1j * mask.values),
        stage="modulated",
        metadata=metadata,
    )


def unwind(coherence: Coherence, cfg: PhysicalConfig) -> Coherence:
    """Remove the write-in gradient phase: rho -> rho * exp(-i beta z T).

    With T the storage time recorded at write-in, this exactly cancels
    the stored winding, so the longitudinal wavevector at the envelope
    center (and, in this model, everywhere) ends at zero.
    """
    if coherence.stage != "modulated":
        raise ValueError(f"can only unwind a modulated coherence, got stage {coherence.stage!r}")
    storage = coherence.metadata.get("storage_time", cfg.storage_time)
    phase = np.exp(-1j * cfg.magnetic_gradient * coherence.grid.z * storage)
    return Coherence(
        grid=coherence.grid,
        values=coherence.values * phase[None, :],
        stage="unwound",
        metadata=dict(coherence.metadata),
    )


def modulate_and_unwind(coherence: Coherence, mask: PhaseMask, cfg: PhysicalConfig) -> Coherence:
    """Mask modulation followed by gradient unwinding."""
    return unwind(modulate(coherence, mask), cfg)


@dataclass
class AngularIntensity:
    """Far-field intensity versus emission angle.

    ``total_intensity`` integrates the full uncropped angular axis, so
    energy bookkeeping survives cropping to the camera's field of view.
    """

    angles: np.ndarray
    values: np.ndarray
    angular_resolution: float
    total_intensity: float
    metadata: dict = field(default_factory=dict)


def far_field(
    coherence: Coherence,
    cfg: PhysicalConfig,
    pad_factor: int = 4,
    max_angle: float | None = 0.06,
) -> AngularIntensity:
    """Far-field intensity of the read-out beam.

    Sums the coherence along z (the phase-matched read-out collapses the
    longitudinal axis), Fourier transforms along x with ``pad_factor``
    zero padding, and maps transverse wavevector to angle via
    theta = k_x / k0.  The returned axis is symmetric about zero and
    cropped to ``+-max_angle`` (pass ``None`` for the full axis).
    """
    if pad_factor < 1:
        raise ValueError("pad_factor must be at least 1")
    grid = coherence.grid
    profile = coherence.values.sum(axis=1) * grid.dz
    n_pad = pad_factor * grid.nx
    transform = np.fft.fftshift(np.fft.fft(profile, n=n_pad)) * grid.dx
    intensity = np.abs(transform) ** 2
    k_axis = np.fft.fftshift(np.fft.fftfreq(n_pad, d=grid.dx)) * TWO_PI
    angles = k_axis / cfg.wavevector
    d_theta = angles[1] - angles[0]
    total = float(intensity.sum() * d_theta)

    # Drop the unpaired most-negative FFT bin so the axis is symmetric,
    # then crop to the requested field of view.
    keep = slice(1, None)
    angles = angles[keep]
    intensity = intensity[keep]
    if max_angle is not None:
        inside = np.abs(angles) <= max_angle
        angles = angles[inside]
        intensity = intensity[inside]

    return AngularIntensity(
        angles=angles,
        values=intensity,
        angular_resolution=float(d_theta),
        total_intensity=total,
        metadata=dict(coherence.metadata),
    )


@dataclass
class AngularSpectrum:
    """Far-field intensity for a set of input detunings.

    ``intensity[j]`` is the angular profile for ``detunings[j]`` (rad/s
    from the carrier); the common angle axis is in radians.
    """

    detunings: np.ndarray
    angles: np.ndarray
    intensity: np.ndarray
    angular_resolution: float
    provenance: str
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.detunings = np.asarray(self.detunings, dtype=float)
        self.angles = np.asarray(self.angles, dtype=float)
        self.intensity = np.asarray(self.intensity, dtype=float)
        if self.intensity.shape != (self.detunings.size, self.angles.size):
            raise ValueError("intensity must have shape (n_detunings, n_angles)")
        if np.any(self.intensity < 0):
            raise ValueError("intensity must be non-negative")

    @property
    def row_totals(self) -> np.ndarray:
        d_theta = self.angular_resolution
        return self.intensity.sum(axis=1) * d_theta


def scan_detunings(span: float, steps: int) -> np.ndarray:
    """Detunings of a frequency scan: ``steps`` bins centered on the
    carrier, one bin width apart, covering ``span`` (both rad/s)."""
    if steps < 1:
        raise ValueError("steps must be at least 1")
    if span < 0:
        raise ValueError("span must be non-negative")
    if steps == 1:
        return np.zeros(1)
    step = span / steps
    return (np.arange(steps) - (steps - 1) / 2.0) * step


def _single_row(cfg, cloud, mask, detuning, spectrum, storage_time, pad_factor, max_angle):
    stored = store_pulse(cfg, cloud, detuning, spectrum, storage_time)
    return far_field(modulate_and_unwind(stored, mask, cfg), cfg, pad_factor, max_angle)


def frequency_scan(
    cfg: PhysicalConfig,
    mask: PhaseMask,
    detunings: np.ndarray | None = None,
    spectrum=None,
    cloud: CloudDensity | None = None,
    storage_time: float | None = None,
    pad_factor: int = 4,
    max_angle: float | None = 0.06,
    span: float = TWO_PI * 1.6e6,
    steps: int = 40,
) -> AngularSpectrum:
    """Far-field read-out for a scan of input detunings.

    Each row runs the full store / modulate / unwind / far-field
    pipeline independently (rows may be computed in any order or in
    parallel; nothing couples them).  A two-peak spectrum with
    ``coherent=False`` is simulated one line at a time and the component
    intensities are added.
    """
    if detunings is None:
        detunings = scan_detunings(span, steps)
    detunings = np.atleast_1d(np.asarray(detunings, dtype=float))
    if detunings.size == 0:
        raise ValueError("detunings must not be empty")
    if cloud is None:
        cloud = build_cloud(cfg, mask.grid)
    if spectrum is None:
        spectrum = GaussianSpectrum(cfg.pulse_sigma_omega)

    rows = []
    axis = None
    resolution = None
    totals = []
    for delta in detunings:
        if isinstance(spectrum, TwoPeakSpectrum) and not spectrum.coherent:
            parts = [
                _single_row(cfg, cloud, mask, delta + offset, line, storage_time,
                            pad_factor, max_angle)
                for offset, line in spectrum.components()
            ]
            row = parts[0]
            values = sum(part.values for part in parts)
            total = sum(part.total_intensity for part in parts)
        else:
            row = _single_row(cfg, cloud, mask, delta, spectrum, storage_time,
                              pad_factor, max_angle)
            values = row.values
            total = row.total_intensity
        if axis is None:
            axis = row.angles
            resolution = row.angular_resolution
        rows.append(values)
        totals.append(total)

    return AngularSpectrum(
        detunings=detunings,
        angles=axis,
        intensity=np.vstack(rows),
        angular_resolution=resolution,
        provenance=mask.provenance,
        metadata={
            "spectrum": spectrum.describe(),
            "mask": dict(mask.metadata),
            "row_total_intensity": totals,
            "grid": {"nx": mask.grid.nx, "nz": mask.grid.nz,
                     "dx": mask.grid.dx, "dz": mask.grid.dz},
            "pad_factor": pad_factor,
        },
    )
