"""Single-photon camera model and Monte-Carlo frame sampling.

The camera is a 1-D strip of pixels along the dispersion axis.  Each
frame draws a Poisson number of signal photons whose angles follow the
supplied far-field intensity (treated as a piecewise-linear density),
plus Poisson background counts spread uniformly over the strip.

Quantum efficiency and filter transmission are assumed to be already
folded into ``mean_signal_per_frame``; nothing here applies them again.
The efficiency chain in :mod:`gemscope.formulas` is the single place
where those factors live.

Randomness uses one counter-based generator per frame, keyed by
``(seed, stream, frame index)``, so results are reproducible bit for bit
no matter how frames are scheduled or batched.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DegenerateDistributionError

__all__ = [
    "CameraModel",
    "FrameSet",
    "calibrate_pixels",
    "sample_frames",
    "histogram",
]


@dataclass(frozen=True)
class CameraModel:
    """Geometry and mean count rates of the photon-counting camera.

    Parameters
    ----------
    pixel_pitch_angle:
        Far-field angle subtended by one pixel, rad/px.
    n_pixels:
        Number of pixels along the dispersion axis.
    mean_signal_per_frame:
        Mean detected signal photons per frame, at the camera (all
        upstream efficiencies already applied).
    mean_noise_per_frame:
        Mean stray-light counts per frame, uniform over the strip.
    mean_dark_per_frame:
        Mean dark counts per frame, uniform over the strip.
    seed:
        64-bit base seed for the per-frame counter-based generators.
    """

    pixel_pitch_angle: float
    n_pixels: int = 400
    mean_signal_per_frame: float = 2.5
    mean_noise_per_frame: float = 0.1
    mean_dark_per_frame: float = 0.0007
    seed: int = 0

    def __post_init__(self) -> None:
        if self.pixel_pitch_angle <= 0:
            raise ValueError("pixel_pitch_angle must be positive")
        if self.n_pixels < 1:
            raise ValueError("n_pixels must be at least 1")
        for name in ("mean_signal_per_frame", "mean_noise_per_frame", "mean_dark_per_frame"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in 64 bits")

    def pixel_edges(self) -> np.ndarray:
        """Angular bin edges, length ``n_pixels + 1``, symmetric about 0."""
        n = self.n_pixels
        return (np.arange(n + 1) - n / 2.0) * self.pixel_pitch_angle

    def pixel_centers(self) -> np.ndarray:
        """Angular pixel centers, symmetric about 0."""
        n = self.n_pixels
        return (np.arange(n) - (n - 1) / 2.0) * self.pixel_pitch_angle

    def with_seed(self, seed: int) -> "CameraModel":
        return replace(self, seed=int(seed))


@dataclass
class FrameSet:
    """A stack of camera frames plus the metadata needed to interpret it.

    ``counts`` has shape ``(n_frames, n_pixels)``.  ``metadata`` records
    at least the camera geometry, rates, seed and stream; pipeline code
    adds the detuning and mask provenance of the run.
    """

    counts: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.counts.ndim != 2:
            raise ValueError("counts must be a (n_frames, n_pixels) array")
        if np.any(self.counts < 0):
            raise ValueError("counts must be non-negative")

    @property
    def n_frames(self) -> int:
        return self.counts.shape[0]

    @property
    def n_pixels(self) -> int:
        return self.counts.shape[1]

    def angles(self) -> np.ndarray:
        """Pixel-center angles reconstructed from the metadata."""
        pitch = float(self.metadata["pixel_pitch_angle"])
        n = self.n_pixels
        return (np.arange(n) - (n - 1) / 2.0) * pitch


def calibrate_pixels(
    grating_wavevector: float,
    measured_pixel_offset: float,
    wavevector: float,
) -> float:
    """Angle-per-pixel calibration from a reference grating.

    A pure grating of transverse wavevector ``grating_wavevector``
    deflects the beam by ``grating_wavevector / wavevector`` radians; if
    that spot lands ``measured_pixel_offset`` pixels from the zero-order
    position, one pixel subtends the returned angle.
    """
    if measured_pixel_offset == 0:
        raise ValueError("measured_pixel_offset must be non-zero")
    if wavevector <= 0:
        raise ValueError("wavevector must be positive")
    return (grating_wavevector / wavevector) / measured_pixel_offset


class _TrapezoidSampler:
    """Inverse-CDF sampler for a piecewise-linear density on given nodes."""

    def __init__(self, nodes: np.ndarray, values: np.ndarray):
        nodes = np.asarray(nodes, dtype=float)
        values = np.asarray(values, dtype=float)
        if nodes.ndim != 1 or nodes.shape != values.shape or nodes.size < 2:
            raise ValueError("nodes and values must be matching 1-D arrays, length >= 2")
        if np.any(np.diff(nodes) <= 0):
            raise ValueError("nodes must be strictly increasing")
        if np.any(values < -1e-12 * max(values.max(initial=0.0), 1.0)):
            raise ValueError("intensity must be non-negative")
        values = np.clip(values, 0.0, None)
        self.nodes = nodes
        self.values = values
        widths = np.diff(nodes)
        seg_area = 0.5 * (values[:-1] + values[1:]) * widths
        self.cum = np.concatenate([[0.0], np.cumsum(seg_area)])
        self.total = self.cum[-1]

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if n == 0:
            return np.empty(0)
        target = rng.random(n) * self.total
        seg = np.searchsorted(self.cum, target, side="right") - 1
        seg = np.clip(seg, 0, len(self.nodes) - 2)
        x0 = self.nodes[seg]
        w = self.nodes[seg + 1] - x0
        y0 = self.values[seg]
        y1 = self.values[seg + 1]
        r = target - self.cum[seg]
        slope = (y1 - y0) / w
        # Solve y0*t + slope*t^2/2 = r for t in [0, w]; fall back to the
        # linear branch where the segment is flat.
        with np.errstate(divide="ignore", invalid="ignore"):
            disc = np.sqrt(np.maximum(y0 * y0 + 2.0 * slope * r, 0.0))
            t_quad = (disc - y0) / slope
            t_lin = np.where(y0 > 0, r / np.where(y0 > 0, y0, 1.0), 0.5 * w)
        t = np.where(np.abs(slope) * w > 1e-14 * np.maximum(y0, y1), t_quad, t_lin)
        return x0 + np.clip(t, 0.0, w)


def _frame_rng(seed: int, stream: int, index: int) -> np.random.Generator:
    if not 0 <= stream < 2**31:
        raise ValueError("stream must fit in 31 bits")
    key = np.array([seed, (stream << 32) + index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def sample_frames(
    angles: np.ndarray,
    intensity: np.ndarray,
    camera: CameraModel,
    n_frames: int,
    stream: int = 0,
    extra_metadata: dict | None = None,
) -> FrameSet:
    """Draw ``n_frames`` Monte-Carlo camera frames from a far-field row.

    Signal photon angles are sampled from the piecewise-linear density
    defined by ``(angles, intensity)`` and binned onto the pixel strip;
    photons falling outside the strip are lost.  Background counts land
    uniformly.  ``stream`` separates independent rows sharing one seed.
    """
    if n_frames < 1:
        raise ValueError("n_frames must be at least 1")
    intensity = np.asarray(intensity, dtype=float)
    sampler = _TrapezoidSampler(np.asarray(angles, dtype=float), intensity)
    if sampler.total <= 0 and camera.mean_signal_per_frame > 0:
        raise DegenerateDistributionError(
            "cannot sample signal photons: total intensity is zero while "
            f"mean_signal_per_frame = {camera.mean_signal_per_frame}"
        )

    edges = camera.pixel_edges()
    background_rate = camera.mean_noise_per_frame + camera.mean_dark_per_frame
    counts = np.zeros((n_frames, camera.n_pixels), dtype=np.int64)
    for i in range(n_frames):
        rng = _frame_rng(camera.seed, stream, i)
        row = counts[i]
        if camera.mean_signal_per_frame > 0:
            n_sig = rng.poisson(camera.mean_signal_per_frame)
            if n_sig:
                theta = sampler.sample(rng, n_sig)
                idx = np.searchsorted(edges, theta, side="right") - 1
                idx = idx[(idx >= 0) & (idx < camera.n_pixels)]
                np.add.at(row, idx, 1)
        if background_rate > 0:
            n_bg = rng.poisson(background_rate)
            if n_bg:
                np.add.at(row, rng.integers(0, camera.n_pixels, n_bg), 1)

    metadata = {
        "pixel_pitch_angle": camera.pixel_pitch_angle,
        "n_pixels": camera.n_pixels,
        "mean_signal_per_frame": camera.mean_signal_per_frame,
        "mean_noise_per_frame": camera.mean_noise_per_frame,
        "mean_dark_per_frame": camera.mean_dark_per_frame,
        "seed": int(camera.seed),
        "stream": int(stream),
        "n_frames": int(n_frames),
    }
    if extra_metadata:
        metadata.update(extra_metadata)
    return FrameSet(counts=counts, metadata=metadata)


def histogram(frames: FrameSet) -> tuple[np.ndarray, int]:
    """Sum a frame stack into per-pixel counts; also return the total."""
    per_pixel = frames.counts.sum(axis=0)
    return per_pixel, int(per_pixel.sum())
