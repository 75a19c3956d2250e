"""Programmable phase masks: ideal prism, display imperfections, patterns.

The converter's dispersive element is the ac-Stark phase
phi(x, z) = kappa * x * z / L written onto the atoms, a prism whose
local transverse wavevector kappa * z / L grows linearly along the
cloud.  A real mask display renders phi modulo 2*pi as an intensity
sawtooth that the projection optics blur; re-reading the blurred
sawtooth as phase produces the parasitic diffraction orders seen on
camera.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import ndimage

from .config import PhysicalConfig
from .errors import ConfigError
from .grid import Grid2D

__all__ = [
    "PhaseMask",
    "DEFAULT_BLUR_SIGMA",
    "ideal_prism_mask",
    "wrap_and_blur_mask",
    "gradient_calibration_mask",
    "mask_from_image",
]

# Projection blur (1-sigma, meters in the cloud plane), calibrated so a
# blurred phase sawtooth's first diffraction order equals its zeroth
# order exactly at the display's rated wavevector limit of 2pi*12/mm
# (the crossover of a blurred unit sawtooth sits at k*sigma = 0.8887).
DEFAULT_BLUR_SIGMA = 0.8887 / (2.0 * math.pi * 12e3)

TWO_PI = 2.0 * math.pi


@dataclass
class PhaseMask:
    """Phase pattern phi(x, z) in radians on a simulation grid.

    ``provenance`` tracks how the pattern was produced: ``ideal``,
    ``wrapped``, ``wrapped+blurred``, ``blurred``, ``sign-flipped`` or
    ``external-image``.
    """

    grid: Grid2D
    values: np.ndarray
    provenance: str
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.nx, self.grid.nz):
            raise ValueError(
                f"mask shape {self.values.shape} does not match grid "
                f"({self.grid.nx}, {self.grid.nz})"
            )


def _warn_if_beyond_display(kappa: float, cfg: PhysicalConfig, mask: PhaseMask) -> None:
    # The steepest fringes the prism needs sit at the cloud ends where
    # the local wavevector is kappa/2; compare that against the display
    # limit.  Exceeding it is physical (the mask still renders) but the
    # parasitic orders will dominate, hence a warning, not an error.
    local_max = 0.5 * abs(kappa)
    if local_max > cfg.slm_wavevector_limit:
        message = (
            f"prism wavevector 2pi*{kappa / TWO_PI:.4g}/m needs local fringes up to "
            f"2pi*{local_max / TWO_PI:.4g}/m at the cloud ends, beyond the display "
            f"limit of 2pi*{cfg.slm_wavevector_limit / TWO_PI:.4g}/m"
        )
        mask.metadata["display_limit_warning"] = message
        warnings.warn(message, stacklevel=3)


def ideal_prism_mask(
    cfg: PhysicalConfig,
    grid: Grid2D | None = None,
    kappa: float | None = None,
) -> PhaseMask:
    """Unwrapped prism phase kappa * x * z / L."""
    if grid is None:
        grid = Grid2D.for_cloud(cfg)
    k = cfg.prism_wavevector if kappa is None else float(kappa)
    values = np.outer(grid.x, grid.z) * (k / cfg.cloud_length)
    mask = PhaseMask(grid=grid, values=values, provenance="ideal", metadata={"kappa": k})
    _warn_if_beyond_display(k, cfg, mask)
    return mask


def wrap_and_blur_mask(
    mask: PhaseMask,
    blur_sigma: float = DEFAULT_BLUR_SIGMA,
    wrap: bool = True,
) -> PhaseMask:
    """Render ``mask`` the way a real display would.

    Wrapping folds the phase into [0, 2*pi) -- the displayed intensity
    sawtooth.  A Gaussian blur of ``blur_sigma`` meters (in the cloud
    plane) then smears that sawtooth, exactly as the projection optics
    smear the displayed intensity, and the result is re-interpreted as
    phase.  ``blur_sigma = 0`` with ``wrap=False`` returns the input
    unchanged.
    """
    if blur_sigma < 0:
        raise ValueError("blur_sigma must be non-negative")
    if blur_sigma == 0 and not wrap:
        return mask

    values = mask.values
    if wrap:
        values = np.mod(values, TWO_PI)
    if blur_sigma > 0:
        sigma_cells = (blur_sigma / mask.grid.dx, blur_sigma / mask.grid.dz)
        values = ndimage.gaussian_filter(values, sigma=sigma_cells, mode="nearest")

    if wrap and blur_sigma > 0:
        provenance = "wrapped+blurred"
    elif wrap:
        provenance = "wrapped"
    else:
        provenance = "blurred"
    metadata = dict(mask.metadata)
    metadata.update({"wrap": wrap, "blur_sigma": blur_sigma, "base": mask.provenance})
    return PhaseMask(grid=mask.grid, values=values, provenance=provenance, metadata=metadata)


def gradient_calibration_mask(
    cfg: PhysicalConfig,
    grid: Grid2D | None = None,
    flip_every: float = 110.0,
    pixels_per_m: float | None = None,
    kappa: float | None = None,
) -> PhaseMask:
    """Prism mask whose sign flips every ``flip_every`` display pixels.

    Bands of alternating deflection sign tile the z axis with period
    ``flip_every / pixels_per_m`` meters; scanning the input frequency
    then flips the emission side once per band, which calibrates the
    frequency-to-position gradient.  ``flip_every = inf`` reproduces the
    plain prism.
    """
    if grid is None:
        grid = Grid2D.for_cloud(cfg)
    if flip_every <= 0:
        raise ValueError("flip_every must be positive")
    ppm = cfg.slm_pixels_per_m if pixels_per_m is None else float(pixels_per_m)
    k = cfg.prism_wavevector if kappa is None else float(kappa)

    base = np.outer(grid.x, grid.z) * (k / cfg.cloud_length)
    metadata: dict = {"kappa": k, "flip_every_px": flip_every, "pixels_per_m": ppm}
    if math.isinf(flip_every):
        sign = np.ones_like(grid.z)
        metadata.update({"band_width_z": math.inf, "band_width_omega": math.inf,
                         "band_edges_z": [], "band_edges_omega": []})
    else:
        band = flip_every / ppm
        index = np.floor(grid.z / band).astype(int)
        sign = np.where(index % 2 == 0, 1.0, -1.0)
        z0, z1 = grid.z[0], grid.z[-1]
        edges = band * np.arange(math.ceil(z0 / band), math.floor(z1 / band) + 1)
        metadata.update(
            {
                "band_width_z": band,
                "band_width_omega": cfg.magnetic_gradient * band,
                "band_edges_z": edges.tolist(),
                "band_edges_omega": (cfg.magnetic_gradient * edges).tolist(),
            }
        )

    mask = PhaseMask(
        grid=grid,
        values=base * sign[None, :],
        provenance="sign-flipped",
        metadata=metadata,
    )
    _warn_if_beyond_display(k, cfg, mask)
    return mask


def mask_from_image(
    path: str | Path,
    grid: Grid2D,
    pixels_per_m: float | None = None,
    intensity_two_pi: float | None = None,
    sidecar: str | Path | None = None,
) -> PhaseMask:
    """Load a phase mask from a grayscale PNG rendered for the display.

    Image rows map to x and columns to z, both at ``pixels_per_m``, with
    the image center on the grid origin.  Gray level
    ``intensity_two_pi`` corresponds to a phase of 2*pi.  Both values
    may come from a JSON sidecar ``{"pixels_per_m": ..,
    "intensity_two_pi": ..}`` located at ``<path>.json`` by default.
    Regions outside the image get zero phase.
    """
    from PIL import Image

    path = Path(path)
    if pixels_per_m is None or intensity_two_pi is None:
        sidecar_path = Path(sidecar) if sidecar is not None else path.with_suffix(path.suffix + ".json")
        try:
            meta = json.loads(sidecar_path.read_text())
        except FileNotFoundError as exc:
            raise ConfigError(
                f"mask image {path} needs pixels_per_m and intensity_two_pi, "
                f"either as arguments or in a sidecar {sidecar_path}"
            ) from exc
        pixels_per_m = float(meta["pixels_per_m"]) if pixels_per_m is None else pixels_per_m
        if intensity_two_pi is None:
            intensity_two_pi = float(meta["intensity_two_pi"])
    if pixels_per_m <= 0 or intensity_two_pi <= 0:
        raise ConfigError("pixels_per_m and intensity_two_pi must be positive")

    with Image.open(path) as img:
        if img.mode not in ("L", "I", "I;16"):
            img = img.convert("I")
        pixels = np.asarray(img, dtype=float)

    phase = TWO_PI * pixels / intensity_two_pi
    rows, cols = phase.shape
    # Fractional image coordinates of every grid node; order-1 keeps the
    # sawtooth edges as sharp as the image resolution allows.
    row_idx = grid.x / (1.0 / pixels_per_m) + (rows - 1) / 2.0
    col_idx = grid.z / (1.0 / pixels_per_m) + (cols - 1) / 2.0
    coords = np.meshgrid(row_idx, col_idx, indexing="ij")
    values = ndimage.map_coordinates(
        phase, np.stack([c.ravel() for c in coords]), order=1, mode="constant", cval=0.0
    ).reshape(grid.nx, grid.nz)

    return PhaseMask(
        grid=grid,
        values=values,
        provenance="external-image",
        metadata={
            "path": str(path),
            "pixels_per_m": pixels_per_m,
            "intensity_two_pi": intensity_two_pi,
            "image_shape": [rows, cols],
        },
    )
