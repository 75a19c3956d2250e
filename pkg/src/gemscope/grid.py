"""Simulation grid and atomic cloud density."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import PhysicalConfig
from .errors import ExtentError

__all__ = ["Grid2D", "CloudDensity", "build_cloud"]

# Minimum coverage demanded of any grid a cloud is built on: the density
# has decayed far below one grid cell's worth of signal at these bounds.
_X_COVER_RADII = 4.0
_Z_COVER_LENGTHS = 1.2


@dataclass(frozen=True)
class Grid2D:
    """Uniform 2-D grid over the transverse (x) and longitudinal (z) axes.

    Axes follow FFT layout: sample i sits at (i - n/2) * step, so x = 0
    and z = 0 are exact grid points and the first sample is the extra
    one on the negative side.
    """

    nx: int
    nz: int
    dx: float
    dz: float

    def __post_init__(self) -> None:
        if self.nx < 2 or self.nz < 2:
            raise ValueError("grid needs at least 2 samples per axis")
        if self.dx <= 0 or self.dz <= 0:
            raise ValueError("grid steps must be positive")

    @property
    def x(self) -> np.ndarray:
        return (np.arange(self.nx) - self.nx // 2) * self.dx

    @property
    def z(self) -> np.ndarray:
        return (np.arange(self.nz) - self.nz // 2) * self.dz

    @property
    def x_span(self) -> float:
        return self.nx * self.dx

    @property
    def z_span(self) -> float:
        return self.nz * self.dz

    @classmethod
    def for_cloud(
        cls,
        cfg: PhysicalConfig,
        nx: int = 1024,
        nz: int = 1024,
        x_span_radii: float = _X_COVER_RADII,
        z_span_lengths: float = _Z_COVER_LENGTHS,
    ) -> "Grid2D":
        """Grid sized to the cloud: spans ``x_span_radii * R`` by
        ``z_span_lengths * L`` with power-of-two sample counts."""
        for n, name in ((nx, "nx"), (nz, "nz")):
            if n < 256 or n & (n - 1):
                raise ValueError(f"{name} must be a power of two >= 256, got {n}")
        return cls(
            nx=nx,
            nz=nz,
            dx=x_span_radii * cfg.cloud_radius / nx,
            dz=z_span_lengths * cfg.cloud_length / nz,
        )

    def same_as(self, other: "Grid2D") -> bool:
        return (
            self.nx == other.nx
            and self.nz == other.nz
            and np.isclose(self.dx, other.dx, rtol=1e-12, atol=0.0)
            and np.isclose(self.dz, other.dz, rtol=1e-12, atol=0.0)
        )


@dataclass
class CloudDensity:
    """Separable atomic density sampled on a grid, peak normalized to 1.

    The transverse profile is Gaussian with 1/e^2 radius ``radius``; the
    longitudinal profile is a super-Gaussian of the given order (order 1
    is Gaussian) whose value drops to 1/e^2 at ``+-length/2``.
    """

    grid: Grid2D
    values: np.ndarray
    radius: float
    length: float
    super_gaussian_order: int
    metadata: dict = field(default_factory=dict)

    def profile(self, x: np.ndarray | float, z: np.ndarray | float) -> np.ndarray | float:
        """Evaluate the analytic density off-grid (peak exactly 1)."""
        return _transverse(np.asarray(x, dtype=float), self.radius) * _longitudinal(
            np.asarray(z, dtype=float), self.length, self.super_gaussian_order
        )

    def amplitude(self) -> np.ndarray:
        """Coherence amplitude profile, the square root of the density.

        The read-out beam's intensity then reproduces the density, so
        its transverse waist equals the measured cloud radius.
        """
        return np.sqrt(self.values)


def _transverse(x: np.ndarray, radius: float) -> np.ndarray:
    return np.exp(-2.0 * (x / radius) ** 2)


def _longitudinal(z: np.ndarray, length: float, order: int) -> np.ndarray:
    u2 = (2.0 * z / length) ** 2
    return np.exp(-2.0 * u2**order)


def build_cloud(
    cfg: PhysicalConfig,
    grid: Grid2D | None = None,
    super_gaussian_order: int | None = None,
) -> CloudDensity:
    """Sample the cloud density for ``cfg`` on ``grid``.

    Raises :class:`ExtentError` when the grid does not cover at least
    4R transversally and 1.2L longitudinally; tails beyond those bounds
    are negligible but a smaller box would clip live density.
    """
    if grid is None:
        grid = Grid2D.for_cloud(cfg)
    order = cfg.super_gaussian_order if super_gaussian_order is None else super_gaussian_order
    if order < 1:
        raise ValueError("super_gaussian_order must be >= 1")

    tol = 1.0 - 1e-9
    if grid.x_span < _X_COVER_RADII * cfg.cloud_radius * tol:
        raise ExtentError(
            f"grid x span {grid.x_span:.3e} m does not cover "
            f"{_X_COVER_RADII:g} cloud radii ({_X_COVER_RADII * cfg.cloud_radius:.3e} m)"
        )
    if grid.z_span < _Z_COVER_LENGTHS * cfg.cloud_length * tol:
        raise ExtentError(
            f"grid z span {grid.z_span:.3e} m does not cover "
            f"{_Z_COVER_LENGTHS:g} cloud lengths ({_Z_COVER_LENGTHS * cfg.cloud_length:.3e} m)"
        )

    values = np.outer(
        _transverse(grid.x, cfg.cloud_radius),
        _longitudinal(grid.z, cfg.cloud_length, order),
    )
    return CloudDensity(
        grid=grid,
        values=values,
        radius=cfg.cloud_radius,
        length=cfg.cloud_length,
        super_gaussian_order=order,
    )
