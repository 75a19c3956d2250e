"""Estimation toolkit: Fisher information, fits, bootstrap, resolution.

Works on the empirical per-detuning photon distributions produced by
the detector stage.  Frequency estimation quality is quantified three
ways that the acceptance suite cross-checks against each other: the
Cramer-Rao bound from finite-difference Fisher information, bootstrap
variances of a fixed-shape Gaussian position fit, and the two-line
Rayleigh resolvability criterion.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import OptimizeWarning, curve_fit

from .config import PhysicalConfig
from .detector import FrameSet
from .errors import AnalysisError, FitError
from .formulas import angle_slope
from .grid import CloudDensity, Grid2D
from .masks import PhaseMask, ideal_prism_mask
from .propagation import TwoPeakSpectrum, frequency_scan

__all__ = [
    "RAYLEIGH_DIP_CONTRAST",
    "EmpiricalPdfFamily",
    "fisher_information",
    "cramer_rao_bound",
    "resolving_power",
    "FitResult",
    "fit_gaussian",
    "fit_line",
    "BootstrapResult",
    "bootstrap_position",
    "TwoPeakResult",
    "resolve_two_peaks",
    "SweepResult",
    "resolvability_sweep",
]

# Dip-to-peak intensity ratio of two equal Gaussian lines whose centers
# sit 1.33 waists apart (waist = 1/e^2 intensity half-width = 2 sigma).
# Separations with a deeper midpoint dip count as resolved.
RAYLEIGH_DIP_CONTRAST = 0.7996

_PDF_FLOOR = 1e-6


# ---------------------------------------------------------------------------
# Empirical pdf families and the Cramer-Rao machinery


@dataclass
class EmpiricalPdfFamily:
    """Per-detuning angular photon distributions with uniform spacing.

    ``pdfs[j]`` is the normalized (sums to 1) pixel distribution
    measured at ``detunings[j]``; ``photons[j]`` is the count it was
    estimated from.
    """

    detunings: np.ndarray
    angles: np.ndarray
    pdfs: np.ndarray
    photons: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.detunings = np.asarray(self.detunings, dtype=float)
        self.angles = np.asarray(self.angles, dtype=float)
        self.pdfs = np.asarray(self.pdfs, dtype=float)
        self.photons = np.asarray(self.photons, dtype=float)
        n = self.detunings.size
        if self.pdfs.shape != (n, self.angles.size):
            raise ValueError("pdfs must have shape (n_detunings, n_angles)")
        if n < 3:
            raise AnalysisError("a pdf family needs at least 3 detunings")
        steps = np.diff(self.detunings)
        if np.any(steps <= 0):
            raise AnalysisError("detunings must be strictly increasing")
        if not np.allclose(steps, steps[0], rtol=1e-6, atol=0.0):
            raise AnalysisError("detunings must be uniformly spaced")
        if np.any(self.photons <= 0):
            raise AnalysisError("every retained detuning needs at least one photon")

    @property
    def step(self) -> float:
        return float(self.detunings[1] - self.detunings[0])

    @classmethod
    def from_counts(
        cls,
        detunings: np.ndarray,
        angles: np.ndarray,
        counts: np.ndarray,
        min_photons: int = 1,
        metadata: dict | None = None,
    ) -> "EmpiricalPdfFamily":
        """Build a family from per-detuning histograms.

        Rows with fewer than ``min_photons`` counts at either end of the
        scan (outside the stored band) are dropped; an underpopulated
        row in the interior is an error since it would break the
        uniform finite-difference grid.
        """
        detunings = np.asarray(detunings, dtype=float)
        counts = np.asarray(counts, dtype=float)
        order = np.argsort(detunings)
        detunings = detunings[order]
        counts = counts[order]
        totals = counts.sum(axis=1)

        good = totals >= min_photons
        if not np.any(good):
            raise AnalysisError("no detuning has enough photons")
        lo = int(np.argmax(good))
        hi = len(good) - int(np.argmax(good[::-1]))
        if not np.all(good[lo:hi]):
            bad = detunings[lo:hi][~good[lo:hi]] / (2 * math.pi)
            raise AnalysisError(
                f"interior detunings with fewer than {min_photons} photons "
                f"(at {np.round(bad, 1).tolist()} Hz) break the uniform grid"
            )
        detunings = detunings[lo:hi]
        totals = totals[lo:hi]
        pdfs = counts[lo:hi] / totals[:, None]
        return cls(
            detunings=detunings,
            angles=np.asarray(angles, dtype=float),
            pdfs=pdfs,
            photons=totals,
            metadata=metadata or {},
        )


def fisher_information(
    family: EmpiricalPdfFamily, index: int, floor: float = _PDF_FLOOR
) -> float:
    """Finite-difference Fisher information about the detuning at
    ``family.detunings[index]``, in (rad/s)^-2.

    Uses the central difference of the neighbouring distributions; bins
    whose probability falls below ``floor`` of the row maximum are
    excluded.  Only interior indices are valid.
    """
    n = family.detunings.size
    if not 1 <= index <= n - 2:
        raise ValueError(f"index {index} is not interior to the family (1..{n - 2})")
    p = family.pdfs[index]
    peak = p.max()
    if peak <= 0:
        raise AnalysisError("pdf is zero everywhere; Fisher information undefined")
    mask = p >= floor * peak
    derivative = (family.pdfs[index + 1] - family.pdfs[index - 1]) / (2.0 * family.step)
    return float(np.sum(derivative[mask] ** 2 / p[mask]))


def cramer_rao_bound(fisher: float, photons: float) -> float:
    """Lower bound 1/sqrt(N F) on the frequency estimate's std, rad/s."""
    if fisher <= 0:
        raise AnalysisError(f"Fisher information must be positive, got {fisher}")
    if photons < 1:
        raise ValueError("photons must be at least 1")
    return 1.0 / math.sqrt(photons * fisher)


def resolving_power(delta_omega: float, carrier_frequency: float) -> float:
    """Spectroscopic resolving power omega_0 / delta_omega."""
    if delta_omega <= 0:
        raise ValueError("delta_omega must be positive")
    if carrier_frequency <= 0:
        raise ValueError("carrier_frequency must be positive")
    return carrier_frequency / delta_omega


# ---------------------------------------------------------------------------
# Peak fitting


@dataclass
class FitResult:
    """Fitted parameters with 1-sigma uncertainties from the local
    quadratic model of the objective."""

    params: dict
    uncertainties: dict
    fixed: dict = field(default_factory=dict)
    residual_norm: float = 0.0
    metadata: dict = field(default_factory=dict)


_GAUSS_PARAM_ORDER = ("center", "sigma", "height", "offset")


def _gauss(x, center, sigma, height, offset):
    return height * np.exp(-0.5 * ((x - center) / sigma) ** 2) + offset


def auto_window(y: np.ndarray) -> tuple[int, int]:
    """Window around the global maximum: the connected run above
    half-maximum, padded by its own width on both sides so the fit sees
    some baseline.  Returns (start, stop) indices."""
    y = np.asarray(y, dtype=float)
    m = int(np.argmax(y))
    baseline = float(np.median(y))
    half = baseline + 0.5 * (y[m] - baseline)
    lo = m
    while lo > 0 and y[lo - 1] > half:
        lo -= 1
    hi = m
    while hi < y.size - 1 and y[hi + 1] > half:
        hi += 1
    width = hi - lo + 1
    return max(0, lo - width), min(y.size, hi + 1 + width)


def fit_gaussian(
    x: np.ndarray,
    y: np.ndarray,
    fixed: dict | None = None,
    window: tuple[int, int] | None = None,
    p0: dict | None = None,
) -> FitResult:
    """Least-squares Gaussian peak fit ``h exp(-(x-c)^2/(2 s^2)) + b``.

    ``fixed`` pins any of ``center``, ``sigma``, ``height``, ``offset``
    to given values; the rest are free.  ``window`` restricts the fit to
    ``x[window[0]:window[1]]`` (auto-selected around the global maximum
    when omitted).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be matching 1-D arrays")
    fixed = dict(fixed or {})
    unknown = set(fixed) - set(_GAUSS_PARAM_ORDER)
    if unknown:
        raise ValueError(f"unknown fixed parameters: {sorted(unknown)}")

    lo, hi = window if window is not None else auto_window(y)
    xw, yw = x[lo:hi], y[lo:hi]
    free = [name for name in _GAUSS_PARAM_ORDER if name not in fixed]
    if xw.size < len(free) + 1:
        raise FitError(f"window of {xw.size} points cannot constrain {len(free)} parameters")
    if np.ptp(yw) == 0 and ("center" in free or "sigma" in free or "height" in free):
        raise FitError("window is flat; no peak to fit")

    guess = {
        "offset": float(yw.min()),
        "height": float(yw.max() - yw.min()),
        "center": float(xw[np.argmax(yw)]),
    }
    weights = np.clip(yw - guess["offset"], 0.0, None)
    wsum = weights.sum()
    if wsum > 0:
        mean = float(np.sum(xw * weights) / wsum)
        var = float(np.sum((xw - mean) ** 2 * weights) / wsum)
        guess["sigma"] = math.sqrt(var) if var > 0 else (xw[1] - xw[0])
    else:
        guess["sigma"] = float(xw[-1] - xw[0]) / 4.0
    guess.update(p0 or {})
    guess.update(fixed)

    def model(xv, *theta):
        kwargs = dict(fixed)
        kwargs.update(zip(free, theta))
        return _gauss(xv, **kwargs)

    try:
        with warnings.catch_warnings():
            # Perfect noiseless fits leave no residual to scale the
            # covariance with; the uncertainties then read 0 below.
            warnings.simplefilter("ignore", OptimizeWarning)
            popt, pcov = curve_fit(
                model, xw, yw, p0=[guess[name] for name in free], maxfev=20000
            )
    except RuntimeError as exc:
        raise FitError(f"gaussian fit did not converge: {exc}") from exc

    params = dict(fixed)
    params.update(zip(free, popt))
    params["sigma"] = abs(params["sigma"])
    with np.errstate(invalid="ignore"):
        sigmas = np.sqrt(np.diag(pcov))
    uncertainties = {name: float(s) if np.isfinite(s) else 0.0 for name, s in zip(free, sigmas)}
    residual = float(np.linalg.norm(model(xw, *popt) - yw))
    return FitResult(
        params={k: float(v) for k, v in params.items()},
        uncertainties=uncertainties,
        fixed=fixed,
        residual_norm=residual,
        metadata={"window": (int(lo), int(hi)), "n_points": int(xw.size)},
    )


def fit_line(
    x: np.ndarray,
    y: np.ndarray,
    mask: np.ndarray | None = None,
    sigma_factor: float = 5.0,
    auto_mask: bool = True,
) -> FitResult:
    """Straight-line fit with robust rejection of off-line points.

    A first pass fits all (unmasked) points; points whose residual
    exceeds ``sigma_factor`` times the residual standard deviation, such
    as parasitic diffraction orders, are excluded and the line refitted.
    The returned metadata records which points were used.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be matching 1-D arrays")
    use = np.ones(x.size, dtype=bool) if mask is None else np.asarray(mask, dtype=bool).copy()
    if use.sum() < 2:
        raise AnalysisError("need at least two points to fit a line")

    coeffs = np.polyfit(x[use], y[use], 1)
    if auto_mask:
        residuals = y - np.polyval(coeffs, x)
        scale = float(residuals[use].std())
        # residuals at float-rounding level are not outliers
        if scale > 1e-12 * max(1.0, float(np.abs(y[use]).max())):
            keep = np.abs(residuals) <= sigma_factor * scale
            refined = use & keep
            if refined.sum() >= 2 and refined.sum() < use.sum():
                use = refined
                coeffs = np.polyfit(x[use], y[use], 1)

    slope, intercept = (float(c) for c in coeffs)
    n = int(use.sum())
    residuals = y[use] - (slope * x[use] + intercept)
    if n > 2:
        s_sq = float(residuals @ residuals) / (n - 2)
        xc = x[use] - x[use].mean()
        sxx = float(xc @ xc)
        slope_err = math.sqrt(s_sq / sxx) if sxx > 0 else 0.0
        intercept_err = math.sqrt(s_sq * (1.0 / n + x[use].mean() ** 2 / sxx)) if sxx > 0 else 0.0
    else:
        slope_err = intercept_err = 0.0
    return FitResult(
        params={"slope": slope, "intercept": intercept},
        uncertainties={"slope": slope_err, "intercept": intercept_err},
        residual_norm=float(np.linalg.norm(residuals)),
        metadata={"used": use, "n_used": n},
    )


# ---------------------------------------------------------------------------
# Bootstrap position uncertainty


@dataclass
class BootstrapResult:
    """Position statistics of repeated fixed-shape Gaussian fits."""

    center_mean: float
    center_var: float
    centers: np.ndarray
    pooled: FitResult
    photons_per_sample: float
    n_samples: int
    frames_per_sample: int


def bootstrap_position(
    frames: FrameSet,
    n_samples: int = 100,
    frames_per_sample: int = 500,
    seed: int = 0,
    window: tuple[int, int] | None = None,
) -> BootstrapResult:
    """Bootstrap the uncertainty of the far-field peak position.

    The full frame stack is averaged and fitted once with every Gaussian
    parameter free; each bootstrap sample then redraws
    ``frames_per_sample`` frames with replacement, averages them and
    refits only the center, with width, height and offset pinned to the
    pooled values.  The variance of the fitted centers estimates the
    per-sample position variance.  Samples use independent counter-based
    substreams of ``seed``, so the result is deterministic and
    independent of evaluation order.
    """
    if frames_per_sample < 1 or n_samples < 2:
        raise ValueError("need frames_per_sample >= 1 and n_samples >= 2")
    if frames.n_frames < frames_per_sample:
        raise AnalysisError(
            f"frame pool of {frames.n_frames} is smaller than "
            f"frames_per_sample = {frames_per_sample}"
        )
    angles = frames.angles()
    counts = frames.counts
    pooled_profile = counts.mean(axis=0)
    pooled = fit_gaussian(angles, pooled_profile, window=window)
    pooled_window = pooled.metadata["window"]
    fixed = {name: pooled.params[name] for name in ("sigma", "height", "offset")}

    centers = np.empty(n_samples)
    photons = 0.0
    for s in range(n_samples):
        rng = np.random.Generator(np.random.Philox(key=np.array([seed, s], dtype=np.uint64)))
        idx = rng.integers(0, frames.n_frames, size=frames_per_sample)
        profile = counts[idx].mean(axis=0)
        photons += float(counts[idx].sum())
        fit = fit_gaussian(
            angles,
            profile,
            fixed=fixed,
            window=pooled_window,
            p0={"center": pooled.params["center"]},
        )
        centers[s] = fit.params["center"]

    return BootstrapResult(
        center_mean=float(centers.mean()),
        center_var=float(centers.var(ddof=1)),
        centers=centers,
        pooled=pooled,
        photons_per_sample=photons / n_samples,
        n_samples=n_samples,
        frames_per_sample=frames_per_sample,
    )


# ---------------------------------------------------------------------------
# Two-line resolvability


@dataclass
class TwoPeakResult:
    """Outcome of the two-line Rayleigh contrast test."""

    resolvable: bool
    contrast: float
    separation_angle: float
    separation_omega: float | None
    sigma_angle: float
    threshold: float
    fit: FitResult


def _two_gauss(x, center, separation, sigma, height, offset):
    half = 0.5 * abs(separation)
    scale = -0.5 / sigma**2
    return (
        height
        * (np.exp(scale * (x - center - half) ** 2) + np.exp(scale * (x - center + half) ** 2))
        + offset
    )


def resolve_two_peaks(
    angles: np.ndarray,
    values: np.ndarray,
    slope: float | None = None,
    threshold: float = RAYLEIGH_DIP_CONTRAST,
) -> TwoPeakResult:
    """Decide whether a two-line far field is resolved.

    Fits a symmetric pair of equal Gaussians and evaluates the fitted
    profile's midpoint dip against its peaks; the pair counts as
    resolved when dip/peak does not exceed ``threshold`` (the contrast
    two ideal Gaussian lines show at 1.33 waists separation).  ``slope``
    (rad per rad/s) converts the fitted angular separation to a
    frequency separation.
    """
    angles = np.asarray(angles, dtype=float)
    values = np.asarray(values, dtype=float)
    if angles.shape != values.shape or angles.ndim != 1:
        raise ValueError("angles and values must be matching 1-D arrays")
    if np.ptp(values) == 0:
        raise FitError("profile is flat; nothing to resolve")

    # Initial guesses: main peak plus the strongest maximum outside its
    # half-maximum region, if one exists.
    lo, hi = auto_window(values)
    m1 = int(np.argmax(values))
    outside = np.ones_like(values, dtype=bool)
    outside[lo:hi] = False
    offset0 = float(np.median(values))
    height0 = float(values[m1] - offset0)
    sep0 = 0.0
    if np.any(outside) and values[outside].max() - offset0 > 0.25 * height0:
        m2 = int(np.flatnonzero(outside)[np.argmax(values[outside])])
        sep0 = abs(angles[m2] - angles[m1])
        center0 = 0.5 * (angles[m1] + angles[m2])
    else:
        center0 = float(angles[m1])
    run = np.flatnonzero(values > offset0 + 0.5 * height0)
    sigma0 = max(
        (angles[run[-1]] - angles[run[0]]) / 2.355 if run.size > 1 else 0.0,
        2.0 * (angles[1] - angles[0]),
    )
    if sep0 == 0.0:
        sep0 = sigma0

    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", OptimizeWarning)
            popt, pcov = curve_fit(
                _two_gauss,
                angles,
                values,
                p0=[center0, sep0, sigma0, height0, offset0],
                maxfev=40000,
            )
    except RuntimeError as exc:
        raise FitError(f"two-line fit did not converge: {exc}") from exc
    center, separation, sigma, height, offset = popt
    separation = abs(float(separation))
    sigma = abs(float(sigma))

    # Contrast of the fitted signal (offset removed) on a fine axis.
    probe = np.linspace(center - separation - 4 * sigma, center + separation + 4 * sigma, 4001)
    shape = _two_gauss(probe, center, separation, sigma, height, 0.0)
    peak = float(shape.max())
    dip = float(_two_gauss(np.array([center]), center, separation, sigma, height, 0.0)[0])
    contrast = dip / peak if peak > 0 else 1.0
    contrast = min(contrast, 1.0)

    with np.errstate(invalid="ignore"):
        errs = np.sqrt(np.diag(pcov))
    fit = FitResult(
        params={
            "center": float(center),
            "separation": separation,
            "sigma": sigma,
            "height": float(height),
            "offset": float(offset),
        },
        uncertainties={
            name: float(e) if np.isfinite(e) else 0.0
            for name, e in zip(("center", "separation", "sigma", "height", "offset"), errs)
        },
        residual_norm=float(np.linalg.norm(_two_gauss(angles, *popt) - values)),
    )
    return TwoPeakResult(
        resolvable=bool(contrast <= threshold),
        contrast=float(contrast),
        separation_angle=separation,
        separation_omega=separation / slope if slope else None,
        sigma_angle=sigma,
        threshold=threshold,
        fit=fit,
    )


@dataclass
class SweepResult:
    """Resolvability versus line separation for a given converter."""

    epsilons: np.ndarray
    contrasts: np.ndarray
    resolvable: np.ndarray
    threshold: float
    crossing_omega: float | None
    results: list


def resolvability_sweep(
    cfg: PhysicalConfig,
    epsilons: np.ndarray,
    mask: PhaseMask | None = None,
    grid: Grid2D | None = None,
    cloud: CloudDensity | None = None,
    detuning: float = 0.0,
    sigma_omega: float | None = None,
    threshold: float = RAYLEIGH_DIP_CONTRAST,
) -> SweepResult:
    """Simulate two-line inputs over a range of separations and locate
    the smallest resolvable one.

    ``crossing_omega`` linearly interpolates the separation at which the
    fitted contrast crosses the threshold (None if the sweep never
    crosses it).
    """
    epsilons = np.sort(np.asarray(epsilons, dtype=float))
    if epsilons.size < 2:
        raise ValueError("sweep needs at least two separations")
    if mask is None:
        mask = ideal_prism_mask(cfg, grid)
    slope = angle_slope(cfg)

    results = []
    contrasts = np.empty(epsilons.size)
    for i, eps in enumerate(epsilons):
        spectrum = TwoPeakSpectrum(
            sigma_omega=sigma_omega or cfg.pulse_sigma_omega, separation=float(eps)
        )
        scan = frequency_scan(cfg, mask, detunings=[detuning], spectrum=spectrum, cloud=cloud)
        result = resolve_two_peaks(scan.angles, scan.intensity[0], slope=slope,
                                   threshold=threshold)
        results.append(result)
        contrasts[i] = result.contrast

    resolvable = contrasts <= threshold
    crossing = None
    hits = np.flatnonzero(resolvable)
    if hits.size:
        i = int(hits[0])
        if i == 0:
            crossing = float(epsilons[0])
        else:
            c0, c1 = contrasts[i - 1], contrasts[i]
            t = (c0 - threshold) / (c0 - c1) if c0 != c1 else 1.0
            crossing = float(epsilons[i - 1] + t * (epsilons[i] - epsilons[i - 1]))
    return SweepResult(
        epsilons=epsilons,
        contrasts=contrasts,
        resolvable=resolvable,
        threshold=threshold,
        crossing_omega=crossing,
        results=results,
    )
