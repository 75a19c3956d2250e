"""Numerical model of a gradient-echo memory used as a spectrum-to-
position converter.

An input pulse spectrum is stored along an atomic cloud by a linear
frequency-to-position map, a programmable intra-cloud phase mask steers
each stored frequency to its own far-field emission angle, and a
photon-counting camera records the result.  The subpackages follow that
chain:

``config``       physical parameters with unit-checked loading
``grid``         simulation grids and cloud density profiles
``formulas``     closed-form maps, efficiency chain, resolution limits
``masks``        ideal, display-degraded and image-derived phase masks
``propagation``  storage, modulation and far-field propagation
``detector``     photon-counting camera Monte Carlo
``estimation``   Fisher/Cramer-Rao, fits, bootstrap, resolvability
``io``           file formats for scans, frames and reports
"""

from .config import CameraModel, PhysicalConfig, load_config, paper_defaults
from .detector import FrameSet, calibrate_pixels, histogram, sample_frames
from .errors import (
    AnalysisError,
    BandwidthExceededError,
    ConfigError,
    DegenerateDistributionError,
    ExtentError,
    FitError,
    GemscopeError,
    GridMismatchError,
    UnitParseError,
)
from .estimation import (
    RAYLEIGH_DIP_CONTRAST,
    BootstrapResult,
    EmpiricalPdfFamily,
    FitResult,
    SweepResult,
    TwoPeakResult,
    bootstrap_position,
    cramer_rao_bound,
    fisher_information,
    fit_gaussian,
    fit_line,
    resolvability_sweep,
    resolve_two_peaks,
    resolving_power,
)
from .formulas import (
    EfficiencyBreakdown,
    ResolutionLimits,
    absorption_efficiency,
    angle_slope,
    efficiency_chain,
    emission_angle,
    gem_frequency_to_position,
    position_to_frequency,
    resolution_limits,
    transverse_wavevector,
)
from .grid import CloudDensity, Grid2D, build_cloud
from .io import (
    jsonify,
    read_frames_jsonl,
    read_scan_csv,
    read_scan_json,
    write_frames_jsonl,
    write_histogram_csv,
    write_report,
    write_rows_csv,
    write_scan_csv,
    write_scan_json,
)
from .masks import (
    PhaseMask,
    gradient_calibration_mask,
    ideal_prism_mask,
    mask_from_image,
    wrap_and_blur_mask,
)
from .propagation import (
    AngularIntensity,
    AngularSpectrum,
    Coherence,
    GaussianSpectrum,
    TwoPeakSpectrum,
    UniformSpectrum,
    far_field,
    frequency_scan,
    modulate,
    modulate_and_unwind,
    scan_detunings,
    store_pulse,
    unwind,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # configuration
    "PhysicalConfig",
    "CameraModel",
    "load_config",
    "paper_defaults",
    # errors
    "GemscopeError",
    "ConfigError",
    "UnitParseError",
    "BandwidthExceededError",
    "ExtentError",
    "GridMismatchError",
    "DegenerateDistributionError",
    "FitError",
    "AnalysisError",
    # grids and clouds
    "Grid2D",
    "CloudDensity",
    "build_cloud",
    # closed forms
    "gem_frequency_to_position",
    "position_to_frequency",
    "transverse_wavevector",
    "emission_angle",
    "angle_slope",
    "absorption_efficiency",
    "efficiency_chain",
    "EfficiencyBreakdown",
    "resolution_limits",
    "ResolutionLimits",
    # masks
    "PhaseMask",
    "ideal_prism_mask",
    "wrap_and_blur_mask",
    "gradient_calibration_mask",
    "mask_from_image",
    # propagation
    "GaussianSpectrum",
    "TwoPeakSpectrum",
    "UniformSpectrum",
    "Coherence",
    "store_pulse",
    "modulate",
    "unwind",
    "modulate_and_unwind",
    "far_field",
    "AngularIntensity",
    "AngularSpectrum",
    "frequency_scan",
    "scan_detunings",
    # detection
    "FrameSet",
    "sample_frames",
    "histogram",
    "calibrate_pixels",
    # estimation
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
    # files
    "jsonify",
    "write_scan_csv",
    "read_scan_csv",
    "write_scan_json",
    "read_scan_json",
    "write_frames_jsonl",
    "read_frames_jsonl",
    "write_histogram_csv",
    "write_report",
    "write_rows_csv",
]
