"""Photon-counting camera model: geometry, sampling statistics, seeding."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gemscope import CameraModel, FrameSet, calibrate_pixels, histogram, sample_frames
from gemscope.errors import DegenerateDistributionError

TWO_PI = 2.0 * math.pi

PITCH = 0.27e-3


def gaussian_row(sigma=0.6e-3, span=5e-3, n=801):
    angles = np.linspace(-span, span, n)
    return angles, np.exp(-0.5 * (angles / sigma) ** 2)


def small_camera(**kw):
    defaults = dict(pixel_pitch_angle=PITCH, n_pixels=40, seed=7)
    defaults.update(kw)
    return CameraModel(**defaults)


class TestGeometry:
    def test_edges_and_centers(self):
        cam = CameraModel(pixel_pitch_angle=PITCH, n_pixels=400)
        edges = cam.pixel_edges()
        centers = cam.pixel_centers()
        assert edges.size == 401 and centers.size == 400
        assert edges[0] == pytest.approx(-0.054)
        assert edges[-1] == pytest.approx(0.054)
        assert np.allclose(np.diff(edges), PITCH)
        assert np.allclose(centers, (edges[:-1] + edges[1:]) / 2)
        assert centers[0] == -centers[-1]

    def test_validation(self):
        with pytest.raises(ValueError):
            CameraModel(pixel_pitch_angle=0.0)
        with pytest.raises(ValueError):
            CameraModel(pixel_pitch_angle=PITCH, n_pixels=0)
        with pytest.raises(ValueError):
            CameraModel(pixel_pitch_angle=PITCH, mean_signal_per_frame=-1.0)
        with pytest.raises(ValueError):
            CameraModel(pixel_pitch_angle=PITCH, seed=-1)

    def test_with_seed(self):
        cam = small_camera()
        assert cam.with_seed(99).seed == 99
        assert cam.seed == 7

    def test_frameset_validation(self):
        with pytest.raises(ValueError):
            FrameSet(counts=np.zeros(10))
        with pytest.raises(ValueError):
            FrameSet(counts=-np.ones((2, 3)))

    def test_frameset_angles_from_metadata(self):
        fs = FrameSet(
            counts=np.zeros((1, 5), dtype=int),
            metadata={"pixel_pitch_angle": 1e-3},
        )
        assert np.allclose(fs.angles(), [-2e-3, -1e-3, 0.0, 1e-3, 2e-3])


class TestCalibration:
    def test_reference_grating(self, cfg):
        # a 2pi*10/mm grating lands ~29.4 px off center at 0.27 mrad/px
        k = TWO_PI * 10e3
        offset = (k / cfg.wavevector) / PITCH
        assert offset == pytest.approx(29.44, abs=0.01)
        assert calibrate_pixels(k, offset, cfg.wavevector) == pytest.approx(PITCH)

    @given(
        pitch=st.floats(min_value=1e-5, max_value=1e-2),
        k=st.floats(min_value=1e3, max_value=1e6),
    )
    def test_round_trip(self, pitch, k):
        k0 = TWO_PI / 795e-9
        offset = (k / k0) / pitch
        assert calibrate_pixels(k, offset, k0) == pytest.approx(pitch, rel=1e-12)

    def test_errors(self):
        with pytest.raises(ValueError):
            calibrate_pixels(1e3, 0.0, 1e7)
        with pytest.raises(ValueError):
            calibrate_pixels(1e3, 10.0, -1e7)


class TestSampling:
    def test_shapes_and_metadata(self):
        angles, intensity = gaussian_row()
        frames = sample_frames(angles, intensity, small_camera(), n_frames=20, stream=3)
        assert frames.counts.shape == (20, 40)
        assert frames.n_frames == 20 and frames.n_pixels == 40
        assert frames.metadata["seed"] == 7
        assert frames.metadata["stream"] == 3
        assert frames.metadata["pixel_pitch_angle"] == pytest.approx(PITCH)

    def test_deterministic(self):
        angles, intensity = gaussian_row()
        a = sample_frames(angles, intensity, small_camera(), n_frames=50)
        b = sample_frames(angles, intensity, small_camera(), n_frames=50)
        assert np.array_equal(a.counts, b.counts)

    def test_frame_prefix_stable(self):
        # frame i depends only on (seed, stream, i), not on n_frames
        angles, intensity = gaussian_row()
        short = sample_frames(angles, intensity, small_camera(), n_frames=30)
        long = sample_frames(angles, intensity, small_camera(), n_frames=100)
        assert np.array_equal(short.counts, long.counts[:30])

    def test_seed_and_stream_decorrelate(self):
        angles, intensity = gaussian_row()
        base = sample_frames(angles, intensity, small_camera(), n_frames=50)
        other_seed = sample_frames(
            angles, intensity, small_camera(seed=8), n_frames=50
        )
        other_stream = sample_frames(
            angles, intensity, small_camera(), n_frames=50, stream=1
        )
        assert not np.array_equal(base.counts, other_seed.counts)
        assert not np.array_equal(base.counts, other_stream.counts)

    def test_degenerate_distribution(self):
        angles = np.linspace(-1e-3, 1e-3, 11)
        with pytest.raises(DegenerateDistributionError):
            sample_frames(angles, np.zeros(11), small_camera(), n_frames=5)

    def test_zero_signal_rate_allowed(self):
        angles = np.linspace(-1e-3, 1e-3, 11)
        cam = small_camera(mean_signal_per_frame=0.0, mean_noise_per_frame=0.5)
        frames = sample_frames(angles, np.zeros(11), cam, n_frames=200)
        total = frames.counts.sum()
        # background only: 200 frames at 0.5007/frame
        assert 60 < total < 150

    def test_photons_outside_strip_are_lost(self):
        # a peak far beyond the last pixel leaves only background
        angles = np.linspace(0.08, 0.09, 101)
        intensity = np.ones(101)
        cam = small_camera(mean_noise_per_frame=0.0, mean_dark_per_frame=0.0)
        frames = sample_frames(angles, intensity, cam, n_frames=50)
        assert frames.counts.sum() == 0

    def test_histogram(self):
        angles, intensity = gaussian_row()
        frames = sample_frames(angles, intensity, small_camera(), n_frames=100)
        per_pixel, total = histogram(frames)
        assert np.array_equal(per_pixel, frames.counts.sum(axis=0))
        assert total == frames.counts.sum()

    def test_bad_frame_count(self):
        angles, intensity = gaussian_row()
        with pytest.raises(ValueError):
            sample_frames(angles, intensity, small_camera(), n_frames=0)


@pytest.fixture(scope="module")
def big_run():
    angles, intensity = gaussian_row()
    cam = small_camera(mean_noise_per_frame=0.0, mean_dark_per_frame=0.0)
    return sample_frames(angles, intensity, cam, n_frames=10_000)


class TestStatistics:
    def test_total_count_budget(self):
        angles, intensity = gaussian_row()
        frames = sample_frames(angles, intensity, small_camera(), n_frames=2000)
        expected = 2000 * (2.5 + 0.1 + 0.0007)
        total = frames.counts.sum()
        assert abs(total - expected) < 3 * math.sqrt(expected)

    def test_poisson_frame_totals(self, big_run):
        """Mean and variance of the per-frame total agree as Poisson."""
        totals = big_run.counts.sum(axis=1)
        mean = totals.mean()
        var = totals.var(ddof=1)
        assert mean == pytest.approx(2.5, rel=0.05)
        assert var / mean == pytest.approx(1.0, abs=0.05)

    def test_poisson_peak_pixel(self, big_run):
        peak = int(np.argmax(big_run.counts.sum(axis=0)))
        col = big_run.counts[:, peak]
        assert col.var(ddof=1) / col.mean() == pytest.approx(1.0, abs=0.05)

    def test_angular_distribution_matches_input(self, big_run):
        """Chi-square of the aggregated histogram against the expected
        per-pixel integrals of the piecewise-linear density."""
        angles, intensity = gaussian_row()
        cam = small_camera()
        per_pixel, total = histogram(big_run)

        fine = np.linspace(angles[0], angles[-1], 200_001)
        pdf = np.interp(fine, angles, intensity)
        cdf = np.concatenate([[0.0], np.cumsum((pdf[1:] + pdf[:-1]) / 2)])
        cdf /= cdf[-1]
        edge_cdf = np.interp(cam.pixel_edges(), fine, cdf, left=0.0, right=1.0)
        expected = np.diff(edge_cdf) * total

        keep = expected >= 10
        chi2 = np.sum((per_pixel[keep] - expected[keep]) ** 2 / expected[keep])
        dof = int(keep.sum()) - 1
        assert dof > 10
        assert chi2 / dof < 1.6
