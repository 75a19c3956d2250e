"""Single-photon detection of one stored line.

Propagates a line at +200 kHz to the far field, then counts photons on
the 400-pixel camera frame by frame. Shows how the accumulated
histogram converges to the underlying angular intensity and how the
bootstrap turns a pile of sparse frames into a center estimate with an
error bar.
"""

import math

import numpy as np

import gemscope as g

TWO_PI = 2.0 * math.pi
DETUNING = TWO_PI * 200e3


def main():
    cfg = g.paper_defaults()
    grid = g.Grid2D.for_cloud(cfg)
    cloud = g.build_cloud(cfg, grid)
    mask = g.ideal_prism_mask(cfg, grid)

    stored = g.store_pulse(cfg, cloud, DETUNING)
    row = g.far_field(g.modulate_and_unwind(stored, mask, cfg), cfg)

    frames = g.sample_frames(row.angles, row.values, cfg.camera, n_frames=4000)
    per_pixel, total = g.histogram(frames)
    print(f"{frames.n_frames} frames, {total} photons "
          f"({total / frames.n_frames:.2f} per frame, incl. background)")

    boot = g.bootstrap_position(frames)
    center = boot.center_mean
    err = math.sqrt(boot.center_var)
    truth = g.angle_slope(cfg) * DETUNING
    print(f"bootstrap center  {center * 1e3:8.4f} mrad "
          f"+/- {err * 1e3:.4f} (500-frame resamples)")
    print(f"expected          {truth * 1e3:8.4f} mrad")
    print(f"pulled frequency  {center / g.angle_slope(cfg) / TWO_PI / 1e3:8.1f} kHz")

    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("matplotlib not installed; skipping the figure")
        return

    pixels = frames.angles()
    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(9, 3.4), constrained_layout=True)
    scale = per_pixel.max() / row.values.max()
    ax0.step(pixels * 1e3, per_pixel, where="mid", lw=0.8, label="counts")
    ax0.plot(row.angles * 1e3, row.values * scale, "r-", lw=1, label="intensity")
    ax0.set_xlim(-2, 6)
    ax0.set_xlabel("angle (mrad)")
    ax0.set_ylabel("photons per pixel")
    ax0.legend(frameon=False)
    ax0.set_title("accumulated histogram")

    # a few raw frames to show how sparse single shots are
    for k in range(3):
        ax1.step(pixels * 1e3, frames.counts[k] + 4 * k, where="mid", lw=0.8)
    ax1.set_xlim(-2, 6)
    ax1.set_xlabel("angle (mrad)")
    ax1.set_yticks([])
    ax1.set_title("three raw frames (offset)")
    fig.savefig("photon_counting.png", dpi=150)
    print("wrote photon_counting.png")


if __name__ == "__main__":
    main()
