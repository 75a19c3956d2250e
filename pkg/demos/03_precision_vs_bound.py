"""How close does the estimator get to the Cramer-Rao bound?

Builds a Monte-Carlo detection run at every detuning of a band scan,
then compares two numbers per detuning:

  * the lower bound 1/sqrt(N F) from the measured pixel distribution,
  * the bootstrap scatter of the fitted peak, converted to frequency
    through the locally fitted angle response and rescaled to the same
    photon number.

The scatter should hug the bound near band center and lift away from it
toward the edges, where the stored line runs off the cloud.

Runs in roughly ten seconds; trim FRAMES for a quicker look.
"""

import math

import numpy as np

import gemscope as g

TWO_PI = 2.0 * math.pi
FRAMES = 2000


def main():
    cfg = g.paper_defaults()
    grid = g.Grid2D.for_cloud(cfg)
    mask = g.ideal_prism_mask(cfg, grid)
    scan = g.frequency_scan(cfg, mask)

    stacks, rows = [], []
    for j, row in enumerate(scan.intensity):
        frames = g.sample_frames(scan.angles, row, cfg.camera, FRAMES, stream=j)
        stacks.append(frames)
        rows.append(g.histogram(frames)[0])
    family = g.EmpiricalPdfFamily.from_counts(
        scan.detunings, cfg.camera.pixel_centers(), np.vstack(rows), min_photons=1
    )
    boots = [g.bootstrap_position(s) for s in stacks]
    pooled = np.array([b.pooled.params["center"] for b in boots])

    d = family.detunings
    print(f"{FRAMES} frames per detuning, "
          f"~{family.photons.mean():.0f} photons per row")
    print("  detuning (kHz)   bound (Hz)   scatter (Hz)   ratio")
    table = []
    for j in range(1, d.size - 1):
        fisher = g.fisher_information(family, j)
        bound = g.cramer_rao_bound(fisher, family.photons[j])
        local = (pooled[j + 1] - pooled[j - 1]) / (d[j + 1] - d[j - 1])
        same_n = math.sqrt(boots[j].photons_per_sample / family.photons[j])
        scatter = math.sqrt(boots[j].center_var) / abs(local) * same_n
        table.append((d[j], bound, scatter))
        if j % 4 == 1:
            print(f"  {d[j] / TWO_PI / 1e3:12.1f}   {bound / TWO_PI:9.1f} "
                  f"  {scatter / TWO_PI:11.1f}   {scatter / bound:5.2f}")

    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("matplotlib not installed; skipping the figure")
        return

    dets = np.array([t[0] for t in table]) / TWO_PI / 1e3
    bounds = np.array([t[1] for t in table]) / TWO_PI
    scatters = np.array([t[2] for t in table]) / TWO_PI
    fig, ax = plt.subplots(figsize=(5.5, 3.6), constrained_layout=True)
    ax.plot(dets, bounds, "k-", lw=1.2, label="Cramer-Rao bound")
    ax.plot(dets, scatters, "o", ms=4, label="bootstrap scatter")
    ax.set_xlabel("detuning (kHz)")
    ax.set_ylabel("frequency uncertainty (Hz)")
    ax.set_yscale("log")
    ax.legend(frameon=False)
    fig.savefig("precision_vs_bound.png", dpi=150)
    print("wrote precision_vs_bound.png")


if __name__ == "__main__":
    main()
