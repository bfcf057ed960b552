"""Figure rendering for diagnostics time series and snapshot grids."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .io import read_diagnostics, read_snapshot


def plot_timeseries(diagnostics_path, columns, out_image_path):
    """Plot the selected diagnostics columns against time.

    The decaying-envelope column is overlaid (dashed) whenever it holds
    finite values, so maximum-principle runs show their bound without
    asking for it.  Unknown columns raise FormatError naming the column.
    """
    frame = read_diagnostics(diagnostics_path)
    series = {name: frame.column(name) for name in columns}
    t = frame.column("time")

    fig, ax = plt.subplots(figsize=(7, 4.5))
    single = frame.n_rows == 1
    for name, values in series.items():
        ax.plot(t, values, marker="o" if single else None, label=name)
    envelope = frame.column("envelope")
    if "envelope" not in series and np.isfinite(envelope).any():
        keep = np.isfinite(envelope)
        ax.plot(
            t[keep], envelope[keep], linestyle="--", color="gray",
            label="envelope",
        )
    ax.set_xlabel("t")
    ax.legend(loc="best")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_image_path, dpi=140)
    plt.close(fig)
    return out_image_path


def plot_snapshot(snapshot_path, out_image_path):
    """Render a snapshot grid as an equirectangular heat map.

    The color scale is symmetric about zero so the two phases read as
    opposite colors regardless of which one dominates.
    """
    t, grid = read_snapshot(snapshot_path)
    vmax = max(1.0, float(np.abs(grid).max()))

    fig, ax = plt.subplots(figsize=(8, 4))
    image = ax.imshow(
        grid,
        cmap="RdBu_r",
        vmin=-vmax,
        vmax=vmax,
        extent=(0.0, 360.0, 180.0, 0.0),
        aspect="auto",
    )
    ax.set_xlabel("longitude (deg)")
    ax.set_ylabel("colatitude (deg)")
    ax.set_title(f"t = {t:g}")
    fig.colorbar(image, ax=ax, label="u")
    fig.tight_layout()
    fig.savefig(out_image_path, dpi=140)
    plt.close(fig)
    return out_image_path
