"""Static matplotlib figures for trajectories and plot-data columns (files only)."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["trajectory_figure", "columns_figure"]


def _planes(traj):
    sys = traj.system
    n = sys.n
    st = traj.states
    if sys.kind == "lr-hyperspherical":
        from .hyperspherical import from_hyperspherical

        st = from_hyperspherical(st)
    return [(st[:, k], st[:, n + k]) for k in range(n)]


def trajectory_figure(traj, path, fam=None, dpi=120):
    """Plane projections, energy error and (optionally) integral drifts of one run."""
    planes = _planes(traj)
    ncols = 3 if fam is not None else 2
    fig, axes = plt.subplots(1, ncols, figsize=(4.2 * ncols, 4.0))
    ax = axes[0]
    for k, (x, y) in enumerate(planes, start=1):
        ax.plot(x, y, lw=0.9, label=f"plane {k}")
    ax.set_aspect("equal", adjustable="datalim")
    ax.set_xlabel("x_k")
    ax.set_ylabel("y_k")
    ax.set_title("projection to the (x_k, y_k) planes")
    ax.legend(fontsize=8)

    e = traj.energies()
    err = np.abs(e - e[0]) / max(1.0, abs(e[0]))
    ax = axes[1]
    ax.semilogy(traj.times, np.maximum(err, 1e-18), lw=0.9)
    ax.set_xlabel("t")
    ax.set_title("relative energy error")

    if fam is not None:
        ax = axes[2]
        for f in fam.members:
            v = np.asarray(f(traj.states), dtype=float)
            dv = np.abs(v - v[0]) / max(1.0, abs(v[0]))
            ax.semilogy(traj.times, np.maximum(dv, 1e-18), lw=0.8, label=f.name)
        ax.set_xlabel("t")
        ax.set_title("first-integral drift")
        ax.legend(fontsize=7, ncol=2)

    fig.suptitle(traj.system.label, fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=dpi)
    plt.close(fig)
    return path


def columns_figure(names, data, path, dpi=120):
    """Line plot of 2 columns or a 3D line of 3 columns; more columns are drawn against row index."""
    data = np.asarray(data, dtype=float)
    fig = plt.figure(figsize=(5, 4.5))
    if data.shape[1] == 3:
        ax = fig.add_subplot(projection="3d")
        ax.plot(data[:, 0], data[:, 1], data[:, 2], lw=0.9)
        ax.set_zlabel(names[2])
    else:
        ax = fig.add_subplot()
        if data.shape[1] == 2:
            ax.plot(data[:, 0], data[:, 1], lw=0.9)
            ax.set_aspect("equal", adjustable="datalim")
        else:
            for j, name in enumerate(names):
                ax.plot(data[:, j], lw=0.9, label=name)
            ax.legend(fontsize=8)
    ax.set_xlabel(names[0])
    if len(names) > 1:
        ax.set_ylabel(names[1])
    fig.tight_layout()
    fig.savefig(path, dpi=dpi)
    plt.close(fig)
    return path
