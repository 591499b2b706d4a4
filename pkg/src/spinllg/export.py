"""CSV and SVG artifacts for trajectories."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .semiclassical import Trajectory

CSV_HEADER = "t,Sx,Sy,Sz,mx,my,mz,S_norm,m_norm,alpha"
SVG_KINDS = ("S", "m", "3d")
_MAX_PLOT_POINTS = 4000


def fmt(x: float) -> str:
    """Positional decimal with 12 significant digits, trailing zeros trimmed."""
    return np.format_float_positional(float(x) + 0.0, precision=12, unique=False,
                                      fractional=False, trim="-")


def write_table(path, header: str, columns) -> Path:
    path = Path(path)
    rows = np.column_stack(columns)
    try:
        with open(path, "w", newline="\n") as fh:
            fh.write(header + "\n")
            for row in rows:
                fh.write(",".join(fmt(v) for v in row) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def export_csv(traj: Trajectory, path) -> Path:
    if len(traj) == 0:
        raise ValueError("cannot export an empty trajectory")
    return write_table(path, CSV_HEADER,
                       [traj.t, traj.S, traj.m, traj.S_norm, traj.m_norm, traj.alpha])


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    # fixed element ids so identical input gives identical bytes
    matplotlib.rcParams["svg.hashsalt"] = "spinllg"
    return plt


def _thin(n: int) -> slice:
    return slice(None, None, max(1, int(np.ceil(n / _MAX_PLOT_POINTS))))


def export_svg(traj: Trajectory, kind: str, path) -> Path:
    """Line plot of S components (``"S"``), m components (``"m"``) or both curves in 3D."""
    if kind not in SVG_KINDS:
        raise ValueError(f"kind must be one of {SVG_KINDS}, got {kind!r}")
    if len(traj) == 0:
        raise ValueError("cannot plot an empty trajectory")
    plt = _pyplot()
    path = Path(path)
    sl = _thin(len(traj))
    t = traj.t[sl]
    if kind == "3d":
        fig = plt.figure(figsize=(6, 6))
        ax = fig.add_subplot(projection="3d")
        ax.plot(*traj.S[sl].T, color="tab:blue", lw=0.8, label=r"$\langle S\rangle$")
        ax.plot(*traj.m[sl].T, color="tab:red", lw=0.8, label=r"$\langle m\rangle$")
        ax.set_xlabel("x")
        ax.set_ylabel("y")
        ax.set_zlabel("z")
    else:
        data = traj.S if kind == "S" else traj.m
        fig, ax = plt.subplots(figsize=(7, 4))
        for i, comp in enumerate("xyz"):
            ax.plot(t, data[sl, i], lw=0.8, label=rf"$\langle {kind}^{comp}\rangle$")
        ax.set_xlabel("t")
        ax.set_ylabel(rf"$\langle {kind}\rangle$")
    ax.legend(loc="upper right")
    fig.tight_layout()
    try:
        fig.savefig(path, format="svg", metadata={"Date": None})
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    finally:
        plt.close(fig)
    return path
