"""Optional PNG figures rendered next to the delimited artifacts.

Plots are derived views only; the CSV/JSON files stay the source of truth
and are byte-identical whether or not figures are requested.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "figure.figsize": (5.0, 3.6),
    "figure.dpi": 120,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 10,
    "legend.frameon": False,
    "savefig.bbox": "tight",
    # fixed metadata keeps PNG bytes stable between runs
    "savefig.dpi": 120,
}
LABELS = {"undistilled": "undistilled", "1photon": "1-photon", "2photon": "2-photon"}


def _save(fig, path: Path) -> Path:
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
    return path


def curve(data: dict, path: Path, ylabel: str = "log-negativity (ebits)") -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for name, (x, y) in data.items():
            ax.plot(x, y, marker="o", ms=3, label=LABELS.get(name, name))
        ax.set_xlabel("initial squeezing (dB)")
        ax.set_ylabel(ylabel)
        ax.legend()
        return _save(fig, path)


def entropy(data: dict, path: Path) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for name, (x, y) in data.items():
            ax.plot(x, y, label=name.replace("E", "state "))
        ax.set_xlabel("r")
        ax.set_ylabel("entropy of entanglement (ebits)")
        ax.legend()
        return _save(fig, path)


def wigner(x: np.ndarray, p: np.ndarray, values: np.ndarray, path: Path) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.2, 3.6))
        lim = float(np.max(np.abs(values)))
        mesh = ax.pcolormesh(x, p, values, cmap="RdBu_r", vmin=-lim, vmax=lim, shading="auto")
        ax.set_aspect("equal")
        ax.grid(False)
        ax.set_xlabel("x")
        ax.set_ylabel("p")
        fig.colorbar(mesh, ax=ax, label="W(x, p)")
        return _save(fig, path)


def histograms(samples: dict, path: Path) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for name, x in samples.items():
            ax.hist(x, bins=120, density=True, histtype="step", label=name)
        grid = np.linspace(-5, 5, 400)
        ax.plot(grid, np.exp(-grid**2) / np.sqrt(np.pi), "k:", lw=1, label="vacuum")
        ax.set_xlabel("quadrature")
        ax.set_ylabel("density")
        ax.legend()
        return _save(fig, path)


def extrapolation(points, a: float, b: float, truth: float, path: Path) -> Path:
    pts = np.asarray(points, dtype=float)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        inv = 1 / np.sqrt(pts[:, 0])
        ax.errorbar(inv, pts[:, 1], yerr=pts[:, 2], fmt="o", ms=4, capsize=2, label="subsets")
        line = np.linspace(0, inv.max() * 1.05, 50)
        ax.plot(line, a + b * line, "-", label=f"fit a={a:.4f}")
        ax.axhline(truth, color="k", ls=":", lw=1, label="true value")
        ax.set_xlabel("1/sqrt(N)")
        ax.set_ylabel("log-negativity (ebits)")
        ax.legend()
        return _save(fig, path)


def render(figures: dict, out: Path) -> list[Path]:
    """Write every figure a pipeline produced; returns the file paths."""
    made = []
    for name, data in figures.items():
        target = out / f"{name}.png"
        if name == "curve":
            made.append(curve(data, target))
        elif name == "epr":
            made.append(curve(data, target, ylabel="Var(x_-) / vacuum"))
        elif name == "entropy":
            made.append(entropy(data, target))
        elif name == "wigner":
            made.append(wigner(*data, target))
        elif name == "tomography":
            made.append(histograms(data, target))
        elif name == "extrapolation":
            made.append(extrapolation(*data, target))
    return made
