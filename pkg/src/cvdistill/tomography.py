"""Simulated homodyne detection and iterative maximum-likelihood reconstruction.

Samples are drawn from the exact quadrature distribution of a known state;
reconstruction uses the R rho R fixed-point iteration on binned data.
"""

from __future__ import annotations

import io
import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import fock
from .artifacts import atomic_write

log = logging.getLogger(__name__)

PHASES = tuple(k * math.pi / 6 for k in range(6))
PDF_GRID = np.linspace(-10.0, 10.0, 4096)
JOINT_POINTS = 1024
N_BINS = 256
MAX_ITER = 2000
TOL = 1e-9
RNG_NAME = "numpy.PCG64(SeedSequence([seed, phase_index]))"
MODES = ("A", "B", "+", "-")


def hermite_functions(nmax: int, x) -> np.ndarray:
    """``psi_n(x)`` for ``n < nmax`` (rows), normalized for vacuum variance 1/2."""
    x = np.asarray(x, dtype=float)
    out = np.empty((nmax,) + x.shape)
    out[0] = math.pi**-0.25 * np.exp(-(x**2) / 2)
    if nmax > 1:
        out[1] = math.sqrt(2) * x * out[0]
    for n in range(2, nmax):
        out[n] = math.sqrt(2 / n) * x * out[n - 1] - math.sqrt((n - 1) / n) * out[n - 2]
    return out


def projector_vectors(dim: int, x, theta) -> np.ndarray:
    """Rows ``<n|x, theta> = exp(i n theta) psi_n(x)`` for each sample point."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    theta = np.broadcast_to(np.asarray(theta, dtype=float), x.shape)
    n = np.arange(dim)
    return (hermite_functions(dim, x) * np.exp(1j * np.outer(n, theta))).T


def quadrature_pdf(rho: np.ndarray, theta: float, x) -> np.ndarray:
    """``p(x|theta) = sum rho_mn psi_m psi_n exp(i (n - m) theta)``."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim == 1:
        rho = np.outer(rho, rho.conj())
    u = projector_vectors(rho.shape[0], x, theta)
    val = np.einsum("km,mn,kn->k", u.conj(), rho, u).real
    return np.clip(val, 0, None).reshape(np.shape(x))


@dataclass
class QuadratureDataset:
    x: np.ndarray
    theta: np.ndarray
    mode: str
    seed: int
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.theta = np.asarray(self.theta, dtype=float)
        if self.x.shape != self.theta.shape:
            raise ValueError("x and theta must have the same length")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")

    def __len__(self):
        return len(self.x)

    def phases(self) -> np.ndarray:
        return np.unique(self.theta)

    def subset(self, idx) -> "QuadratureDataset":
        return QuadratureDataset(self.x[idx], self.theta[idx], self.mode, self.seed, dict(self.meta))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("x,theta,mode\n")
        for xi, ti in zip(self.x, self.theta):
            buf.write(f"{xi:.17g},{ti:.17g},{self.mode}\n")
        return buf.getvalue()

    def sidecar(self) -> dict:
        return {"seed": int(self.seed), "N": len(self), "state_description": self.meta, "rng": RNG_NAME}

    @classmethod
    def from_csv(cls, text: str, sidecar: dict | None = None) -> "QuadratureDataset":
        lines = text.strip().splitlines()
        if lines[0].strip() != "x,theta,mode":
            raise ValueError("unexpected dataset header")
        rows = [line.split(",") for line in lines[1:]]
        modes = {r[2] for r in rows}
        if len(modes) != 1:
            raise ValueError("a dataset holds a single mode")
        side = sidecar or {}
        return cls(
            x=np.array([float(r[0]) for r in rows]),
            theta=np.array([float(r[1]) for r in rows]),
            mode=modes.pop(),
            seed=int(side.get("seed", 0)),
            meta=side.get("state_description", {}),
        )


def concatenate(parts: list[QuadratureDataset]) -> QuadratureDataset:
    return QuadratureDataset(
        np.concatenate([p.x for p in parts]),
        np.concatenate([p.theta for p in parts]),
        parts[0].mode,
        parts[0].seed,
        dict(parts[0].meta),
    )


def phase_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), int(index)])))


def split_counts(n: int, parts: int) -> list[int]:
    """Counts differing by at most one that sum to ``n``."""
    return [n // parts + (k < n % parts) for k in range(parts)]


def _inverse_cdf(grid: np.ndarray, density: np.ndarray, u: np.ndarray) -> np.ndarray:
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (density[1:] + density[:-1]) * np.diff(grid))])
    cdf /= cdf[-1]
    return np.interp(u, cdf, grid)


def sample_homodyne(
    rho: np.ndarray, theta: float, n: int, seed: int, mode: str = "-", phase_index: int = 0
) -> QuadratureDataset:
    """``n`` draws at one phase by inverse CDF on a 4096-point grid over [-10, 10]."""
    if n < 1:
        raise ValueError("need at least one sample")
    density = quadrature_pdf(rho, theta, PDF_GRID)
    u = phase_rng(seed, phase_index).random(n)
    x = _inverse_cdf(PDF_GRID, density, u)
    return QuadratureDataset(x, np.full(n, float(theta)), mode, seed)


def sample_phases(
    rho: np.ndarray, n: int, seed: int, phases=PHASES, mode: str = "-"
) -> QuadratureDataset:
    """Split ``n`` samples evenly over ``phases`` with per-phase derived seeds."""
    parts = [
        sample_homodyne(rho, th, c, seed, mode, k)
        for k, (th, c) in enumerate(zip(phases, split_counts(n, len(phases))))
        if c > 0
    ]
    return concatenate(parts)


def _joint_grid(dim: int) -> tuple[np.ndarray, float]:
    half = max(7.0, math.sqrt(2 * dim + 1) + 3)
    edges = np.linspace(-half, half, JOINT_POINTS + 1)
    return 0.5 * (edges[1:] + edges[:-1]), edges[1] - edges[0]


def joint_pdf(rho: np.ndarray, theta: float, dims: tuple[int, int] | None = None) -> tuple[np.ndarray, float, np.ndarray]:
    """Joint density of ``(x_A, x_B)`` at common phase on the cell-centre grid."""
    da, db = fock.two_mode_dims(rho, dims)
    centres, h = _joint_grid(max(da, db))
    w, v = np.linalg.eigh(np.asarray(rho, dtype=complex))
    keep = w > 1e-12 * w.max()
    fa = projector_vectors(da, centres, theta).conj()  # <x, theta|n>
    fb = projector_vectors(db, centres, theta).conj()
    dens = np.zeros((len(centres), len(centres)))
    for wk, vk in zip(w[keep], v[:, keep].T):
        amp = fa @ vk.reshape(da, db) @ fb.T
        dens += wk * np.abs(amp) ** 2
    return centres, h, dens


def joint_sample_and_rotate(
    rho: np.ndarray,
    theta: float,
    n: int,
    seed: int,
    dims: tuple[int, int] | None = None,
    phase_index: int = 0,
) -> tuple[QuadratureDataset, QuadratureDataset]:
    """Sample ``(x_A, x_B)`` at a common phase and return the ``+`` and ``-`` records.

    A grid cell is drawn from the exact joint density and the point is
    placed uniformly inside it; then ``x_pm = (x_A pm x_B)/sqrt(2)``.
    """
    centres, h, dens = joint_pdf(rho, theta, dims)
    p = dens.ravel()
    cdf = np.cumsum(p)
    cdf /= cdf[-1]
    rng = phase_rng(seed, phase_index)
    cell = np.minimum(np.searchsorted(cdf, rng.random(n), side="right"), len(p) - 1)
    i, j = np.divmod(cell, len(centres))
    jitter = rng.random((2, n)) - 0.5
    xa = centres[i] + h * jitter[0]
    xb = centres[j] + h * jitter[1]
    th = np.full(n, float(theta))
    plus = QuadratureDataset((xa + xb) / math.sqrt(2), th, "+", seed)
    minus = QuadratureDataset((xa - xb) / math.sqrt(2), th.copy(), "-", seed)
    return plus, minus


def sample_plus_minus(
    rho: np.ndarray,
    n: int,
    seed: int,
    phases=PHASES,
    dims: tuple[int, int] | None = None,
    method: str = "joint",
    factors: tuple[np.ndarray, np.ndarray] | None = None,
) -> tuple[QuadratureDataset, QuadratureDataset]:
    """Equal-phase two-mode homodyne over all phases, rotated to the ``+/-`` basis.

    ``method="factorized"`` samples ``rho_minus`` and ``rho_plus`` (given in
    ``factors``) independently, which is exact when the state is a product in
    the ``+/-`` basis.
    """
    counts = split_counts(n, len(phases))
    plus, minus = [], []
    for k, (th, c) in enumerate(zip(phases, counts)):
        if c == 0:
            continue
        if method == "joint":
            pl, mi = joint_sample_and_rotate(rho, th, c, seed, dims, k)
        elif method == "factorized":
            if factors is None:
                raise ValueError("factorized sampling needs (rho_minus, rho_plus)")
            mi = sample_homodyne(factors[0], th, c, seed, "-", 2 * k)
            pl = sample_homodyne(factors[1], th, c, seed, "+", 2 * k + 1)
        else:
            raise ValueError(f"unknown sampling method {method!r}")
        plus.append(pl)
        minus.append(mi)
    return concatenate(plus), concatenate(minus)


@dataclass
class ReconstructionResult:
    rho: np.ndarray
    iterations: int
    log_likelihood: float
    converged: bool
    history: list = field(default_factory=list)


def bin_dataset(data: QuadratureDataset, n_bins: int = N_BINS) -> tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    """Histogram each phase on a shared grid; returns (centres, thetas, counts, width)."""
    lo, hi = float(data.x.min()), float(data.x.max())
    if hi <= lo:
        hi = lo + 1e-9
    edges = np.linspace(lo, hi, n_bins + 1)
    width = edges[1] - edges[0]
    centres = 0.5 * (edges[1:] + edges[:-1])
    xs, ths, cs = [], [], []
    for th in data.phases():
        counts, _ = np.histogram(data.x[data.theta == th], bins=edges)
        nz = counts > 0
        xs.append(centres[nz])
        ths.append(np.full(nz.sum(), th))
        cs.append(counts[nz])
    return np.concatenate(xs), np.concatenate(ths), np.concatenate(cs).astype(float), width


def mle_reconstruct(
    data: QuadratureDataset,
    dim: int,
    max_iter: int = MAX_ITER,
    tol: float = TOL,
    n_bins: int = N_BINS,
    phase_insensitive: bool = False,
) -> ReconstructionResult:
    """Iterate ``rho <- R rho R / tr`` from the maximally mixed state.

    If a full step would lower the likelihood, a diluted step
    ``(I + eps R) rho (I + eps R)`` with halving ``eps`` is taken instead,
    so the recorded log-likelihood never decreases.  Stops when the relative
    gain drops below ``tol``; otherwise returns with ``converged=False``.

    ``phase_insensitive`` restricts the estimate to Fock-diagonal states using
    the phase-averaged POVM ``sum_n psi_n(x)^2 |n><n|``; one phase is then
    enough data.
    """
    if dim < 2:
        raise ValueError("reconstruction dimension must be at least 2")
    if phase_insensitive:
        return _mle_diagonal(data, dim, max_iter, tol, n_bins)
    x, th, counts, width = bin_dataset(data, n_bins)
    u = projector_vectors(dim, x, th)  # rows u_k, projector width * u_k u_k^dag
    freq = counts / counts.sum()
    eye = np.eye(dim)

    def probs(r):
        return np.maximum(width * np.einsum("km,mn,kn->k", u.conj(), r, u).real, 1e-300)

    def loglik(p):
        return float(np.sum(counts * np.log(p)))

    def r_op(p):
        wgt = width * freq / p
        return (u.T * wgt) @ u.conj()

    rho = eye / dim
    p = probs(rho)
    ll = loglik(p)
    history = [ll]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        r = r_op(p)
        eps = None
        step = r
        while True:
            new = step @ rho @ step.conj().T
            new = 0.5 * (new + new.conj().T)
            new /= np.trace(new).real
            p_new = probs(new)
            ll_new = loglik(p_new)
            if ll_new >= ll:
                break
            eps = 1.0 if eps is None else eps / 2
            if eps < 1e-12:
                new, p_new, ll_new = rho, p, ll
                break
            step = eye + eps * r
        gain = ll_new - ll
        rho, p, ll = new, p_new, ll_new
        history.append(ll)
        if gain <= tol * abs(ll):
            converged = True
            break
    if not converged:
        log.warning("MLE stopped after %d iterations without converging", it)
    return ReconstructionResult(rho=rho, iterations=it, log_likelihood=ll, converged=converged, history=history)


def _mle_diagonal(data: QuadratureDataset, dim: int, max_iter: int, tol: float, n_bins: int) -> ReconstructionResult:
    """EM for the photon-number distribution, ``q_n <- q_n R_nn``."""
    x, _, counts, width = bin_dataset(data, n_bins)
    w = width * hermite_functions(dim, x).T ** 2  # w[k, n]
    freq = counts / counts.sum()
    q = np.full(dim, 1.0 / dim)
    p = np.maximum(w @ q, 1e-300)
    ll = float(np.sum(counts * np.log(p)))
    history = [ll]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        q = q * ((freq / p) @ w)
        q /= q.sum()
        p = np.maximum(w @ q, 1e-300)
        ll_new = float(np.sum(counts * np.log(p)))
        gain = ll_new - ll
        ll = ll_new
        history.append(ll)
        if gain <= tol * abs(ll):
            converged = True
            break
    if not converged:
        log.warning("MLE stopped after %d iterations without converging", it)
    return ReconstructionResult(rho=np.diag(q).astype(complex), iterations=it, log_likelihood=ll, converged=converged, history=history)


def write_dataset(data: QuadratureDataset, path_csv, path_json=None) -> None:
    atomic_write(path_csv, data.to_csv())
    atomic_write(path_json or str(path_csv) + ".json", json.dumps(data.sidecar(), sort_keys=True, indent=2))


def read_dataset(path_csv, path_json=None) -> QuadratureDataset:
    with open(path_csv) as fh:
        text = fh.read()
    side = None
    try:
        with open(path_json or str(path_csv) + ".json") as fh:
            side = json.load(fh)
    except FileNotFoundError:
        pass
    return QuadratureDataset.from_csv(text, side)
