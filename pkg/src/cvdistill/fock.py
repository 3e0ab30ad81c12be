"""Truncated Fock-space states and the elementary bosonic operations.

Conventions
-----------
* Quadratures ``x = (a + a^dag)/sqrt(2)`` and ``p = (a - a^dag)/(i sqrt(2))``;
  the vacuum has variance 1/2 in both.
* ``S(r) = exp(r (a^2 - a^dag^2) / 2)`` squeezes ``x`` for ``r > 0``.
* ``B(theta) = exp(theta (a_A^dag a_B - a_A a_B^dag))``; reflectance
  ``R = sin(theta)^2``.

Pure single-mode states are 1-D complex arrays of length ``D``.  Pure
two-mode states are ``(D_A, D_B)`` coefficient matrices with entry
``[m, n]`` the amplitude of ``|m>_A |n>_B``.  Density matrices are dense
2-D arrays; two-mode ones use row-major ``A (x) B`` ordering, so a state
with cutoffs ``(D_A, D_B)`` has shape ``(D_A*D_B, D_A*D_B)``.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import expm

from .errors import DimensionError, LeakageError, TruncationError

log = logging.getLogger(__name__)

DEFAULT_DIM = 20
TAIL_TOL = 1e-6
LEAKAGE_TOL = 1e-8
SCHEMA_VERSION = 1


@dataclass(frozen=True)
class ModeParams:
    """Physical parameters of one protocol run.

    ``lam``, ``lam_prime`` and ``theta`` are derived on access so that they
    can never drift from ``r`` and ``R``.
    """

    r: float
    R: float = 0.0
    eta: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.R < 1.0:
            raise ValueError(f"reflectance must lie in [0, 1), got {self.R}")
        if not 0.0 < self.eta <= 1.0:
            raise ValueError(f"efficiency must lie in (0, 1], got {self.eta}")

    @property
    def lam(self) -> float:
        return math.tanh(self.r)

    @property
    def lam_prime(self) -> float:
        return math.tanh(self.r / 2)

    @property
    def theta(self) -> float:
        return math.asin(math.sqrt(self.R))


# ---------------------------------------------------------------------------
# ladder operators and basic states


def destroy(dim: int) -> np.ndarray:
    """Annihilation operator on the first ``dim`` number states."""
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1)


def quadratures(dim: int) -> tuple[np.ndarray, np.ndarray]:
    a = destroy(dim)
    x = (a + a.T) / np.sqrt(2)
    p = (a - a.T) / (1j * np.sqrt(2))
    return x, p


def basis(dim: int, n: int) -> np.ndarray:
    if not 0 <= n < dim:
        raise DimensionError(f"level {n} outside cutoff {dim}")
    v = np.zeros(dim, dtype=complex)
    v[n] = 1.0
    return v


def vacuum(dim: int = DEFAULT_DIM) -> np.ndarray:
    return basis(dim, 0)


def two_mode_basis(dim: int, m: int, n: int) -> np.ndarray:
    c = np.zeros((dim, dim), dtype=complex)
    c[m, n] = 1.0
    return c


def squeezed_vacuum(r: float, dim: int = DEFAULT_DIM) -> np.ndarray:
    """Single-mode squeezed vacuum ``S(r)|0>`` truncated to ``dim`` levels.

    The closed-form amplitudes are
    ``c_2n = (-tanh r)^n sqrt((2n)!) / (2^n n!) / sqrt(cosh r)``.  The result
    is renormalised after truncation; a discarded tail heavier than
    ``TAIL_TOL`` raises :class:`TruncationError`.
    """
    if dim < 2:
        raise DimensionError("cutoff must be at least 2")
    if abs(r) >= 5:
        raise ValueError(f"|r| must be below 5, got {r}")
    t = math.tanh(r)
    c = np.zeros(dim, dtype=complex)
    c[0] = 1.0 / math.sqrt(math.cosh(r))
    for n in range(0, dim - 2, 2):
        c[n + 2] = c[n] * (-t) * math.sqrt((n + 1) / (n + 2))
    tail = 1.0 - float(np.vdot(c, c).real)
    if tail > TAIL_TOL:
        raise TruncationError(
            f"squeezed vacuum r={r} loses {tail:.2e} of its norm at cutoff {dim}"
        )
    return c / np.linalg.norm(c)


def two_mode_squeezed_vacuum(lam_prime: float, dim: int = DEFAULT_DIM) -> np.ndarray:
    """``sqrt(1 - l^2) sum_n l^n |n, n>`` as a coefficient matrix."""
    n = np.arange(dim)
    amps = math.sqrt(1 - lam_prime**2) * lam_prime**n
    tail = 1.0 - float(np.sum(amps**2))
    if tail > TAIL_TOL:
        raise TruncationError(f"two-mode squeezed vacuum loses {tail:.2e} at cutoff {dim}")
    c = np.diag(amps).astype(complex)
    return c / np.linalg.norm(c)


def product_state(psi_a: np.ndarray, psi_b: np.ndarray) -> np.ndarray:
    return np.outer(psi_a, psi_b)


# ---------------------------------------------------------------------------
# operators on pure states


def annihilate(state: np.ndarray, axis: int = 0) -> np.ndarray:
    """Apply ``a`` to one mode of a pure state (result is not renormalised).

    ``axis`` selects the mode; for two-mode coefficient matrices axis 0 is
    mode A and axis 1 is mode B.
    """
    state = np.asarray(state)
    d = state.shape[axis]
    moved = np.moveaxis(state, axis, 0)
    out = np.zeros_like(moved, dtype=complex)
    scale = np.sqrt(np.arange(1, d)).reshape((-1,) + (1,) * (moved.ndim - 1))
    out[:-1] = scale * moved[1:]
    return np.moveaxis(out, 0, axis)


def apply_annihilation(state: np.ndarray, mode: str = "A") -> np.ndarray:
    return annihilate(state, _mode_axis(mode))


def _mode_axis(mode) -> int:
    if mode in ("A", 0):
        return 0
    if mode in ("B", 1):
        return 1
    raise ValueError(f"unknown mode {mode!r}")


@lru_cache(maxsize=4096)
def _bs_block(theta: float, n: int) -> np.ndarray:
    """Exact beam splitter restricted to the ``n``-photon sector.

    Basis ``|k, n-k>`` ordered by ``k``.  The sector is invariant, so the
    generator needs no truncation here.
    """
    k = np.arange(n)
    off = np.sqrt((k + 1.0) * (n - k))
    gen = np.diag(off, -1) - np.diag(off, 1)
    u = expm(theta * gen)
    u.setflags(write=False)
    return u


def beamsplitter_tensor(
    state: np.ndarray,
    theta: float,
    axes: tuple[int, int] = (0, 1),
    out_dims: tuple[int, int] | None = None,
) -> tuple[np.ndarray, float]:
    """Apply ``B(theta)`` between two axes of a pure-state tensor.

    Returns the new tensor and the squared norm that landed outside the
    output box.  The first axis plays the role of mode A in the generator.
    """
    state = np.asarray(state, dtype=complex)
    i, j = axes
    moved = np.moveaxis(state, (i, j), (0, 1))
    d1, d2 = moved.shape[:2]
    rest = moved.shape[2:]
    o1, o2 = out_dims if out_dims is not None else (d1, d2)
    flat = moved.reshape(d1, d2, -1)
    out = np.zeros((o1, o2, flat.shape[2]), dtype=complex)
    leak = 0.0
    for n in range(d1 + d2 - 1):
        k_in = np.arange(max(0, n - d2 + 1), min(n, d1 - 1) + 1)
        vec = flat[k_in, n - k_in]
        if not np.any(vec):
            continue
        full = _bs_block(float(theta), n)[:, k_in] @ vec
        k_out = np.arange(n + 1)
        keep = (k_out < o1) & (n - k_out < o2)
        out[k_out[keep], n - k_out[keep]] = full[keep]
        leak += float(np.sum(np.abs(full[~keep]) ** 2))
    out = out.reshape((o1, o2) + rest)
    return np.moveaxis(out, (0, 1), (i, j)), leak


def apply_beamsplitter(
    state: np.ndarray,
    theta: float,
    out_dims: tuple[int, int] | None = None,
    tol: float = LEAKAGE_TOL,
) -> np.ndarray:
    """Beam splitter on a two-mode coefficient matrix.

    Raises :class:`LeakageError` when more than ``tol`` of the norm leaves
    the output box.  ``theta = pi/4`` is the balanced splitter.
    """
    out, leak = beamsplitter_tensor(state, theta, (0, 1), out_dims)
    log.debug("beam splitter theta=%.6g leakage=%.3e", theta, leak)
    if leak > tol:
        raise LeakageError(f"beam splitter leaked {leak:.3e} (tolerance {tol:.1e})")
    return out


def beamsplitter_matrix(
    theta: float, in_dims: tuple[int, int], out_dims: tuple[int, int] | None = None
) -> np.ndarray:
    """Dense matrix of ``B(theta)`` mapping ``in_dims`` onto ``out_dims`` (A (x) B)."""
    d1, d2 = in_dims
    o1, o2 = out_dims if out_dims is not None else in_dims
    eye = np.eye(d1 * d2, dtype=complex).reshape(d1, d2, d1 * d2)
    out, _ = beamsplitter_tensor(eye, theta, (0, 1), (o1, o2))
    return out.reshape(o1 * o2, d1 * d2)


@lru_cache(maxsize=256)
def _squeeze_columns(r: float, dim: int, pad: int) -> np.ndarray:
    big = dim + pad
    a = destroy(big)
    u = expm(0.5 * r * (a @ a - a.T @ a.T))
    cols = np.ascontiguousarray(u[:, :dim])
    cols.setflags(write=False)
    return cols


def squeeze_operator(r: float, dim: int, pad: int | None = None) -> np.ndarray:
    """Columns of ``S(r)`` acting on the first ``dim`` levels.

    The generator is exponentiated in an enlarged space of ``dim + pad``
    levels; the returned ``(dim + pad, dim)`` block lets callers audit how
    much amplitude leaves the ``dim`` box.
    """
    if pad is None:
        pad = max(40, dim)
    return _squeeze_columns(float(r), int(dim), int(pad))


def apply_local_squeezing(
    state: np.ndarray, r_a: float, r_b: float, tol: float = TAIL_TOL
) -> np.ndarray:
    """Apply ``S_A(r_a) S_B(r_b)`` to a two-mode coefficient matrix."""
    da, db = state.shape
    sa = squeeze_operator(r_a, da)
    sb = squeeze_operator(r_b, db)
    big = sa @ state @ sb.T
    kept = big[:da, :db]
    tail = float(np.sum(np.abs(big) ** 2) - np.sum(np.abs(kept) ** 2))
    if tail > tol:
        raise TruncationError(f"local squeezing pushed {tail:.2e} outside the cutoff")
    return kept


# ---------------------------------------------------------------------------
# density matrices


def ket2dm(state: np.ndarray) -> np.ndarray:
    v = np.asarray(state, dtype=complex).reshape(-1)
    return np.outer(v, v.conj())


def two_mode_dims(rho: np.ndarray, dims: tuple[int, int] | None = None) -> tuple[int, int]:
    if dims is not None:
        if dims[0] * dims[1] != rho.shape[0]:
            raise DimensionError(f"dims {dims} do not match matrix size {rho.shape[0]}")
        return tuple(dims)
    d = math.isqrt(rho.shape[0])
    if d * d != rho.shape[0]:
        raise DimensionError("cannot infer equal two-mode cutoffs; pass dims")
    return d, d


def normalize(x: np.ndarray) -> np.ndarray:
    """Normalise a ket (unit norm) or a density matrix (unit trace)."""
    x = np.asarray(x, dtype=complex)
    if x.ndim == 2 and x.shape[0] == x.shape[1] and is_hermitian(x, 1e-12) and np.trace(x).real > 0:
        return x / np.trace(x).real
    nrm = np.linalg.norm(x)
    if nrm == 0:
        raise ValueError("cannot normalise the zero state")
    return x / nrm


def is_hermitian(rho: np.ndarray, tol: float = 1e-10) -> bool:
    return bool(np.allclose(rho, rho.conj().T, atol=tol, rtol=0))


def tensor(*ops: np.ndarray) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for op in ops:
        out = np.kron(out, op)
    return out


def partial_trace(
    rho: np.ndarray, keep: str | int = "A", dims: tuple[int, int] | None = None
) -> np.ndarray:
    """Reduced state of one mode of a two-mode density matrix."""
    da, db = two_mode_dims(rho, dims)
    t = rho.reshape(da, db, da, db)
    if _mode_axis(keep) == 0:
        return np.einsum("ijkj->ik", t)
    return np.einsum("ijil->jl", t)


def psd_sqrt(rho: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(rho)
    w = np.clip(w, 0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """Uhlmann fidelity ``(tr sqrt(sqrt(a) b sqrt(a)))^2``.

    1-D arguments are kets (flatten two-mode coefficient matrices first);
    2-D arguments are density matrices.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.ndim == 1 and b.ndim == 1:
        if a.size != b.size:
            raise DimensionError("state sizes differ")
        return float(abs(np.vdot(a, b)) ** 2 / (np.vdot(a, a).real * np.vdot(b, b).real))
    if a.ndim == 1 or b.ndim == 1:
        ket, rho = (a, b) if a.ndim == 1 else (b, a)
        if ket.size != rho.shape[0]:
            raise DimensionError("state sizes differ")
        return float(np.vdot(ket, rho @ ket).real / np.vdot(ket, ket).real)
    if a.shape != b.shape:
        raise DimensionError("state sizes differ")
    # F = ||sqrt(a) sqrt(b)||_tr^2; noise in null spaces enters only at second order
    s = np.linalg.svd(psd_sqrt(a) @ psd_sqrt(b), compute_uv=False)
    return float(min(np.sum(s) ** 2, 1.0))


def fidelity_from_factors(m: np.ndarray, n: np.ndarray) -> float:
    """Fidelity of ``m m^dag`` and ``n n^dag`` (both trace 1).

    Uses ``F = ||m^dag n||_tr^2``, which stays accurate for rank-deficient
    states where the matrix square root route loses about half the digits.
    """
    s = np.linalg.svd(m.conj().T @ n, compute_uv=False)
    return float(np.sum(s) ** 2)


def state_fidelity(psi: np.ndarray, phi: np.ndarray) -> float:
    """Overlap fidelity of two pure states of any (equal) shape."""
    return fidelity(np.ravel(psi), np.ravel(phi))


# ---------------------------------------------------------------------------
# loss


@lru_cache(maxsize=256)
def _loss_kraus(eta: float, dim: int) -> np.ndarray:
    """Kraus operators ``K_k`` of a pure-loss channel, stacked on axis 0."""
    ks = np.zeros((dim, dim, dim))
    n = np.arange(dim)
    for k in range(dim):
        m = n[k:]
        coef = np.array([math.comb(int(x), k) for x in m], dtype=float)
        ks[k, m - k, m] = np.sqrt(coef * eta ** (m - k) * (1 - eta) ** k)
    ks.setflags(write=False)
    return ks


def loss_channel(
    rho: np.ndarray, eta: float, mode: str | int | None = None, dims: tuple[int, int] | None = None
) -> np.ndarray:
    """Pure-loss channel of transmittance ``eta``.

    ``mode=None`` treats ``rho`` as a single-mode density matrix; ``"A"`` or
    ``"B"`` act on one mode of a two-mode matrix.
    """
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"efficiency must lie in (0, 1], got {eta}")
    rho = np.asarray(rho, dtype=complex)
    if eta == 1.0:
        return rho.copy()
    if mode is None:
        k = _loss_kraus(float(eta), rho.shape[0])
        return np.einsum("kai,ij,kbj->ab", k, rho, k, optimize=True)
    da, db = two_mode_dims(rho, dims)
    t = rho.reshape(da, db, da, db)
    if _mode_axis(mode) == 0:
        k = _loss_kraus(float(eta), da)
        tmp = np.tensordot(k, t, axes=([2], [0]))  # k, a', b, c, d
        t = np.einsum("kabcd,kec->abed", tmp, k, optimize=True)
    else:
        k = _loss_kraus(float(eta), db)
        tmp = np.tensordot(k, t, axes=([2], [1]))  # k, b', a, c, d
        t = np.einsum("kbacd,ked->abce", tmp, k, optimize=True)
    return t.reshape(da * db, da * db)


# ---------------------------------------------------------------------------
# moments and serialisation


def mean_photon_number(rho: np.ndarray) -> float:
    n = np.arange(rho.shape[0])
    return float(np.real(np.sum(n * np.diag(rho))))


def state_to_json(state: np.ndarray, modes: int = 1, kind: str | None = None) -> str:
    """Serialise a state to ``{dim, modes, kind, shape, re, im}`` (row-major).

    ``dim`` is the per-mode cutoff.  ``kind`` is ``"ket"`` or ``"dm"``; it is
    inferred except for a square 2-D array with ``modes=2``, which is taken
    to be a coefficient matrix unless ``kind="dm"`` is given.
    """
    state = np.asarray(state, dtype=complex)
    if kind is None:
        kind = "ket" if state.ndim == 1 or modes == 2 else "dm"
    if kind == "dm" and modes == 2:
        dim = two_mode_dims(state)[0]
    else:
        dim = state.shape[0]
    flat = state.reshape(-1)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "dim": int(dim),
        "modes": int(modes),
        "kind": kind,
        "shape": list(state.shape),
        "re": [float(v) for v in flat.real],
        "im": [float(v) for v in flat.imag],
    }
    return json.dumps(doc)


def state_from_json(text: str) -> np.ndarray:
    doc = json.loads(text)
    arr = np.asarray(doc["re"], dtype=float) + 1j * np.asarray(doc["im"], dtype=float)
    return arr.reshape(doc["shape"])
