"""Logarithmic negativity, Schmidt spectra and entropy of entanglement.

All logarithms are base 2 (ebits) unless ``base`` is passed explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import fock
from .errors import CVDistillError, TruncationError

NEG_FLOOR = 1e-10
ENTROPY_FLOOR = 1e-15


@dataclass(frozen=True)
class SchmidtSpectrum:
    coefficients: np.ndarray  # descending, sums to 1
    dim: int

    def __len__(self):
        return len(self.coefficients)


@dataclass(frozen=True)
class EntanglementReport:
    log_negativity: float
    entropy: float | None
    method: str


def partial_transpose(rho: np.ndarray, dims: tuple[int, int] | None = None, mode: str = "A") -> np.ndarray:
    da, db = fock.two_mode_dims(rho, dims)
    t = rho.reshape(da, db, da, db)
    if mode == "A":
        t = t.transpose(2, 1, 0, 3)
    else:
        t = t.transpose(0, 3, 2, 1)
    return t.reshape(da * db, da * db)


def log_negativity(
    rho: np.ndarray, dims: tuple[int, int] | None = None, base: float = 2.0
) -> float:
    """``log ||rho^T_A||_1 = log(1 + 2 |sum of negative eigenvalues|)``.

    Eigenvalues in ``(-1e-10, 0)`` are treated as numerical noise.
    """
    rho = np.asarray(rho, dtype=complex)
    if not fock.is_hermitian(rho, 1e-10):
        raise ValueError("density matrix is not Hermitian")
    w = np.linalg.eigvalsh(partial_transpose(rho, dims))
    neg = w[w < -NEG_FLOOR].sum()
    return float(math.log(1 - 2 * neg) / math.log(base))


def pure_log_negativity(state: np.ndarray, base: float = 2.0) -> float:
    """``2 log(sum_n sqrt(c_n))`` for a pure state given as a coefficient matrix."""
    s = np.linalg.svd(np.asarray(state), compute_uv=False)
    s = s / np.linalg.norm(s)
    return float(2 * math.log(np.sum(s)) / math.log(base))


def schmidt(state: np.ndarray) -> SchmidtSpectrum:
    """Schmidt coefficients (squared singular values, descending)."""
    state = np.asarray(state)
    s = np.linalg.svd(state, compute_uv=False) ** 2
    return SchmidtSpectrum(coefficients=s / s.sum(), dim=state.shape[0])


def entropy_of_entanglement(spectrum, base: float = 2.0) -> float:
    """``-sum c_n log c_n`` over a Schmidt spectrum."""
    c = np.asarray(getattr(spectrum, "coefficients", spectrum), dtype=float)
    c = c[c >= ENTROPY_FLOOR]
    return float(-np.sum(c * np.log(c)) / math.log(base))


def state_entropy(rho: np.ndarray, dims: tuple[int, int] | None = None, base: float = 2.0, tol: float = 1e-8) -> float:
    """Entropy of entanglement of a two-mode density matrix.

    Only defined for pure states; a mixed input raises, since negativity is
    the measure to use there.
    """
    purity = float(np.real(np.trace(rho @ rho)))
    if abs(1 - purity) > tol:
        raise CVDistillError(f"entropy of entanglement needs a pure state (purity {purity:.6g})")
    da, db = fock.two_mode_dims(rho, dims)
    w, v = np.linalg.eigh(rho)
    psi = v[:, -1].reshape(da, db)
    return entropy_of_entanglement(schmidt(psi), base)


def report(rho: np.ndarray, dims: tuple[int, int] | None = None, base: float = 2.0) -> EntanglementReport:
    en = log_negativity(rho, dims, base)
    try:
        e = state_entropy(rho, dims, base)
    except CVDistillError:
        e = None
    return EntanglementReport(log_negativity=en, entropy=e, method="fock")


# ---------------------------------------------------------------------------
# closed-form Schmidt machinery for |Psi_0>, |Psi_1>, |Psi_2>


def norm_one(r: float) -> float:
    """``<Psi_0| a_A^dag a_A |Psi_0> = sinh(r)^2 / 2``."""
    return math.sinh(r) ** 2 / 2


def norm_two(r: float) -> float:
    """``<Psi_0| a_A^dag a_B^dag a_B a_A |Psi_0>``."""
    return (2 * math.sinh(r) ** 4 + math.cosh(r) ** 2 * math.sinh(r) ** 2) / 4


def single_subtraction_matrix(r: float, dim: int) -> np.ndarray:
    """``A_mn = l^n (cosh(r/2) sqrt(n) d_{m,n-1} + sinh(r/2) sqrt(n+1) d_{m,n+1})``."""
    lp = math.tanh(r / 2)
    ch, sh = math.cosh(r / 2), math.sinh(r / 2)
    a = np.zeros((dim, dim))
    n = np.arange(dim)
    a[n[1:] - 1, n[1:]] = lp ** n[1:] * ch * np.sqrt(n[1:])
    a[n[:-1] + 1, n[:-1]] = lp ** n[:-1] * sh * np.sqrt(n[:-1] + 1)
    return a


def double_subtraction_matrix(r: float, dim: int) -> np.ndarray:
    """The four-term ``B_mn`` for the coincidence-subtracted state."""
    lp = math.tanh(r / 2)
    ch, sh = math.cosh(r / 2), math.sinh(r / 2)
    b = np.zeros((dim, dim))
    m = np.arange(dim, dtype=float)
    diag = ch**2 * (m + 1) * lp ** (m + 1)
    diag[1:] += sh**2 * m[1:] * lp ** (m[1:] - 1)
    b[np.arange(dim), np.arange(dim)] = diag
    up = np.arange(dim - 2)
    b[up, up + 2] = ch * sh * np.sqrt((up + 1.0) * (up + 2)) * lp ** (up + 1)
    down = np.arange(2, dim)
    b[down, down - 2] = ch * sh * np.sqrt(down * (down - 1.0)) * lp ** (down - 1.0)
    return b


def analytic_schmidt(kind: int, r: float, dim: int = fock.DEFAULT_DIM, tol: float = 1e-6) -> SchmidtSpectrum:
    """Closed-form Schmidt spectrum of ``|Psi_kind>``.

    ``kind=0`` is geometric, ``(1 - l^2) l^(2n)`` with ``l = tanh(r/2)``.
    Kinds 1 and 2 use the singular values of ``A_mn`` and ``B_mn`` scaled by
    ``(1 - l^2) / N_k``.
    """
    lp = math.tanh(r / 2)
    if kind == 0:
        c = (1 - lp**2) * lp ** (2 * np.arange(dim))
    elif kind in (1, 2):
        if r <= 0:
            raise ValueError("subtracted spectra need r > 0")
        if kind == 1:
            sv = np.linalg.svd(single_subtraction_matrix(r, dim), compute_uv=False)
            c = (1 - lp**2) / norm_one(r) * sv**2
        else:
            sv = np.linalg.svd(double_subtraction_matrix(r, dim), compute_uv=False)
            c = (1 - lp**2) / norm_two(r) * sv**2
    else:
        raise ValueError(f"kind must be 0, 1 or 2, got {kind}")
    c = np.sort(c)[::-1]
    total = float(c.sum())
    if total < 1 - tol:
        raise TruncationError(f"analytic spectrum sums to {total:.8f} at cutoff {dim}")
    return SchmidtSpectrum(coefficients=c, dim=dim)
