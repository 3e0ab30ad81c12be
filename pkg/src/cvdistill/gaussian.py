"""Second moments and closed-form Gaussian covariance matrices.

Ordering is ``(x_A, p_A, x_B, p_B)``; entries are symmetrised moments
``<{dO_i, dO_j}>/2`` so the vacuum is ``I/2``.
"""

from __future__ import annotations

import io
import math

import numpy as np

from . import fock
from .errors import DisplacementError

OMEGA = np.kron(np.eye(2), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def ladder_moments(rho: np.ndarray, dims: tuple[int, int] | None = None) -> dict[str, complex]:
    """``<a>, <a^2>, <a^dag a>`` per mode and ``<ab>, <a^dag b>`` across modes.

    Only lowering actions enter, so the values are exact on the truncated box.
    """
    da, db = fock.two_mode_dims(rho, dims)
    t = np.asarray(rho, dtype=complex).reshape(da, db, da, db)
    ra = np.einsum("ijkj->ik", t)
    rb = np.einsum("ijil->jl", t)
    a, b = fock.destroy(da), fock.destroy(db)
    out = {}
    for name, r, op in (("a", ra, a), ("b", rb, b)):
        out[name] = np.trace(r @ op)
        out[name + "2"] = np.trace(r @ op @ op)
        out["n" + name] = np.trace(r @ op.T @ op)
    # tr(rho (a (x) b)) and tr(rho (a^dag (x) b))
    out["ab"] = np.einsum("ijkl,ki,lj->", t, a, b, optimize=True)
    out["adb"] = np.einsum("ijkl,ki,lj->", t, a.T, b, optimize=True)
    return out


def covariance_of(rho: np.ndarray, dims: tuple[int, int] | None = None, atol: float = 1e-8) -> np.ndarray:
    """Covariance matrix of a centred two-mode density matrix.

    Raises :class:`DisplacementError` if any first moment exceeds ``atol``.
    """
    m = ladder_moments(rho, dims)
    first = math.sqrt(2) * np.array([m["a"].real, m["a"].imag, m["b"].real, m["b"].imag])
    if np.max(np.abs(first)) > atol:
        raise DisplacementError(f"state has nonzero first moments {first}")
    v = np.empty((4, 4))
    for i, k in ((0, "a"), (2, "b")):
        sq, n = m[k + "2"], m["n" + k].real
        v[i, i] = sq.real + n + 0.5
        v[i + 1, i + 1] = -sq.real + n + 0.5
        v[i, i + 1] = v[i + 1, i] = sq.imag
    ab, adb = m["ab"], m["adb"]
    v[0, 2] = v[2, 0] = ab.real + adb.real
    v[0, 3] = v[3, 0] = ab.imag + adb.imag
    v[1, 2] = v[2, 1] = ab.imag - adb.imag
    v[1, 3] = v[3, 1] = -ab.real + adb.real
    return v - np.outer(first, first)


def single_mode_variance(rho: np.ndarray, theta: float = 0.0) -> float:
    """Variance of ``x_theta = x cos(theta) + p sin(theta)`` for one mode."""
    d = rho.shape[0]
    big = np.zeros((d + 2, d + 2), dtype=complex)
    big[:d, :d] = rho
    x, p = fock.quadratures(d + 2)
    q = math.cos(theta) * x + math.sin(theta) * p
    m1 = np.trace(big @ q).real
    return float(np.trace(big @ q @ q).real - m1**2)


def hssv_covariance(r: float) -> np.ndarray:
    """Covariance of the half-split squeezed vacuum ``B(pi/4) S_A(r)|0,0>``."""
    if abs(r) >= 5:
        raise ValueError(f"|r| must be below 5, got {r}")
    em, ep = math.exp(-r), math.exp(r)
    c, s = math.cosh(r), math.sinh(r)
    return 0.5 * np.array(
        [
            [em * c, 0, em * s, 0],
            [0, ep * c, 0, -ep * s],
            [em * s, 0, em * c, 0],
            [0, -ep * s, 0, ep * c],
        ]
    )


def tmsv_covariance(s: float) -> np.ndarray:
    """Covariance of the two-mode squeezed vacuum with squeezing ``s``.

    ``tmsv_covariance(r / 2)`` has diagonal ``cosh(r)/2``.
    """
    if abs(s) >= 5:
        raise ValueError(f"|s| must be below 5, got {s}")
    c, sh = math.cosh(2 * s), math.sinh(2 * s)
    return 0.5 * np.array(
        [
            [c, 0, sh, 0],
            [0, c, 0, -sh],
            [sh, 0, c, 0],
            [0, -sh, 0, c],
        ]
    )


def local_squeeze_cov(v: np.ndarray, r_a: float, r_b: float) -> np.ndarray:
    """Congruence by ``S_A(r_a) (+) S_B(r_b)``; positive ``r`` squeezes ``x``."""
    s = np.diag([math.exp(-r_a), math.exp(r_a), math.exp(-r_b), math.exp(r_b)])
    return s @ v @ s.T


def symplectic_eigenvalues(v: np.ndarray) -> np.ndarray:
    """Symplectic eigenvalues (ascending) of a 2n x 2n covariance matrix."""
    n = v.shape[0] // 2
    omega = np.kron(np.eye(n), np.array([[0.0, 1.0], [-1.0, 0.0]]))
    ev = np.abs(np.linalg.eigvals(1j * omega @ v))
    return np.sort(ev)[::2]


def partial_transpose_cov(v: np.ndarray) -> np.ndarray:
    """Partial transposition of mode B: ``p_B -> -p_B``."""
    f = np.diag([1.0, 1.0, 1.0, -1.0])
    return f @ v @ f


def gaussian_log_negativity(v: np.ndarray, base: float = 2.0) -> float:
    """``-log(2 nu_-)`` of the partially transposed covariance, floored at zero."""
    nu = symplectic_eigenvalues(partial_transpose_cov(v))[0]
    if nu >= 0.5:
        return 0.0
    return float(-math.log(2 * nu) / math.log(base))


def is_physical(v: np.ndarray, tol: float = 1e-8) -> bool:
    """Symmetric and obeying ``V + i Omega / 2 >= 0``."""
    if not np.allclose(v, v.T, atol=1e-10):
        return False
    w = np.linalg.eigvalsh(v + 0.5j * OMEGA)
    return bool(w.min() >= -tol)


def covariance_to_csv(v: np.ndarray) -> str:
    buf = io.StringIO()
    for row in np.asarray(v, dtype=float):
        buf.write(",".join(f"{x:.17g}" for x in row) + "\n")
    return buf.getvalue()


def covariance_from_csv(text: str) -> np.ndarray:
    rows = [[float(x) for x in line.split(",")] for line in text.strip().splitlines()]
    v = np.array(rows)
    if v.shape != (4, 4):
        raise ValueError(f"expected a 4x4 matrix, got {v.shape}")
    return v
