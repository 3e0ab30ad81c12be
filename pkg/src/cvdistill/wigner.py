"""Wigner functions of single-mode states and the factorized two-mode form.

Convention: ``x = (a + a^dag)/sqrt(2)``, so the vacuum is
``exp(-(x^2 + p^2)) / pi`` and every Wigner function integrates to one.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import eval_genlaguerre, gammaln

from . import fock
from .subtraction import HALF

GRID_HALF_WIDTH = 5.0
GRID_POINTS = 201


@dataclass
class WignerGrid:
    x: np.ndarray
    p: np.ndarray
    values: np.ndarray  # values[i, j] = W(x[j], p[i])
    meta: dict = field(default_factory=dict)

    def integral(self) -> float:
        dx, dp = self.x[1] - self.x[0], self.p[1] - self.p[0]
        return float(np.trapezoid(np.trapezoid(self.values, dx=dx, axis=1), dx=dp))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("p\\x," + ",".join(f"{v:.17g}" for v in self.x) + "\n")
        for pi, row in zip(self.p, self.values):
            buf.write(f"{pi:.17g}," + ",".join(f"{v:.17g}" for v in row) + "\n")
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {
            "schema_version": fock.SCHEMA_VERSION,
            "normalization": "integral=1",
            "x": self.x.tolist(),
            "p": self.p.tolist(),
            "values": self.values.ravel().tolist(),
            "meta": self.meta,
        }
        return json.dumps(doc, sort_keys=True)

    @classmethod
    def from_csv(cls, text: str) -> "WignerGrid":
        lines = [ln for ln in text.strip().splitlines() if not ln.startswith("#")]
        x = np.array([float(v) for v in lines[0].split(",")[1:]])
        rows = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
        return cls(x=x, p=rows[:, 0], values=rows[:, 1:])


def _as_dm(rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    return np.outer(rho, rho.conj()) if rho.ndim == 1 else rho


def wigner(rho: np.ndarray, x, p) -> np.ndarray:
    """Wigner function on broadcast arrays ``x, p`` by the Fock-basis recursion.

    The basis functions ``W_{|m><n|}`` are built by a stable three-term
    recursion in ``alpha = (x + ip)/sqrt(2)``; no factorials are formed.
    """
    rho = _as_dm(rho)
    x, p = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(p, dtype=float))
    a = (x + 1j * p) / math.sqrt(2)
    d = rho.shape[0]
    # w[n] holds W_{|m><n|} for the current row m (n >= m)
    w = [np.exp(-2 * np.abs(a) ** 2) / math.pi]
    for n in range(1, d):
        w.append(2 * a * w[n - 1] / math.sqrt(n))
    out = rho[0, 0].real * w[0].real
    for n in range(1, d):
        out = out + 2 * np.real(rho[0, n] * w[n])
    for m in range(1, d):
        prev = w[m]
        w[m] = (2 * np.conj(a) * prev - math.sqrt(m) * w[m - 1]) / math.sqrt(m)
        out = out + rho[m, m].real * w[m].real
        for n in range(m + 1, d):
            nxt = (2 * a * w[n - 1] - math.sqrt(m) * prev) / math.sqrt(n)
            prev = w[n]
            w[n] = nxt
            out = out + 2 * np.real(rho[m, n] * w[n])
    return np.asarray(out.real)


def wigner_point(rho: np.ndarray, x: float, p: float) -> float:
    return float(wigner(rho, x, p))


def parity_value(rho: np.ndarray) -> float:
    """``W(0,0) = sum_n (-1)^n rho_nn / pi``."""
    rho = _as_dm(rho)
    n = np.arange(rho.shape[0])
    return float(np.sum((-1.0) ** n * np.real(np.diag(rho))) / math.pi)


def laguerre_basis(d: int, x, p) -> np.ndarray:
    """``W_{|m><n|}(x, p)`` for all ``m, n < d`` from the closed Laguerre form.

    Returned array has shape ``(d, d) + shape(x)``. Slower than
    :func:`wigner` but independent of its recursion.
    """
    x, p = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(p, dtype=float))
    a = (x + 1j * p) / math.sqrt(2)
    r2 = 4 * np.abs(a) ** 2
    g = np.exp(-r2 / 2) / math.pi
    out = np.empty((d, d) + x.shape, dtype=complex)
    for m in range(d):
        for n in range(m, d):
            k = n - m
            pref = (-1.0) ** m * math.exp(0.5 * (gammaln(m + 1) - gammaln(n + 1)))
            val = pref * (2 * a) ** k * eval_genlaguerre(m, k, r2) * g
            out[m, n] = val
            out[n, m] = np.conj(val)
    return out


def wigner_laguerre(rho: np.ndarray, x, p) -> np.ndarray:
    rho = _as_dm(rho)
    basis = laguerre_basis(rho.shape[0], x, p)
    # rho = sum rho_nm |n><m|
    return np.real(np.tensordot(rho, basis, axes=([0, 1], [0, 1])))


def two_mode_wigner(rho: np.ndarray, points: np.ndarray, dims: tuple[int, int] | None = None) -> np.ndarray:
    """Brute-force Wigner function of a two-mode state at ``(x_A, p_A, x_B, p_B)`` rows."""
    rho = _as_dm(rho)
    da, db = fock.two_mode_dims(rho, dims)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    wa = laguerre_basis(da, pts[:, 0], pts[:, 1])
    wb = laguerre_basis(db, pts[:, 2], pts[:, 3])
    t = rho.reshape(da, db, da, db)
    return np.real(np.einsum("acbd,abk,cdk->k", t, wa, wb, optimize=True))


def to_plus_minus(points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Rotate ``(x_A, p_A, x_B, p_B)`` rows to ``(x_-, p_-)`` and ``(x_+, p_+)``."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    minus = (pts[:, 0:2] - pts[:, 2:4]) / math.sqrt(2)
    plus = (pts[:, 0:2] + pts[:, 2:4]) / math.sqrt(2)
    return minus, plus


def factorized_two_mode_wigner(rho_minus: np.ndarray, rho_plus: np.ndarray, points: np.ndarray) -> np.ndarray:
    """``W_-(x_-, p_-) W_+(x_+, p_+)`` with ``x_pm = (x_A pm x_B)/sqrt(2)``."""
    minus, plus = to_plus_minus(points)
    return wigner(rho_minus, minus[:, 0], minus[:, 1]) * wigner(rho_plus, plus[:, 0], plus[:, 1])


def plus_minus_modes(psi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Undo the 50:50 splitter on a pure coefficient matrix; return ``(rho_minus, rho_plus)``.

    ``B(-pi/4)`` maps the output pair back to the inputs; the "-" mode is the
    one that carried the squeezed light.
    """
    psi = np.asarray(psi, dtype=complex)
    out, _ = fock.beamsplitter_tensor(psi, -HALF, (0, 1), psi.shape)
    return out @ out.conj().T, (out.T @ out.conj())


def plus_minus_modes_dm(rho: np.ndarray, dims: tuple[int, int] | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Density-matrix version of :func:`plus_minus_modes`."""
    da, db = fock.two_mode_dims(rho, dims)
    u = fock.beamsplitter_matrix(-HALF, (da, db), (da, db))
    rho = u @ rho @ u.conj().T
    return fock.partial_trace(rho, 0, (da, db)), fock.partial_trace(rho, 1, (da, db))


def grid(rho: np.ndarray, half_width: float = GRID_HALF_WIDTH, points: int = GRID_POINTS) -> WignerGrid:
    axis = np.linspace(-half_width, half_width, points)
    xx, pp = np.meshgrid(axis, axis)
    return WignerGrid(x=axis, p=axis.copy(), values=wigner(rho, xx, pp))
