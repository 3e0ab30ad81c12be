"""Pipelines: distillation curves, EPR variances, data-size extrapolation, bootstrap."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import entanglement as ent
from . import fock, gaussian
from . import subtraction as sub
from . import tomography as tomo
from .errors import CVDistillError

log = logging.getLogger(__name__)

SCHEMES = ("undistilled", "1photon", "2photon")
D_LIST = (1, 2, 4, 8, 16)
CURVE_COLUMNS = [
    "squeezing_db",
    "r",
    "scheme",
    "R",
    "eta_out",
    "E_N",
    "entropy",
    "var_xminus",
    "var_pplus",
    "success_prob",
]
_DB_PER_NEPER = 20 / math.log(10)


def db_to_r(db: float) -> float:
    """Squeezing parameter from ``dB = 10 log10(exp(-2 r))``; negative dB is squeezed."""
    return -float(db) / _DB_PER_NEPER


def r_to_db(r: float) -> float:
    return -float(r) * _DB_PER_NEPER


# ---------------------------------------------------------------------------
# states and figures of merit


def scheme_spec(scheme: str, R: float, eta_out: float = 1.0, eta_apd: float = 1.0) -> sub.SubtractionSpec:
    """Subtraction settings for a named scheme; ``R = 0`` means ideal annihilation."""
    if scheme not in SCHEMES:
        raise ValueError(f"scheme must be one of {SCHEMES}, got {scheme!r}")
    n_a, n_b = {"undistilled": (0, 0), "1photon": (1, 0), "2photon": (1, 1)}[scheme]
    ideal = scheme == "undistilled" or R == 0
    return sub.SubtractionSpec(
        n_a=n_a, n_b=n_b, R=R if R > 0 else 0.05, eta_apd=eta_apd, eta_out=eta_out, ideal=ideal
    )


def build_state(scheme: str, r: float, R: float = 0.0, eta_out: float = 1.0, eta_apd: float = 1.0, dim: int = fock.DEFAULT_DIM) -> sub.HeraldedState:
    return sub.heralded_subtract(r, scheme_spec(scheme, R, eta_out, eta_apd), dim)


def epr_variance(rho: np.ndarray, dims: tuple[int, int] | None = None, normalized: bool = False) -> tuple[float, float, float]:
    """``(Var(x_-), Var(p_+), product)``; ``normalized`` divides each by the vacuum 1/2."""
    v = gaussian.covariance_of(rho, dims)
    vx = (v[0, 0] + v[2, 2] - 2 * v[0, 2]) / 2
    vp = (v[1, 1] + v[3, 3] + 2 * v[1, 3]) / 2
    if normalized:
        vx, vp = 2 * vx, 2 * vp
    return float(vx), float(vp), float(vx * vp)


@dataclass
class CurvePoint:
    squeezing_db: float
    r: float
    scheme: str
    R: float
    eta_out: float
    E_N: float
    entropy: float | None
    var_xminus: float
    var_pplus: float
    success_prob: float

    def row(self) -> list:
        return [getattr(self, c) for c in CURVE_COLUMNS]


def curve_point(scheme: str, r: float, R: float, eta_out: float, dim: int, eta_apd: float = 1.0) -> CurvePoint:
    h = build_state(scheme, r, R, eta_out, eta_apd, dim)
    entropy = None
    if eta_out == 1 and h.spec.ideal:
        entropy = ent.state_entropy(h.state, (dim, dim))
    vx, vp, _ = epr_variance(h.state, (dim, dim))
    return CurvePoint(
        squeezing_db=r_to_db(r),
        r=float(r),
        scheme=scheme,
        R=float(R) if scheme != "undistilled" else 0.0,
        eta_out=float(eta_out),
        E_N=ent.log_negativity(h.state, (dim, dim)),
        entropy=entropy,
        var_xminus=vx,
        var_pplus=vp,
        success_prob=float(h.success_prob),
    )


def distillation_curve(
    scheme: str, R: float, eta_out: float, r_grid, dim: int = fock.DEFAULT_DIM, eta_apd: float = 1.0
) -> list[CurvePoint]:
    """One curve point per ``r``; truncation failures propagate."""
    return [curve_point(scheme, float(r), R, eta_out, dim, eta_apd) for r in r_grid]


def entropy_curve(r_grid, dim: int = fock.DEFAULT_DIM) -> list[dict]:
    """Entropy of entanglement of the three ideal states, numeric and closed form."""
    rows = []
    for r in r_grid:
        row = {"r": float(r), "squeezing_db": r_to_db(r)}
        for k, scheme in enumerate(SCHEMES):
            psi = sub.ideal_subtract(float(r), *((0, 0), (1, 0), (1, 1))[k], dim)
            row[f"E{k}"] = ent.entropy_of_entanglement(ent.schmidt(psi))
            row[f"E{k}_closed_form"] = ent.entropy_of_entanglement(ent.analytic_schmidt(k, float(r), dim))
        rows.append(row)
    return rows


def ideal_xminus_variance(scheme: str, r: float) -> float:
    """Closed-form ``Var(x_-)`` of the ideal lossless states.

    The "-" mode is ``a^n S(r)|0>``; in the squeezed frame this is
    ``|1>`` for one photon and ``-cosh r |0> + sqrt(2) sinh r |2>`` for two.
    """
    base = math.exp(-2 * r) / 2
    if scheme == "undistilled":
        return base
    if scheme == "1photon":
        return 3 * base
    c, s = math.cosh(r), math.sinh(r)
    norm = c * c + 2 * s * s
    return base * (1 + (8 * s * s - 4 * c * s) / norm)


@dataclass
class CrossoverScan:
    db: np.ndarray
    var_distilled: np.ndarray
    var_undistilled: np.ndarray
    crossover_db: float | None


def epr_crossover(
    R: float = 0.0, eta_out: float = 1.0, r_max: float = 0.8, step: float = 0.01, dim: int = 30, eta_apd: float = 1.0
) -> CrossoverScan:
    """Scan ``r`` in ``step`` increments and locate where two-photon subtraction
    stops improving ``Var(x_-)``, by linear interpolation of the difference."""
    rs = np.round(np.arange(step, r_max + step / 2, step), 10)
    v2 = np.array([epr_variance(build_state("2photon", r, R, eta_out, eta_apd, dim).state, (dim, dim))[0] for r in rs])
    v0 = np.array([epr_variance(build_state("undistilled", r, 0.0, eta_out, eta_apd, dim).state, (dim, dim))[0] for r in rs])
    diff = v2 - v0
    db = -np.array([r_to_db(r) for r in rs])
    cross = None
    idx = np.nonzero((diff[:-1] < 0) & (diff[1:] >= 0))[0]
    if len(idx):
        i = idx[0]
        cross = float(db[i] + (db[i + 1] - db[i]) * (-diff[i]) / (diff[i + 1] - diff[i]))
    return CrossoverScan(db=db, var_distilled=v2, var_undistilled=v0, crossover_db=cross)


# ---------------------------------------------------------------------------
# reconstruction statistics


def recombine(rho_minus: np.ndarray, rho_plus: np.ndarray) -> tuple[np.ndarray, tuple[int, int]]:
    """``B(pi/4) (rho_- (x) rho_+) B^dag`` in a box large enough to hold it exactly."""
    d = rho_minus.shape[0]
    out = 2 * d - 1
    u = fock.beamsplitter_matrix(sub.HALF, (d, d), (out, out))
    rho = u @ np.kron(rho_minus, rho_plus) @ u.conj().T
    return 0.5 * (rho + rho.conj().T), (out, out)


def reconstructed_negativity(plus: tomo.QuadratureDataset, minus: tomo.QuadratureDataset, dim: int, **mle) -> tuple[float, bool]:
    rm = tomo.mle_reconstruct(minus, dim, **mle)
    rp = tomo.mle_reconstruct(plus, dim, **mle)
    rho, dims = recombine(rm.rho, rp.rho)
    return ent.log_negativity(rho, dims), rm.converged and rp.converged


def stratified_partition(data: tomo.QuadratureDataset, d: int) -> list[np.ndarray]:
    """Index sets for ``d`` subsets, each taking an equal share of every phase."""
    chunks = [[] for _ in range(d)]
    for th in data.phases():
        idx = np.nonzero(data.theta == th)[0]
        for k, part in enumerate(np.array_split(idx, d)):
            chunks[k].append(part)
    return [np.concatenate(c) for c in chunks]


@dataclass
class ExtrapolationFit:
    a: float
    b: float
    points: list = field(default_factory=list)  # (N_d, mean E_N, std E_N)
    residual: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)


def fit_extrapolation(n, mean_en, stds=None) -> ExtrapolationFit:
    """Least-squares fit of ``E_N(N) = a + b / sqrt(N)``."""
    n = np.asarray(n, dtype=float)
    y = np.asarray(mean_en, dtype=float)
    design = np.column_stack([np.ones_like(n), 1 / np.sqrt(n)])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = float(np.linalg.norm(design @ coef - y))
    s = np.zeros_like(y) if stds is None else np.asarray(stds, dtype=float)
    fit = ExtrapolationFit(
        a=float(coef[0]),
        b=float(coef[1]),
        points=[[float(a), float(b), float(c)] for a, b, c in zip(n, y, s)],
        residual=resid,
    )
    if fit.b < 0:
        log.warning("negative noise coefficient b=%.3g", fit.b)
    return fit


@dataclass
class DatasizeStudy:
    fit: ExtrapolationFit
    true_en: float
    per_subset: dict  # d -> list of E_N


def negativity_vs_datasize(
    truth: np.ndarray,
    n_full: int,
    seed: int,
    phases=tomo.PHASES,
    d_list=D_LIST,
    dim: int = 14,
    dims: tuple[int, int] | None = None,
    **mle,
) -> DatasizeStudy:
    """Sample once, split into ``d`` stratified subsets, reconstruct each, fit.

    Subsets whose reconstruction does not converge are dropped and logged.
    """
    plus, minus = tomo.sample_plus_minus(truth, n_full, seed, phases, dims)
    per = {}
    ns, means, stds = [], [], []
    for d in d_list:
        vals = []
        for k, idx in enumerate(stratified_partition(plus, d)):
            en, ok = reconstructed_negativity(plus.subset(idx), minus.subset(idx), dim, **mle)
            if not ok:
                log.warning("subset %d of %d did not converge; dropped", k, d)
                continue
            vals.append(en)
        if not vals:
            continue
        per[d] = vals
        ns.append(n_full / d)
        means.append(float(np.mean(vals)))
        stds.append(float(np.std(vals, ddof=1)) if len(vals) > 1 else 0.0)
    if len(ns) < 2:
        raise CVDistillError("too few converged subsets to fit")
    return DatasizeStudy(
        fit=fit_extrapolation(ns, means, stds),
        true_en=ent.log_negativity(np.asarray(truth), dims),
        per_subset=per,
    )


def job_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([int(seed), int(index)]).generate_state(1, dtype=np.uint64)[0])


def bootstrap_uncertainty(
    truth: np.ndarray,
    n: int,
    resamples: int,
    seed: int,
    phases=tomo.PHASES,
    dim: int = 14,
    dims: tuple[int, int] | None = None,
    **mle,
) -> tuple[float, float, list[float]]:
    """Mean and standard deviation of reconstructed ``E_N`` over independent runs."""
    if resamples < 20:
        raise ValueError("need at least 20 resamples")
    vals = []
    for b in range(resamples):
        plus, minus = tomo.sample_plus_minus(truth, n, job_seed(seed, b), phases, dims)
        vals.append(reconstructed_negativity(plus, minus, dim, **mle)[0])
    return float(np.mean(vals)), float(np.std(vals, ddof=1)), vals


def gain_table(scheme: str, R: float, eta_out: float, dbs, dim: int = fock.DEFAULT_DIM) -> list[tuple[float, float, float]]:
    """``(dB, E_N distilled, E_N undistilled)`` for each initial squeezing."""
    out = []
    for db in dbs:
        r = db_to_r(-abs(db))
        d = curve_point(scheme, r, R, eta_out, dim).E_N
        u = curve_point("undistilled", r, 0.0, eta_out, dim).E_N
        out.append((float(db), d, u))
    return out
