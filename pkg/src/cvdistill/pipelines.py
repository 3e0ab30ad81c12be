"""Named pipelines behind the command-line front end.

Each returns a :class:`RunResult` holding artifact texts keyed by file name,
plain data for optional figures, and summary rows for the terminal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import analysis as an
from . import entanglement as ent
from . import fock, gaussian
from . import subtraction as sub
from . import tomography as tomo
from . import wigner as wg
from .artifacts import config_comment, csv_with_header, dumps
from .config import RunConfig
from .errors import CVDistillError

DEFAULT_R = {"undistilled": 0.0, "1photon": 0.05, "2photon": 0.10}


@dataclass
class RunResult:
    artifacts: dict = field(default_factory=dict)  # file name -> text
    figures: dict = field(default_factory=dict)  # figure name -> plotting data
    summary: list = field(default_factory=list)  # (label, value) pairs
    ok: bool = True


def _doc(cfg: RunConfig, pipeline: str, body: dict) -> str:
    return dumps({"schema_version": fock.SCHEMA_VERSION, "pipeline": pipeline, "config": cfg.resolved(), **body})


def _csv(cfg: RunConfig, columns, rows) -> str:
    return csv_with_header(list(columns), rows, cfg.resolved())


def _db_grid(cfg: RunConfig) -> np.ndarray:
    g = cfg.grid
    return np.linspace(g.db_min, g.db_max, g.points)


def _tap(cfg: RunConfig, scheme: str, wigner_default: bool = False) -> float:
    if cfg.physics.R is not None:
        return float(cfg.physics.R)
    return 0.0 if wigner_default else DEFAULT_R[scheme]


def run_curve(cfg: RunConfig) -> RunResult:
    """Negativity versus initial squeezing for one scheme plus the undistilled reference."""
    p = cfg.physics
    rs = [an.db_to_r(db) for db in _db_grid(cfg)]
    res = RunResult()
    schemes = [p.scheme] if p.scheme == "undistilled" else ["undistilled", p.scheme]
    points = []
    for scheme in schemes:
        R = _tap(cfg, scheme)
        points += an.distillation_curve(scheme, R, p.eta_out, rs, cfg.cutoff(), p.eta_apd)
    res.artifacts[f"curve_{p.scheme}.csv"] = _csv(cfg, an.CURVE_COLUMNS, [pt.row() for pt in points])
    res.figures["curve"] = {
        s: ([-pt.squeezing_db for pt in points if pt.scheme == s], [pt.E_N for pt in points if pt.scheme == s])
        for s in schemes
    }
    ref = {round(pt.r, 12): pt.E_N for pt in points if pt.scheme == "undistilled"}
    if p.scheme != "undistilled":
        gains = [pt.E_N - ref[round(pt.r, 12)] for pt in points if pt.scheme == p.scheme]
        res.summary += [("min E_N gain", min(gains)), ("max E_N gain", max(gains))]
    res.summary.append(("points", len(points)))
    return res


def run_entropy_curve(cfg: RunConfig) -> RunResult:
    rs = [an.db_to_r(db) for db in _db_grid(cfg)]
    rows = an.entropy_curve(rs, cfg.cutoff())
    cols = list(rows[0].keys())
    res = RunResult()
    res.artifacts["entropy_curve.csv"] = _csv(cfg, cols, [[row[c] for c in cols] for row in rows])
    res.figures["entropy"] = {f"E{k}": ([row["r"] for row in rows], [row[f"E{k}"] for row in rows]) for k in range(3)}
    res.summary.append(("max |numeric - closed form|", max(abs(row[f"E{k}"] - row[f"E{k}_closed_form"]) for row in rows for k in range(3))))
    return res


def run_epr(cfg: RunConfig) -> RunResult:
    """``Var(x_-)`` of the three schemes and the two-photon crossover."""
    p = cfg.physics
    res = RunResult()
    rows = []
    rs = [an.db_to_r(db) for db in _db_grid(cfg)]
    for scheme in an.SCHEMES:
        R = _tap(cfg, scheme)
        for pt in an.distillation_curve(scheme, R, p.eta_out, rs, cfg.cutoff(), p.eta_apd):
            rows.append([pt.squeezing_db, pt.r, scheme, pt.R, pt.eta_out, pt.var_xminus, pt.var_pplus, pt.var_xminus * pt.var_pplus])
    cols = ["squeezing_db", "r", "scheme", "R", "eta_out", "var_xminus", "var_pplus", "epr_product"]
    res.artifacts["epr.csv"] = _csv(cfg, cols, rows)
    r_max = max(rs)
    scan_ideal = an.epr_crossover(0.0, 1.0, r_max, cfg.grid.step_r, max(cfg.cutoff(), 30))
    scan_model = an.epr_crossover(_tap(cfg, "2photon"), p.eta_out, r_max, cfg.grid.step_r, cfg.cutoff(), p.eta_apd)
    body = {
        "crossover_db_ideal": scan_ideal.crossover_db,
        "crossover_db_model": scan_model.crossover_db,
        "crossover_db_closed_form": -an.r_to_db(math.atanh(0.5)),
        "scan_step_r": cfg.grid.step_r,
    }
    res.artifacts["epr_crossover.json"] = _doc(cfg, "epr", body)
    res.figures["epr"] = {
        s: ([-row[0] for row in rows if row[2] == s], [2 * row[5] for row in rows if row[2] == s]) for s in an.SCHEMES
    }
    res.summary += [("crossover dB (ideal)", body["crossover_db_ideal"]), ("crossover dB (model)", body["crossover_db_model"])]
    return res


def _state(cfg: RunConfig, scheme: str, R: float) -> np.ndarray:
    p = cfg.physics
    return an.build_state(scheme, cfg.squeezing_r(), R, p.eta_out, p.eta_apd, cfg.cutoff()).state


def run_wigner(cfg: RunConfig) -> RunResult:
    """Wigner grid of the "-" (or "+") mode; lossless ideal subtraction by default."""
    p, w = cfg.physics, cfg.wigner
    R = _tap(cfg, p.scheme, wigner_default=True)
    rho = _state(cfg, p.scheme, R)
    minus, plus = wg.plus_minus_modes_dm(rho, (cfg.cutoff(), cfg.cutoff()))
    single = minus if w.mode == "minus" else plus
    g = wg.grid(single, w.half_width, w.points)
    res = RunResult()
    stem = f"wigner_{p.scheme}_{w.mode}"
    res.artifacts[stem + ".csv"] = config_comment(cfg.resolved()) + g.to_csv()
    g.meta = {"config": cfg.resolved(), "mode": w.mode}
    res.artifacts[stem + ".json"] = g.to_json()
    res.figures["wigner"] = (g.x, g.p, g.values)
    i, j = np.unravel_index(np.argmin(g.values), g.values.shape)
    res.summary += [
        ("W(0,0)", wg.wigner_point(single, 0.0, 0.0)),
        ("min W", float(g.values[i, j])),
        ("argmin (x, p)", (float(g.x[j]), float(g.p[i]))),
        ("integral", g.integral()),
    ]
    return res


def _reconstruct(cfg: RunConfig, data: tomo.QuadratureDataset) -> tomo.ReconstructionResult:
    a = cfg.analysis
    return tomo.mle_reconstruct(data, cfg.sampling.D_rec, a.max_iter, a.tol)


def run_tomo_sim(cfg: RunConfig) -> RunResult:
    """Sample equal-phase homodyne data, rotate to +/-, reconstruct each mode."""
    p, s = cfg.physics, cfg.sampling
    R = _tap(cfg, p.scheme)
    rho = _state(cfg, p.scheme, R)
    dims = (cfg.cutoff(), cfg.cutoff())
    true_minus, true_plus = wg.plus_minus_modes_dm(rho, dims)
    factors = (true_minus, true_plus) if s.method == "factorized" else None
    plus, minus = tomo.sample_plus_minus(rho, s.N, s.seed, s.phases, dims, s.method, factors)
    desc = {"scheme": p.scheme, "r": cfg.squeezing_r(), "R": R, "eta_out": p.eta_out, "eta_apd": p.eta_apd}
    rec, rhos = {}, {}
    res = RunResult()
    for label, data, truth in (("minus", minus, true_minus), ("plus", plus, true_plus)):
        data.meta = dict(desc, mode=data.mode)
        side = dict(data.sidecar(), config=cfg.resolved(), schema_version=fock.SCHEMA_VERSION)
        res.artifacts[f"samples_{label}.csv"] = data.to_csv()
        res.artifacts[f"samples_{label}.csv.json"] = dumps(side)
        r = _reconstruct(cfg, data)
        rhos[label] = r.rho
        rec[label] = {
            "fidelity_with_truth": fock.fidelity(r.rho, _crop(truth, s.D_rec)),
            "iterations": r.iterations,
            "log_likelihood": r.log_likelihood,
            "converged": r.converged,
            "rho_re": r.rho.real.tolist(),
            "rho_im": r.rho.imag.tolist(),
        }
    two, tdims = an.recombine(rhos["minus"], rhos["plus"])
    body = {
        "reconstruction": rec,
        "vacuum_fidelity_plus": fock.fidelity(rhos["plus"], fock.ket2dm(fock.vacuum(s.D_rec))),
        "E_N_reconstructed": ent.log_negativity(two, tdims),
        "E_N_truth": ent.log_negativity(rho, dims),
        "rng": tomo.RNG_NAME,
    }
    res.artifacts["tomography.json"] = _doc(cfg, "tomo-sim", body)
    res.ok = rec["minus"]["converged"] and rec["plus"]["converged"]
    res.figures["tomography"] = {"minus": minus.x, "plus": plus.x}
    res.summary += [
        ("fidelity minus", rec["minus"]["fidelity_with_truth"]),
        ("fidelity plus", rec["plus"]["fidelity_with_truth"]),
        ("vacuum fidelity plus", body["vacuum_fidelity_plus"]),
        ("E_N reconstructed", body["E_N_reconstructed"]),
        ("E_N truth", body["E_N_truth"]),
    ]
    return res


def _crop(rho: np.ndarray, d: int) -> np.ndarray:
    out = rho[:d, :d]
    return out / np.trace(out).real


def run_extrapolate(cfg: RunConfig) -> RunResult:
    """Data-size scaling of reconstructed negativity and its ``a + b/sqrt(N)`` fit."""
    p, s, a = cfg.physics, cfg.sampling, cfg.analysis
    R = _tap(cfg, p.scheme)
    rho = _state(cfg, p.scheme, R)
    dims = (cfg.cutoff(), cfg.cutoff())
    study = an.negativity_vs_datasize(
        rho, s.N, s.seed, s.phases, a.d_list, s.D_rec, dims, max_iter=a.max_iter, tol=a.tol
    )
    body = dict(study.fit.to_dict(), true_E_N=study.true_en, relative_error=study.fit.a / study.true_en - 1)
    body["per_subset"] = {str(k): v for k, v in study.per_subset.items()}
    if a.B_resamples:
        mean, std, _ = an.bootstrap_uncertainty(
            rho, s.N, a.B_resamples, s.seed, s.phases, s.D_rec, dims, max_iter=a.max_iter, tol=a.tol
        )
        body["bootstrap"] = {"mean": mean, "std": std, "resamples": a.B_resamples}
    res = RunResult()
    res.artifacts["extrapolation.json"] = _doc(cfg, "extrapolate", body)
    res.artifacts["extrapolation_points.csv"] = _csv(cfg, ["N_d", "mean_E_N", "std_E_N"], study.fit.points)
    res.figures["extrapolation"] = (study.fit.points, study.fit.a, study.fit.b, study.true_en)
    res.summary += [("a", study.fit.a), ("b", study.fit.b), ("true E_N", study.true_en), ("relative error", body["relative_error"])]
    return res


# ---------------------------------------------------------------------------
# invariant suite


def _check_local_equivalence():
    worst = 1.0
    for r in (0.2, 0.4, 0.8):
        psi = sub.hssv(r, 25)
        out = fock.apply_local_squeezing(psi, -r / 2, -r / 2)
        worst = min(worst, fock.state_fidelity(out, fock.two_mode_squeezed_vacuum(math.tanh(r / 2), 25)))
    return worst >= 0.9999, worst


def _check_model_equivalence():
    worst = 0.0
    for pattern in sub.PATTERNS:
        rep = sub.verify_model_equivalence(0.4, 0.1, pattern, 20)
        worst = max(worst, 1 - rep.fidelity, abs(rep.prob_split_first - rep.prob_tap_first))
    return worst <= 1e-9, worst


def _check_negativity_closed_form():
    r = 0.4
    err = abs(ent.log_negativity(fock.ket2dm(sub.hssv(r, 25).ravel()), (25, 25)) - r / math.log(2))
    return err <= 1e-6, err


def _check_schmidt():
    worst = 0.0
    for k, (na, nb) in enumerate(((0, 0), (1, 0), (1, 1))):
        num = ent.schmidt(sub.ideal_subtract(0.5, na, nb, 30)).coefficients
        ana = ent.analytic_schmidt(k, 0.5, 30).coefficients
        worst = max(worst, float(np.max(np.abs(num - ana))))
    return worst <= 1e-8, worst


def _check_parity():
    psi = sub.subtracted_squeezed_vacuum(0.368, 1, 30)
    err = abs(wg.wigner_point(psi, 0, 0) + 1 / math.pi)
    return err <= 1e-8, err


def _check_covariance():
    r = 0.4
    v = gaussian.covariance_of(fock.ket2dm(sub.hssv(r, 25).ravel()), (25, 25))
    err = float(np.max(np.abs(v - gaussian.hssv_covariance(r))))
    return err <= 1e-8, err


def _check_db():
    err = max(abs(an.r_to_db(an.db_to_r(db)) - db) for db in np.linspace(-10, 0, 41))
    return err <= 1e-12, err


def _check_single_photon_epr():
    worst = min(
        an.epr_variance(an.build_state("1photon", r, 0.0, dim=30).state, (30, 30))[0]
        - an.epr_variance(an.build_state("undistilled", r, 0.0, dim=30).state, (30, 30))[0]
        for r in (0.05, 0.3, 0.6)
    )
    return worst >= 0, worst


def _check_tomography_pdf():
    x = np.linspace(-10, 10, 4001)
    psi = fock.squeezed_vacuum(0.368, 30)
    err = abs(np.trapezoid(tomo.quadrature_pdf(psi, 0.4, x), x) - 1)
    return err <= 1e-6, err


CHECKS = {
    "local_unitary_equivalence": _check_local_equivalence,
    "model_equivalence": _check_model_equivalence,
    "negativity_closed_form": _check_negativity_closed_form,
    "schmidt_closed_form": _check_schmidt,
    "wigner_parity": _check_parity,
    "covariance_closed_form": _check_covariance,
    "db_round_trip": _check_db,
    "single_photon_epr": _check_single_photon_epr,
    "quadrature_pdf_normalized": _check_tomography_pdf,
}


def run_verify(cfg: RunConfig) -> RunResult:
    res = RunResult()
    results = {}
    for name, fn in CHECKS.items():
        try:
            ok, value = fn()
        except CVDistillError as exc:
            ok, value = False, f"{type(exc).__name__}: {exc}"
        results[name] = {"passed": bool(ok), "value": value}
        res.summary.append((name, "PASS" if ok else "FAIL"))
    res.ok = all(r["passed"] for r in results.values())
    res.artifacts["verify.json"] = _doc(cfg, "verify", {"checks": results, "all_passed": res.ok})
    return res


PIPELINE_FUNCS = {
    "curve": run_curve,
    "entropy-curve": run_entropy_curve,
    "epr": run_epr,
    "wigner": run_wigner,
    "tomo-sim": run_tomo_sim,
    "extrapolate": run_extrapolate,
    "verify": run_verify,
}
