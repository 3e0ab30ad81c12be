"""One check per acceptance criterion; each prints a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` (lines appear in the
summary section) or ``python tests/test_acceptance.py``.
"""

import math
import os
import shutil
import time

import numpy as np
import pytest

from cvdistill import analysis as an
from cvdistill import cli
from cvdistill import entanglement as ent
from cvdistill import fock
from cvdistill import subtraction as sub
from cvdistill import tomography as tomo
from cvdistill import wigner as wg

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # run as a script
    ACCEPTANCE_LINES = []

LOG2E = 1 / math.log(2)


def report(n: int, ok: bool, text: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {n:>2}: {text}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_01_local_unitary_equivalence():
    t0 = time.perf_counter()
    fids = {}
    for r in (0.2, 0.4, 0.8):
        psi = sub.hssv(r, 25)
        out = fock.apply_local_squeezing(psi, -r / 2, -r / 2)
        fids[r] = fock.state_fidelity(out, fock.two_mode_squeezed_vacuum(math.tanh(r / 2), 25))
    dt = time.perf_counter() - t0
    ok = min(fids.values()) >= 0.9999 and dt < 1.0
    report(1, ok, f"S_A(-r/2)S_B(-r/2)|Psi0> vs TMSV, min fidelity {min(fids.values()):.10f} (>= 0.9999), {dt:.3f} s (< 1 s)")


def test_02_model_equivalence():
    t0 = time.perf_counter()
    worst_f = worst_p = 0.0
    for r in (0.4, 0.8):
        for R in (0.05, 0.1, 0.2):
            for pattern in sub.PATTERNS:
                rep = sub.verify_model_equivalence(r, R, pattern, 20)
                worst_f = max(worst_f, abs(1 - rep.fidelity))
                worst_p = max(worst_p, abs(rep.prob_split_first - rep.prob_tap_first))
    dt = time.perf_counter() - t0
    ok = worst_f <= 1e-9 and worst_p <= 1e-9 and dt < 10
    report(2, ok, f"split-then-tap vs tap-then-split, max |1-F| {worst_f:.2e}, max |dP| {worst_p:.2e} (<= 1e-9), {dt:.2f} s (< 10 s)")


def test_03_negativity_closed_form():
    errs = {}
    for r in np.round(np.arange(0.1, 0.81, 0.1), 10):
        rho = fock.ket2dm(sub.hssv(r, 25).ravel())
        errs[r] = abs(ent.log_negativity(rho, (25, 25)) - r * LOG2E)
    worst = max(errs, key=errs.get)
    ok = errs[worst] <= 1e-6
    report(3, ok, f"E_N(Psi0) = r log2(e) at D=25 for r <= 0.8, max error {errs[worst]:.2e} at r={worst} (<= 1e-6)")


def test_04_analytic_schmidt():
    d = 60
    worst = 0.0
    for k, (na, nb) in enumerate(((0, 0), (1, 0), (1, 1))):
        for r in (0.2, 0.5, 1.0):
            num = ent.schmidt(sub.ideal_subtract(r, na, nb, d)).coefficients
            ana = ent.analytic_schmidt(k, r, d).coefficients
            worst = max(worst, float(np.max(np.abs(num - ana))))
    norm_err = 0.0
    for r in (0.2, 0.5, 1.0):
        norm_err = max(
            norm_err,
            abs(sub.herald_weight(r, 1, 0, d) - math.sinh(r) ** 2 / 2),
            abs(sub.herald_weight(r, 1, 1, d) - (2 * math.sinh(r) ** 4 + math.cosh(r) ** 2 * math.sinh(r) ** 2) / 4),
        )
    ok = worst <= 1e-8 and norm_err <= 1e-8
    report(4, ok, f"analytic vs SVD Schmidt spectra max error {worst:.2e}; N1, N2 vs herald weights {norm_err:.2e} (<= 1e-8)")


def test_05_entropy_ordering():
    d = 60
    rs = np.linspace(0.05, 1.0, 20)
    ordered = True
    for r in rs:
        e0, e1, e2 = (ent.entropy_of_entanglement(ent.schmidt(sub.ideal_subtract(r, *p, d))) for p in ((0, 0), (1, 0), (1, 1)))
        ordered &= e2 > e1 > e0
    e1_small = ent.entropy_of_entanglement(ent.schmidt(sub.ideal_subtract(0.01, 1, 0, 20)))
    ok = bool(ordered) and abs(e1_small - 1) <= 0.01
    report(5, ok, f"E(Psi2) > E(Psi1) > E(Psi0) on 20 points in (0, 1]: {bool(ordered)}; E(Psi1, r=0.01) = {e1_small:.6f} (1 +- 0.01)")


def test_06_distillation_gain():
    dbs = np.linspace(1, 5, 9)
    gains = {}
    for scheme, R in (("1photon", 0.05), ("2photon", 0.10)):
        gains[(scheme, 1.0)] = [d - u for _, d, u in an.gain_table(scheme, R, 1.0, dbs, 20)]
        gains[(scheme, 0.85)] = [d - u for _, d, u in an.gain_table(scheme, R, 0.85, dbs[(dbs >= 2) & (dbs <= 4)], 20)]
    lo = min(min(g) for g in gains.values())
    ok = lo > 0
    report(6, ok, f"E_N gain over undistilled, lossless 1-5 dB and eta_out=0.85 2-4 dB, smallest gain {lo:.4f} (> 0)")


def test_07_epr_behaviour():
    d = 50
    rs1 = np.linspace(0.05, 1.2, 24)
    single_ok = all(
        an.epr_variance(an.build_state("1photon", r, 0.0, dim=d).state, (d, d))[0]
        >= an.epr_variance(an.build_state("undistilled", r, 0.0, dim=d).state, (d, d))[0]
        for r in rs1
    )
    below = np.arange(0.5, 3.45, 0.25)
    above = np.arange(4.6, 6.05, 0.2)

    def diff(db):
        r = an.db_to_r(-db)
        v2 = an.epr_variance(an.build_state("2photon", r, 0.0, dim=30).state, (30, 30))[0]
        v0 = an.epr_variance(an.build_state("undistilled", r, 0.0, dim=30).state, (30, 30))[0]
        return v2 - v0

    improve_ok = all(diff(db) < 0 for db in below)
    worse_ok = all(diff(db) > 0 for db in above)
    scan = an.epr_crossover()
    ok = single_ok and improve_ok and worse_ok
    report(
        7,
        ok,
        f"Var(x-|Psi1) >= Var(x-|Psi0): {single_ok}; Psi2 better below 3.5 dB: {improve_ok}; "
        f"worse above 4.5 dB: {worse_ok}; ideal crossover {scan.crossover_db:.3f} dB (band [3.5, 4.5])",
    )


def test_08_wigner_parity_and_factorization():
    d = 25
    psi1 = sub.ideal_subtract(0.368, 1, 0, d)
    minus, plus = wg.plus_minus_modes(psi1)
    w00 = wg.wigner_point(minus, 0.0, 0.0)
    pts = np.random.default_rng(8).uniform(-1.5, 1.5, size=(10, 4))
    full = wg.two_mode_wigner(fock.ket2dm(psi1.ravel()), pts, (d, d))
    fac = wg.factorized_two_mode_wigner(minus, plus, pts)
    err = float(np.max(np.abs(full - fac)))
    ok = abs(w00 + 1 / math.pi) <= 1e-8 and err <= 1e-6
    report(8, ok, f"W(0,0) + 1/pi = {w00 + 1 / math.pi:.2e} (+- 1e-8); two-mode vs factorized max error {err:.2e} (<= 1e-6)")


def test_09_tomography_round_trip():
    t0 = time.perf_counter()
    d = 20
    r = an.db_to_r(-3.2)
    rho = fock.ket2dm(sub.ideal_subtract(r, 1, 0, d).ravel())
    plus, minus = tomo.sample_plus_minus(rho, 100_000, 2024, tomo.PHASES, (d, d))
    rm = tomo.mle_reconstruct(minus, 14)
    rp = tomo.mle_reconstruct(plus, 14)
    truth = fock.ket2dm(sub.subtracted_squeezed_vacuum(r, 1, 14))
    f_minus = fock.fidelity(rm.rho, truth)
    f_plus = fock.fidelity(rp.rho, fock.ket2dm(fock.vacuum(14)))
    dt = time.perf_counter() - t0
    ok = f_minus >= 0.99 and f_plus > 0.99 and dt < 120
    report(9, ok, f"100k samples, 6 phases, D=14: '-' fidelity {f_minus:.5f} (>= 0.99), '+' vacuum fidelity {f_plus:.5f} (> 0.99), {dt:.1f} s (< 120 s)")


@pytest.mark.slow
def test_10_extrapolation():
    t0 = time.perf_counter()
    d = 20
    rho = fock.ket2dm(sub.ideal_subtract(an.db_to_r(-3.2), 1, 0, d).ravel())
    study = an.negativity_vs_datasize(rho, 600_000, 11, tomo.PHASES, (1, 2, 4, 8, 16), 14, (d, d))
    rel = study.fit.a / study.true_en - 1
    means = [p[1] for p in sorted(study.fit.points)]  # ascending N_d
    decreasing = all(a > b for a, b in zip(means, means[1:]))
    dt = time.perf_counter() - t0
    ok = abs(rel) <= 0.02 and decreasing and dt < 600
    report(10, ok, f"a = {study.fit.a:.5f} vs true {study.true_en:.5f} ({100 * rel:+.2f}%, within 2%); mean E_N decreasing in N_d: {decreasing}; {dt:.0f} s (< 600 s)")


def _run_twice(tmp_path, args):
    out = tmp_path / "run"
    blobs = []
    for _ in range(2):
        if out.exists():
            shutil.rmtree(out)
        assert cli.main(args + ["--out", str(out)]) == 0
        blobs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
    return blobs


def test_11_determinism(tmp_path):
    a1, a2 = _run_twice(tmp_path, ["tomo-sim", "--N", "12000", "--seed", "5"])
    b1, b2 = _run_twice(tmp_path, ["extrapolate", "--N", "24000", "--seed", "5", "--d-list", "1,2,4", "--D-rec", "8"])
    ok = a1 == a2 and b1 == b2 and len(a1) >= 3 and len(b1) >= 2
    report(11, ok, f"tomo-sim ({len(a1)} files) and extrapolate ({len(b1)} files) byte-identical across runs: {a1 == a2 and b1 == b2}")


if __name__ == "__main__":
    import pathlib
    import sys
    import tempfile

    failed = False
    for name, fn in sorted(globals().items()):
        if name.startswith("test_") and callable(fn):
            try:
                if "tmp_path" in fn.__code__.co_varnames[: fn.__code__.co_argcount]:
                    fn(pathlib.Path(tempfile.mkdtemp()))
                else:
                    fn()
            except AssertionError:
                failed = True
    sys.stdout.flush()
    os._exit(1 if failed else 0)
