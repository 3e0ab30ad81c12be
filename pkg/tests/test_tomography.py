import math

import numpy as np
import pytest
from scipy import stats

from cvdistill import fock
from cvdistill import subtraction as sub
from cvdistill import tomography as tomo
from cvdistill import wigner as wg

X = np.linspace(-10, 10, 20001)


def vac(d=10):
    return fock.ket2dm(fock.vacuum(d))


def test_hermite_functions_are_orthonormal():
    h = tomo.hermite_functions(30, X)
    gram = np.trapezoid(h[:, None, :] * h[None, :, :], X, axis=2)
    np.testing.assert_allclose(gram, np.eye(30), atol=1e-10)


def test_vacuum_and_one_photon_pdfs():
    np.testing.assert_allclose(tomo.quadrature_pdf(vac(), 0.3, X), stats.norm.pdf(X, scale=math.sqrt(0.5)), atol=1e-14)
    one = fock.ket2dm(fock.basis(5, 1))
    ref = 2 * X**2 / math.sqrt(math.pi) * np.exp(-(X**2))
    for th in (0.0, 1.0, 2.5):
        np.testing.assert_allclose(tomo.quadrature_pdf(one, th, X), ref, atol=1e-14)


@pytest.mark.parametrize("r", [0.2, 0.7])
def test_squeezed_pdf(r):
    rho = fock.ket2dm(fock.squeezed_vacuum(r, 60))
    ref = stats.norm.pdf(X, scale=math.sqrt(math.exp(-2 * r) / 2))
    np.testing.assert_allclose(tomo.quadrature_pdf(rho, 0.0, X), ref, atol=1e-6)


def test_pdf_nonnegative_and_normalized():
    rho = fock.ket2dm(sub.subtracted_squeezed_vacuum(0.5, 2, 20))
    for th in tomo.PHASES:
        pdf = tomo.quadrature_pdf(rho, th, X)
        assert pdf.min() >= -1e-15
        assert np.trapezoid(pdf, X) == pytest.approx(1.0, abs=1e-6)


def test_sample_variances():
    v = tomo.sample_homodyne(vac(), 0.0, 100_000, seed=3)
    assert np.var(v.x) == pytest.approx(0.5, abs=0.01)
    sq = fock.ket2dm(fock.squeezed_vacuum(0.368, 30))
    s = tomo.sample_homodyne(sq, 0.0, 100_000, seed=3)
    assert np.var(s.x) == pytest.approx(math.exp(-0.736) / 2, rel=0.02)


def test_sampling_is_deterministic():
    a = tomo.sample_phases(vac(), 1200, seed=9)
    b = tomo.sample_phases(vac(), 1200, seed=9)
    np.testing.assert_array_equal(a.x, b.x)
    c = tomo.sample_phases(vac(), 1200, seed=10)
    assert not np.array_equal(a.x, c.x)


def test_phase_counts_balanced():
    data = tomo.sample_phases(vac(), 1003, seed=1)
    np.testing.assert_allclose(data.phases(), tomo.PHASES)
    counts = [np.sum(data.theta == th) for th in data.phases()]
    assert max(counts) - min(counts) <= 1 and sum(counts) == 1003
    with pytest.raises(ValueError):
        tomo.sample_homodyne(vac(), 0.0, 0, seed=1)


def test_joint_sampling_vacuum_pair():
    rho = fock.ket2dm(fock.two_mode_basis(6, 0, 0).ravel())
    plus, minus = tomo.joint_sample_and_rotate(rho, 0.0, 100_000, seed=4, dims=(6, 6))
    assert np.var(plus.x) == pytest.approx(0.5, abs=0.01)
    assert np.var(minus.x) == pytest.approx(0.5, abs=0.01)
    assert abs(np.corrcoef(plus.x, minus.x)[0, 1]) < 0.01


def test_joint_sampling_hssv_variances():
    r = 0.4
    rho = fock.ket2dm(sub.hssv(r, 16).ravel())
    plus, minus = tomo.joint_sample_and_rotate(rho, 0.0, 100_000, seed=5, dims=(16, 16))
    assert np.var(minus.x) == pytest.approx(math.exp(-2 * r) / 2, rel=0.02)
    assert np.var(plus.x) == pytest.approx(0.5, rel=0.02)


def test_plus_mode_of_single_subtraction_is_vacuum_ks():
    d = 14
    rho = fock.ket2dm(sub.ideal_subtract(0.368, 1, 0, d).ravel())
    plus, _ = tomo.sample_plus_minus(rho, 30_000, seed=6, dims=(d, d))
    res = stats.kstest(plus.x, stats.norm(scale=math.sqrt(0.5)).cdf)
    assert res.pvalue > 0.01


def test_factorized_method_matches_joint_statistics():
    d = 14
    psi = sub.ideal_subtract(0.368, 1, 0, d)
    rho = fock.ket2dm(psi.ravel())
    factors = wg.plus_minus_modes(psi)
    _, mj = tomo.sample_plus_minus(rho, 30_000, seed=7, dims=(d, d))
    _, mf = tomo.sample_plus_minus(rho, 30_000, seed=7, method="factorized", factors=factors)
    assert stats.ks_2samp(mj.x, mf.x).pvalue > 0.01
    with pytest.raises(ValueError):
        tomo.sample_plus_minus(rho, 10, seed=1, method="factorized")


def test_vacuum_reconstruction_fixed_seed():
    data = tomo.sample_phases(vac(), 60_000, seed=1)
    res = tomo.mle_reconstruct(data, 10)
    assert res.converged
    assert fock.fidelity(res.rho, vac()) >= 0.999


def test_reconstruction_is_physical_and_monotone():
    rho = fock.ket2dm(sub.subtracted_squeezed_vacuum(0.368, 1, 12))
    data = tomo.sample_phases(rho, 20_000, seed=2)
    res = tomo.mle_reconstruct(data, 8, max_iter=300)
    assert np.all(np.diff(res.history) >= 0)
    assert np.trace(res.rho).real == pytest.approx(1.0, abs=1e-12)
    assert fock.is_hermitian(res.rho, 1e-12)
    assert np.linalg.eigvalsh(res.rho).min() > -1e-12


def test_non_convergence_is_a_flag():
    data = tomo.sample_phases(fock.ket2dm(fock.squeezed_vacuum(0.3, 12)), 5000, seed=2)
    res = tomo.mle_reconstruct(data, 8, max_iter=3)
    assert not res.converged and res.iterations == 3
    with pytest.raises(ValueError):
        tomo.mle_reconstruct(data, 1)


@pytest.mark.slow
def test_fidelity_improves_with_sample_size():
    rho = fock.ket2dm(fock.squeezed_vacuum(0.2, 10))
    small, big = [], []
    for seed in range(10):
        for n, out in ((10_000, small), (100_000, big)):
            data = tomo.sample_phases(rho, n, seed=seed)
            out.append(fock.fidelity(tomo.mle_reconstruct(data, 10).rho, rho))
    assert np.mean(small) < np.mean(big)


def test_single_phase_suffices_for_diagonal_states():
    truth = np.diag([0.5, 0.3, 0.2, 0, 0, 0, 0, 0]).astype(complex)
    data = tomo.sample_homodyne(truth, 0.0, 100_000, seed=8)
    res = tomo.mle_reconstruct(data, 8, phase_insensitive=True)
    assert res.converged and np.all(np.diff(res.history) >= 0)
    np.testing.assert_allclose(np.diag(res.rho).real[:3], [0.5, 0.3, 0.2], atol=0.02)


def test_plus_mode_reconstruction_is_vacuum():
    d = 14
    rho = fock.ket2dm(sub.ideal_subtract(0.368, 1, 1, d).ravel())
    plus, _ = tomo.sample_plus_minus(rho, 60_000, seed=11, dims=(d, d))
    res = tomo.mle_reconstruct(plus, 8)
    assert fock.fidelity(res.rho, vac(8)) > 0.99


def test_dataset_round_trip(tmp_path):
    data = tomo.sample_phases(fock.ket2dm(fock.squeezed_vacuum(0.3, 12)), 500, seed=12, mode="A")
    data.meta = {"state": "squeezed vacuum", "r": 0.3}
    path = tmp_path / "data.csv"
    tomo.write_dataset(data, path)
    back = tomo.read_dataset(path)
    np.testing.assert_array_equal(back.x, data.x)
    np.testing.assert_array_equal(back.theta, data.theta)
    assert back.mode == "A" and back.seed == 12 and back.meta == data.meta
    assert back.to_csv() == data.to_csv()


def test_dataset_validation():
    with pytest.raises(ValueError):
        tomo.QuadratureDataset(np.zeros(3), np.zeros(2), "-", 1)
    with pytest.raises(ValueError):
        tomo.QuadratureDataset(np.zeros(3), np.zeros(3), "C", 1)
    with pytest.raises(ValueError):
        tomo.QuadratureDataset.from_csv("a,b\n1,2\n")
