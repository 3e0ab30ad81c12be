import math

import numpy as np
import pytest

from cvdistill import fock
from cvdistill import gaussian as g
from cvdistill import subtraction as sub
from cvdistill.entanglement import log_negativity
from cvdistill.errors import DisplacementError

from conftest import dense_covariance


def test_vacuum_covariance():
    rho = fock.ket2dm(fock.two_mode_basis(4, 0, 0).ravel())
    np.testing.assert_allclose(g.covariance_of(rho, (4, 4)), np.eye(4) / 2, atol=1e-15)


@pytest.mark.parametrize("r,d", [(0.0, 25), (0.4, 25), (0.6, 25), (0.8, 35)])
def test_hssv_covariance_from_fock_state(r, d):
    psi = sub.hssv(r, d).ravel()
    v = g.covariance_of(fock.ket2dm(psi), (d, d))
    np.testing.assert_allclose(v, g.hssv_covariance(r), atol=1e-7)


def test_tmsv_covariance_from_fock_state():
    s = 0.3
    psi = fock.two_mode_squeezed_vacuum(math.tanh(s), 25).ravel()
    v = g.covariance_of(fock.ket2dm(psi), (25, 25))
    np.testing.assert_allclose(v, g.tmsv_covariance(s), atol=1e-7)


def test_covariance_matches_dense_oracle():
    rho = fock.ket2dm(sub.ideal_subtract(0.3, 1, 1, 18).ravel())
    np.testing.assert_allclose(g.covariance_of(rho, (18, 18)), dense_covariance(rho, 18), atol=1e-12)


def test_displaced_state_raises():
    psi = np.zeros((3, 3), complex)
    psi[0, 0] = psi[1, 0] = 1 / math.sqrt(2)
    with pytest.raises(DisplacementError):
        g.covariance_of(fock.ket2dm(psi.ravel()), (3, 3))


def test_closed_forms():
    np.testing.assert_allclose(g.hssv_covariance(0.0), np.eye(4) / 2)
    r = 0.7
    v = g.hssv_covariance(r)
    np.testing.assert_allclose(np.diag(v), np.array([math.exp(-r), math.exp(r)] * 2) * math.cosh(r) / 2)
    assert v[0, 2] == pytest.approx(math.exp(-r) * math.sinh(r) / 2)
    assert v[1, 3] == pytest.approx(-math.exp(r) * math.sinh(r) / 2)
    with pytest.raises(ValueError):
        g.hssv_covariance(5.0)


@pytest.mark.parametrize("r", [0.1, 0.5, 1.5])
def test_local_squeezing_maps_hssv_to_tmsv(r):
    v = g.local_squeeze_cov(g.hssv_covariance(r), -r / 2, -r / 2)
    np.testing.assert_allclose(v, g.tmsv_covariance(r / 2), atol=1e-12)


def test_local_squeezing_identity_and_composition():
    v = g.hssv_covariance(0.4)
    np.testing.assert_allclose(g.local_squeeze_cov(v, 0, 0), v)
    a = g.local_squeeze_cov(g.local_squeeze_cov(v, 0.2, -0.1), 0.3, 0.4)
    np.testing.assert_allclose(a, g.local_squeeze_cov(v, 0.5, 0.3), atol=1e-14)


def test_local_squeezing_matches_fock_operation():
    psi = sub.hssv(0.4, 25)
    out = fock.apply_local_squeezing(psi, 0.1, -0.15)
    v = g.covariance_of(fock.ket2dm(out.ravel()), (25, 25))
    np.testing.assert_allclose(v, g.local_squeeze_cov(g.hssv_covariance(0.4), 0.1, -0.15), atol=1e-7)


@pytest.mark.parametrize("r", [0.0, 0.3, 1.2])
def test_pure_state_symplectic_eigenvalues(r):
    np.testing.assert_allclose(g.symplectic_eigenvalues(g.hssv_covariance(r)), [0.5, 0.5], atol=1e-10)
    assert g.is_physical(g.hssv_covariance(r))


def test_unphysical_matrix_detected():
    assert not g.is_physical(np.diag([0.2, 0.2, 0.5, 0.5]))
    assert not g.is_physical(np.arange(16.0).reshape(4, 4))


@pytest.mark.parametrize("r", [0.2, 0.6])
def test_gaussian_negativity_equals_fock_value(r):
    en_g = g.gaussian_log_negativity(g.tmsv_covariance(r / 2))
    rho = fock.ket2dm(sub.hssv(r, 25).ravel())
    assert en_g == pytest.approx(r * math.log2(math.e), abs=1e-12)
    assert log_negativity(rho, (25, 25)) == pytest.approx(en_g, abs=1e-5)


def test_two_photon_subtraction_reduces_minus_variance_at_two_db():
    r = 0.23
    psi = sub.ideal_subtract(r, 1, 1, 20).ravel()
    v = g.covariance_of(fock.ket2dm(psi), (20, 20))
    var_minus = 0.5 * (v[0, 0] + v[2, 2] - 2 * v[0, 2])
    assert var_minus < math.exp(-2 * r) / 2


def test_single_mode_variance():
    rho = fock.ket2dm(fock.squeezed_vacuum(0.5, 30))
    assert g.single_mode_variance(rho, 0.0) == pytest.approx(math.exp(-1.0) / 2, abs=1e-9)
    assert g.single_mode_variance(rho, math.pi / 2) == pytest.approx(math.exp(1.0) / 2, abs=1e-6)


def test_covariance_csv_round_trip():
    v = g.hssv_covariance(0.37)
    np.testing.assert_array_equal(g.covariance_from_csv(g.covariance_to_csv(v)), v)
    with pytest.raises(ValueError):
        g.covariance_from_csv("1,2\n3,4\n")
