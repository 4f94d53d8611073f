import numpy as np
import pytest
from scipy import linalg

from bsshift.fockspin import ContractError, FockSpinBasis, build_hamiltonian, parity_operator
from bsshift.grid1d import wkb_dressed_energy
from bsshift.rotation import (DomainError, QuadratureCalculus, apply_scalar_function,
                              build_h0, build_unitary, build_v, build_w, decomposition_residual,
                              h0_eigenstates, interior_indices, rotate_hamiltonian)


@pytest.fixture(scope="module")
def calc80():
    return QuadratureCalculus.for_basis(FockSpinBasis(80))


def test_identity_function(calc80):
    one = apply_scalar_function(calc80, lambda x: np.ones_like(x))
    np.testing.assert_allclose(one.matrix, np.eye(calc80.basis.dim), atol=1e-12)


def test_square_matches_matrix_product(calc80):
    x = calc80.x_matrix
    fx = calc80.fock_function(lambda x: x ** 2)
    n = calc80.basis.n_max - 1
    assert np.max(np.abs(fx[:n, :n] - (x @ x)[:n, :n])) <= 1e-9


def test_exponential_matches_expm():
    calc = QuadratureCalculus.for_basis(FockSpinBasis(20))
    ref = linalg.expm(0.1 * calc.x_matrix)
    np.testing.assert_allclose(calc.fock_function(lambda x: np.exp(0.1 * x)), ref, atol=1e-10)


def test_domain_error(calc80):
    with pytest.raises(DomainError):
        calc80.fock_function(np.sqrt)  # X has negative eigenvalues


def test_zero_coupling_rotation_is_identity(params11, calc80):
    u = build_unitary(params11, calc80)
    np.testing.assert_array_equal(u.matrix, np.eye(calc80.basis.dim))
    h = build_hamiltonian(params11, calc80.basis)
    assert np.max(np.abs(rotate_hamiltonian(h, u).matrix - h.matrix)) == 0


def test_unitarity_and_routes(params11, calc80):
    p = params11.with_g(0.5)
    u = build_unitary(p, calc80)
    assert np.max(np.abs(u.matrix.T @ u.matrix - np.eye(calc80.basis.dim))) <= 1e-12
    u2 = build_unitary(p, calc80, route="expm")
    assert np.max(np.abs(u.matrix - u2.matrix)) <= 1e-12


def test_rotation_preserves_parity(params11, calc80):
    u = build_unitary(params11.with_g(0.7), calc80)
    par = parity_operator(calc80.basis)
    assert np.max(np.abs((u.H @ par @ u - par).matrix)) <= 1e-12


def test_rotate_rejects_non_unitary(params11, calc80):
    h = build_hamiltonian(params11, calc80.basis)
    bad = build_unitary(params11.with_g(0.3), calc80) * 1.01
    with pytest.raises(ContractError):
        rotate_hamiltonian(h, bad)


def test_rotate_rejects_basis_mismatch(params11, calc80):
    h = build_hamiltonian(params11, FockSpinBasis(10))
    with pytest.raises(ContractError):
        rotate_hamiltonian(h, build_unitary(params11, calc80))


def test_spectral_invariance(params11):
    basis = FockSpinBasis(120)
    calc = QuadratureCalculus.for_basis(basis)
    p = params11.with_g(0.5)
    h = build_hamiltonian(p, basis)
    hp = rotate_hamiltonian(h, build_unitary(p, calc))
    w, wp = linalg.eigvalsh(h.matrix), linalg.eigvalsh(hp.matrix)
    lo, hi = basis.dim // 4, 3 * basis.dim // 4
    # interior eigenvalues only; truncation affects the top of the spectrum
    assert np.max(np.abs(w[:hi] - wp[:hi])) <= 1e-7
    assert lo < hi


def test_decomposition(params11, calc80):
    assert decomposition_residual(params11.with_g(0.5), calc80) <= 1e-6
    assert decomposition_residual(params11, calc80) <= 1e-12


def test_v_w_structure(params11, calc80):
    p = params11.with_g(0.6)
    v, w = build_v(p, calc80), build_w(p, calc80)
    assert v.is_hermitian() and w.is_hermitian()
    b = calc80.basis
    m = b.spin_projections
    # V flips the spin, W does not
    assert np.all(v.matrix[np.equal.outer(m, m)] == 0)
    assert np.all(w.matrix[~np.equal.outer(m, m)] == 0)
    assert v.commutator_norm(parity_operator(b)) <= 1e-12
    assert w.max_norm() <= (p.coupling_u / p.delta_e) ** 2 * (1 + 1e-12)


def test_h0_gap_matches_wkb(params11, calc80):
    p = params11.with_g(0.4)
    wp, _ = h0_eigenstates(p, calc80, 0.5)
    wm, _ = h0_eigenstates(p, calc80, -0.5)
    n = 60
    gap = wp[n] - wm[n]
    assert gap == pytest.approx(wkb_dressed_energy(0.4, 60, 11.0), rel=5e-3)


def test_h0_sector_uncoupled(params11, calc80):
    w, _ = h0_eigenstates(params11, calc80, 0.5)
    np.testing.assert_allclose(w, np.arange(81) + 5.5, atol=1e-10)


def test_interior_indices():
    b = FockSpinBasis(9)
    idx = interior_indices(b, 0.5)
    assert set(b.fock_numbers[idx]) == {0, 1, 2, 3, 4}
