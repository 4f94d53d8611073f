import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import linalg

from bsshift.fockspin import (ContractError, FockSpinBasis, OperatorMatrix, block_eigenvalues,
                              build_hamiltonian, build_ladder, diagonalize, dump_spectrum,
                              load_spectrum, parity_operator, truncation_safe)
from bsshift.model import ModelParams


@given(n_max=st.integers(1, 60), data=st.data())
def test_index_round_trip(n_max, data):
    b = FockSpinBasis(n_max)
    i = data.draw(st.integers(0, b.dim - 1))
    assert b.index(*b.state(i)) == i
    assert b.dim == 2 * (n_max + 1)


def test_basis_ordering():
    b = FockSpinBasis(4)
    assert b.state(0) == (0, 0.5)
    assert b.state(1) == (0, -0.5)
    assert b.index(3, -0.5) == 7


def test_ladder_elements():
    b = FockSpinBasis(20)
    a = build_ladder(b).matrix
    assert a[b.index(0, 0.5), b.index(1, 0.5)] == 1.0
    assert a[b.index(15, -0.5), b.index(16, -0.5)] == 4.0
    vac = np.zeros(b.dim)
    vac[b.index(0, 0.5)] = 1.0
    assert np.all(a @ vac == 0)
    # nothing else
    assert np.count_nonzero(a) == 2 * 20


def test_uncoupled_spectrum_exact(params11):
    b = FockSpinBasis(30)
    w = linalg.eigvalsh(build_hamiltonian(params11, b).matrix)
    n = np.arange(31)
    expected = np.sort(np.concatenate([n + 5.5, n - 5.5]))
    np.testing.assert_array_equal(w, expected)


def test_hamiltonian_symmetric_and_banded(params11):
    b = FockSpinBasis(40)
    h = build_hamiltonian(params11.with_coupling(0.3), b).matrix
    assert np.max(np.abs(h - h.T)) == 0
    i, j = np.nonzero(h)
    assert np.max(np.abs(i - j)) <= 3


def test_couples_opposite_spin_neighbours(params11):
    b = FockSpinBasis(10)
    h = build_hamiltonian(params11.with_coupling(0.5), b).matrix
    assert h[b.index(3, 0.5), b.index(4, -0.5)] == pytest.approx(0.5 * 2.0)
    assert h[b.index(3, 0.5), b.index(2, -0.5)] == pytest.approx(0.5 * np.sqrt(3))
    assert h[b.index(3, 0.5), b.index(4, 0.5)] == 0


def test_ground_state_second_order_pt(params11):
    # E0 = -dE/2 - U^2 / (dE + w) to second order
    u = 0.05
    w = linalg.eigvalsh(build_hamiltonian(params11.with_coupling(u), FockSpinBasis(60)).matrix)
    assert w[0] == pytest.approx(-5.5 - u ** 2 / 12.0, abs=1e-5)


def test_parity_entries():
    b = FockSpinBasis(5)
    p = np.diag(parity_operator(b).matrix)
    assert p[b.index(0, 0.5)] == 1
    assert p[b.index(3, 0.5)] == -1
    assert p[b.index(3, -0.5)] == 1
    np.testing.assert_array_equal(parity_operator(b).matrix @ parity_operator(b).matrix, np.eye(b.dim))


def test_parity_commutes(params11):
    b = FockSpinBasis(40)
    h = build_hamiltonian(params11.with_coupling(0.3), b)
    assert h.commutator_norm(parity_operator(b)) == 0.0


def test_diagonalize_identity():
    b = FockSpinBasis(3)
    s = diagonalize(OperatorMatrix(b, np.eye(b.dim)))
    np.testing.assert_allclose(s.eigenvalues, 1.0)
    np.testing.assert_allclose(s.eigenvectors.T @ s.eigenvectors, np.eye(b.dim), atol=1e-12)


def test_diagonalize_uncoupled_matches_ladder(params11):
    b = FockSpinBasis(25)
    s = diagonalize(build_hamiltonian(params11, b))
    n = np.arange(26)
    expected = np.sort(np.concatenate([n + 5.5, n - 5.5]))
    np.testing.assert_allclose(s.eigenvalues, expected, rtol=1e-12)
    assert s.parity_labels is not None


def test_diagonalize_reconstruction_and_labels(params11):
    b = FockSpinBasis(120)
    h = build_hamiltonian(params11.with_coupling(1.0), b)
    s = diagonalize(h)
    v = s.eigenvectors
    recon = (v * s.eigenvalues) @ v.T
    assert np.max(np.abs(recon - h.matrix)) <= 1e-9 * h.max_norm()
    assert np.max(np.abs(v.T @ v - np.eye(b.dim))) <= 1e-10
    assert np.all(np.diff(s.eigenvalues) >= 0)
    resid = np.linalg.norm(h.matrix @ v - v * s.eigenvalues, axis=0)
    assert np.max(resid) <= 1e-9 * np.linalg.norm(h.matrix, 2)
    pdiag = np.diag(parity_operator(b).matrix)
    for j in range(0, b.dim, 17):
        off = np.sum(v[pdiag != s.parity_labels[j], j] ** 2)
        assert off <= 1e-8


def test_diagonalize_rejects_non_hermitian():
    b = FockSpinBasis(2)
    m = np.zeros((b.dim, b.dim))
    m[0, 1] = 1.0
    with pytest.raises(ContractError):
        diagonalize(OperatorMatrix(b, m))


def test_basis_mismatch_raises():
    with pytest.raises(ContractError):
        OperatorMatrix(FockSpinBasis(2), np.eye(6)) + OperatorMatrix(FockSpinBasis(3), np.eye(8))


def test_spectrum_invariant_under_coupling_sign(params11):
    b = FockSpinBasis(80)
    p = params11.with_coupling(0.7)
    w1 = linalg.eigvalsh(build_hamiltonian(p, b).matrix)
    w2 = linalg.eigvalsh(build_hamiltonian(p, b, coupling_u=-0.7).matrix)
    assert np.max(np.abs(w1 - w2)) <= 1e-10


def test_parity_blocks_reproduce_dense_spectrum(params11):
    p = params11.with_coupling(0.8)
    b = FockSpinBasis(50)
    dense = linalg.eigvalsh(build_hamiltonian(p, b).matrix)
    blocks = np.sort(np.concatenate([block_eigenvalues(p, 50, 1), block_eigenvalues(p, 50, -1)]))
    np.testing.assert_allclose(blocks, dense, atol=1e-11)


def test_interior_eigenvalues_converge(params11):
    p = params11.with_g(0.5)
    w1 = block_eigenvalues(p, 200, 1)
    w2 = block_eigenvalues(p, 400, 1)
    half = len(w1) // 2
    assert np.max(np.abs(w1[:half] - w2[:half])) < 1e-8


def test_truncation_mask(params11):
    b = FockSpinBasis(60)
    s = diagonalize(build_hamiltonian(params11.with_coupling(0.5), b))
    safe = truncation_safe(s, b)
    assert safe[:40].all()
    assert not safe[-1]


def test_spectrum_dump_round_trip(tmp_path):
    w = np.array([-5.5, 0.25, 1e300, -0.0])
    p = np.array([1, -1, 1, -1])
    path = tmp_path / "s.bin"
    dump_spectrum(path, w, p)
    raw = path.read_bytes()
    assert int.from_bytes(raw[:8], "little") == 4
    assert len(raw) == 2 * (8 + 8 * 4)
    w2, p2 = load_spectrum(path)
    np.testing.assert_array_equal(w2, w)
    np.testing.assert_array_equal(p2, p)
    dump_spectrum(path, w)
    assert load_spectrum(path)[1] is None
