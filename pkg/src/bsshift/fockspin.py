"""Truncated Fock x spin basis and the exact spin-boson Hamiltonian.

Basis ordering is Fock-major with the spin index fastest::

    index = 2 * n + s,   s = 0 <-> m = +1/2,   s = 1 <-> m = -1/2

so the coupling ``U (a + a^dagger) sigma_x`` is banded with bandwidth 3.

The Hamiltonian conserves ``P = sigma_z (-1)^N``.  Within a parity sector each
Fock number ``n`` appears with exactly one spin projection and the sector
Hamiltonian is tridiagonal; :func:`parity_block` exposes that form for the
g-sweeps, which only ever need one sector at a time.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import linalg

from .model import ModelParams

__all__ = [
    "ContractError",
    "FockSpinBasis",
    "OperatorMatrix",
    "Spectrum",
    "build_ladder",
    "build_number",
    "spin_operator",
    "build_hamiltonian",
    "parity_operator",
    "diagonalize",
    "truncation_safe",
    "parity_block",
    "block_eigenvalues",
    "block_eigh",
    "dump_spectrum",
    "load_spectrum",
]

HERMITIAN_TOL = 1e-12
PARITY_RESIDUAL_TOL = 1e-8

_PAULI = {
    "x": np.array([[0.0, 1.0], [1.0, 0.0]]),
    "y": np.array([[0.0, -1j], [1j, 0.0]]),
    "z": np.array([[1.0, 0.0], [0.0, -1.0]]),
    "i": np.eye(2),
}


class ContractError(ValueError):
    """An operation received arguments violating its preconditions."""


@dataclass(frozen=True)
class FockSpinBasis:
    n_max: int

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise ContractError(f"n_max must be an integer >= 1, got {self.n_max}")

    @property
    def fock_dim(self) -> int:
        return self.n_max + 1

    @property
    def dim(self) -> int:
        return 2 * (self.n_max + 1)

    def index(self, n: int, m: float) -> int:
        if not 0 <= n <= self.n_max:
            raise ContractError(f"Fock number {n} outside 0..{self.n_max}")
        if m not in (0.5, -0.5):
            raise ContractError(f"spin projection must be +-1/2, got {m}")
        return 2 * n + (0 if m > 0 else 1)

    def state(self, index: int) -> tuple[int, float]:
        if not 0 <= index < self.dim:
            raise ContractError(f"index {index} outside 0..{self.dim - 1}")
        n, s = divmod(index, 2)
        return n, 0.5 if s == 0 else -0.5

    @property
    def fock_numbers(self) -> np.ndarray:
        return np.repeat(np.arange(self.fock_dim), 2)

    @property
    def spin_projections(self) -> np.ndarray:
        return np.tile([0.5, -0.5], self.fock_dim)

    def kron(self, fock_op: np.ndarray, spin_op: np.ndarray) -> np.ndarray:
        """Embed ``fock_op (x) spin_op`` in this ordering."""
        return np.kron(fock_op, spin_op)


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Dense matrix tagged with the basis it acts on."""

    basis: FockSpinBasis
    matrix: np.ndarray

    def __post_init__(self):
        d = self.basis.dim
        if self.matrix.shape != (d, d):
            raise ContractError(f"matrix shape {self.matrix.shape} does not match basis dim {d}")

    def _check(self, other: "OperatorMatrix"):
        if not isinstance(other, OperatorMatrix):
            return NotImplemented
        if other.basis != self.basis:
            raise ContractError(f"basis mismatch: {self.basis} vs {other.basis}")

    def __add__(self, other):
        self._check(other)
        return OperatorMatrix(self.basis, self.matrix + other.matrix)

    def __sub__(self, other):
        self._check(other)
        return OperatorMatrix(self.basis, self.matrix - other.matrix)

    def __matmul__(self, other):
        self._check(other)
        return OperatorMatrix(self.basis, self.matrix @ other.matrix)

    def __mul__(self, scalar):
        return OperatorMatrix(self.basis, scalar * self.matrix)

    __rmul__ = __mul__

    @property
    def H(self) -> "OperatorMatrix":
        return OperatorMatrix(self.basis, self.matrix.conj().T)

    def sandwich(self, bra: np.ndarray, ket: np.ndarray) -> complex:
        """Matrix element ``<bra| op |ket>``."""
        return complex(np.vdot(bra, self.matrix @ ket))

    def hermiticity_residual(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        return self.hermiticity_residual() <= tol

    def max_norm(self) -> float:
        return float(np.max(np.abs(self.matrix)))

    def commutator_norm(self, other: "OperatorMatrix") -> float:
        self._check(other)
        a, b = self.matrix, other.matrix
        return float(np.max(np.abs(a @ b - b @ a)))


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Ascending eigenvalues, column eigenvectors and optional parity labels."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    parity_labels: np.ndarray | None = None

    def __len__(self):
        return len(self.eigenvalues)


def _fock_ladder(n_max: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), 1)


def build_ladder(basis: FockSpinBasis) -> OperatorMatrix:
    """Annihilation operator ``a (x) 1_spin``."""
    return OperatorMatrix(basis, basis.kron(_fock_ladder(basis.n_max), _PAULI["i"]))


def build_number(basis: FockSpinBasis) -> OperatorMatrix:
    return OperatorMatrix(basis, np.diag(basis.fock_numbers.astype(float)))


def spin_operator(basis: FockSpinBasis, which: str) -> OperatorMatrix:
    """``1_fock (x) sigma_which`` for ``which`` in x, y, z."""
    return OperatorMatrix(basis, basis.kron(np.eye(basis.fock_dim), _PAULI[which]))


def build_hamiltonian(params: ModelParams, basis: FockSpinBasis,
                      coupling_u: float | None = None) -> OperatorMatrix:
    """Spin-boson Hamiltonian ``dE/2 sz + w a^dag a + U (a + a^dag) sx``.

    ``coupling_u`` overrides ``params.coupling_u`` (it may be negative, which
    the frozen parameter record does not allow).
    """
    u = params.coupling_u if coupling_u is None else coupling_u
    n = basis.fock_numbers
    m = basis.spin_projections
    h = np.diag(m * params.delta_e + n * params.hbar_omega0)
    # (n, m) <-> (n + 1, -m) with strength U sqrt(n + 1)
    amp = u * np.sqrt(np.arange(1, basis.fock_dim, dtype=float))
    for s in (0, 1):
        rows = 2 * np.arange(basis.n_max) + s
        cols = 2 * np.arange(1, basis.fock_dim) + (1 - s)
        h[rows, cols] = amp
        h[cols, rows] = amp
    return OperatorMatrix(basis, h)


def parity_operator(basis: FockSpinBasis) -> OperatorMatrix:
    """Conserved parity ``sigma_z (-1)^N``; entries ``(2m)(-1)^n``."""
    diag = 2 * basis.spin_projections * (-1.0) ** basis.fock_numbers
    return OperatorMatrix(basis, np.diag(diag))


def diagonalize(op: OperatorMatrix, hermitian_tol: float = 1e-10,
                parity_tol: float = 1e-12) -> Spectrum:
    """Full dense eigendecomposition of a Hermitian operator.

    Parity labels are attached when ``op`` commutes with the parity operator.
    Degenerate eigenspaces that mix parities are re-diagonalized against ``P``
    so that every returned eigenvector has a definite label.
    """
    scale = max(op.max_norm(), 1.0)
    if op.hermiticity_residual() > hermitian_tol * scale:
        raise ContractError(
            f"operator is not Hermitian (residual {op.hermiticity_residual():.3e})")
    mat = op.matrix
    if not np.iscomplexobj(mat):
        mat = mat.astype(float)
    w, v = linalg.eigh(mat)

    parity = parity_operator(op.basis)
    if op.commutator_norm(parity) > parity_tol * scale:
        return Spectrum(w, v, None)

    pdiag = np.diag(parity.matrix)
    # split degenerate clusters by parity
    start = 0
    deg_tol = 1e-9 * scale
    while start < len(w):
        stop = start + 1
        while stop < len(w) and w[stop] - w[start] <= deg_tol:
            stop += 1
        if stop - start > 1:
            block = v[:, start:stop]
            pb = block.conj().T @ (pdiag[:, None] * block)
            _, rot = linalg.eigh(pb)
            v[:, start:stop] = block @ rot
        start = stop
    labels = np.real(np.einsum("ij,i,ij->j", v.conj(), pdiag, v))
    signs = np.sign(labels)
    plus = np.abs(v) ** 2 * (pdiag[:, None] > 0)
    off = np.where(signs > 0, 1 - plus.sum(axis=0), plus.sum(axis=0))
    if np.any(off > PARITY_RESIDUAL_TOL):
        return Spectrum(w, v, None)
    return Spectrum(w, v, signs.astype(int))


def truncation_safe(spectrum: Spectrum, basis: FockSpinBasis, frac: float = 0.9,
                    tol: float = 1e-8) -> np.ndarray:
    """Mask of eigenstates whose population above ``frac * n_max`` is below ``tol``."""
    high = basis.fock_numbers > frac * basis.n_max
    pop = np.sum(np.abs(spectrum.eigenvectors[high, :]) ** 2, axis=0)
    return pop < tol


def parity_block(params: ModelParams, n_max: int, parity: int,
                 coupling_u: float | None = None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Tridiagonal Hamiltonian of one parity sector.

    Returns ``(diagonal, offdiagonal, spins)`` where row ``n`` is the state
    ``|n, m_n>`` with ``(2 m_n)(-1)^n = parity``.
    """
    if parity not in (1, -1):
        raise ContractError(f"parity must be +1 or -1, got {parity}")
    u = params.coupling_u if coupling_u is None else coupling_u
    n = np.arange(n_max + 1)
    spins = np.where((-1) ** n == parity, 0.5, -0.5)
    diag = spins * params.delta_e + n * params.hbar_omega0
    off = u * np.sqrt(n[1:].astype(float))
    return diag, off, spins


def block_eigenvalues(params: ModelParams, n_max: int, parity: int,
                      coupling_u: float | None = None,
                      select: tuple[int, int] | None = None) -> np.ndarray:
    d, e, _ = parity_block(params, n_max, parity, coupling_u)
    if select is None:
        return linalg.eigh_tridiagonal(d, e, eigvals_only=True)
    return linalg.eigh_tridiagonal(d, e, eigvals_only=True, select="i", select_range=select)


def block_eigh(params: ModelParams, n_max: int, parity: int,
               coupling_u: float | None = None,
               select: tuple[int, int] | None = None) -> tuple[np.ndarray, np.ndarray]:
    d, e, _ = parity_block(params, n_max, parity, coupling_u)
    if select is None:
        return linalg.eigh_tridiagonal(d, e)
    return linalg.eigh_tridiagonal(d, e, select="i", select_range=select)


# Binary dump: little-endian uint64 count followed by that many float64
# eigenvalues; a second record of the same shape carries parity labels
# (+1.0 / -1.0, or NaN when unlabelled).

def dump_spectrum(path: str | Path, eigenvalues: np.ndarray,
                  parity_labels: np.ndarray | None = None) -> None:
    w = np.ascontiguousarray(eigenvalues, dtype="<f8")
    if parity_labels is None:
        p = np.full(len(w), np.nan, dtype="<f8")
    else:
        p = np.ascontiguousarray(parity_labels, dtype="<f8")
    with open(path, "wb") as fh:
        for arr in (w, p):
            fh.write(struct.pack("<Q", len(arr)))
            fh.write(arr.tobytes())


def load_spectrum(path: str | Path) -> tuple[np.ndarray, np.ndarray | None]:
    raw = Path(path).read_bytes()
    arrays = []
    pos = 0
    while pos < len(raw):
        (count,) = struct.unpack_from("<Q", raw, pos)
        pos += 8
        arrays.append(np.frombuffer(raw, dtype="<f8", count=count, offset=pos).copy())
        pos += 8 * count
    w = arrays[0]
    p = arrays[1] if len(arrays) > 1 else None
    if p is not None and np.all(np.isnan(p)):
        p = None
    return w, p
