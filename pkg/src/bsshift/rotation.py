"""Rotated frame: functions of the quadrature ``X = a + a^dag`` and the pieces
``H' = H0 + V + W`` of the rotated spin-boson Hamiltonian.

Everything is real.  The only imaginary unit enters through ``sigma_y``, and
both places it appears combine it into the real antisymmetric ``i sigma_y``:

    U_rot = cos(theta/2) (x) 1  +  sin(theta/2) (x) (-i sigma_y)
    V     = (w/2) {F (a - a^dag) + (a - a^dag) F} (x) (i sigma_y)

with ``theta = arctan(2 U X / dE)`` and ``F = (U/dE) / (1 + (2 U X / dE)^2)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import linalg

from .fockspin import (ContractError, FockSpinBasis, OperatorMatrix, build_hamiltonian,
                       _fock_ladder)
from .model import ModelParams

__all__ = [
    "DomainError",
    "QuadratureCalculus",
    "apply_scalar_function",
    "build_unitary",
    "rotate_hamiltonian",
    "build_h0",
    "build_v",
    "build_w",
    "h0_sector",
    "h0_eigenstates",
    "rotation_bracket",
    "interior_indices",
    "decomposition_residual",
    "UNITARITY_TOL",
]

UNITARITY_TOL = 1e-9

# i sigma_y and -i sigma_y, both real
_I_SIGMA_Y = np.array([[0.0, 1.0], [-1.0, 0.0]])
_SIGMA_Z_HALF = np.diag([0.5, -0.5])


class DomainError(ValueError):
    """A scalar function is undefined somewhere on the spectrum of X."""


@dataclass(frozen=True, eq=False)
class QuadratureCalculus:
    """Eigendecomposition of the truncated Fock-space quadrature ``X``.

    Built once per basis and reused for every scalar function of ``X``.
    """

    basis: FockSpinBasis
    x_eigenvalues: np.ndarray
    x_eigenvectors: np.ndarray

    @classmethod
    def for_basis(cls, basis: FockSpinBasis) -> "QuadratureCalculus":
        off = np.sqrt(np.arange(1, basis.fock_dim, dtype=float))
        lam, vec = linalg.eigh_tridiagonal(np.zeros(basis.fock_dim), off)
        return cls(basis, lam, vec)

    @property
    def x_matrix(self) -> np.ndarray:
        a = _fock_ladder(self.basis.n_max)
        return a + a.T

    def fock_function(self, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        """``f(X)`` on the Fock factor alone."""
        with np.errstate(invalid="ignore", divide="ignore"):
            vals = np.asarray(f(self.x_eigenvalues), dtype=float)
        if vals.shape == ():
            vals = np.full_like(self.x_eigenvalues, float(vals))
        if not np.all(np.isfinite(vals)):
            bad = self.x_eigenvalues[~np.isfinite(vals)]
            raise DomainError(f"function undefined at X eigenvalue(s) {bad[:5]}")
        v = self.x_eigenvectors
        return (v * vals) @ v.T


def apply_scalar_function(calc: QuadratureCalculus,
                          f: Callable[[np.ndarray], np.ndarray]) -> OperatorMatrix:
    """``f(X) (x) 1_spin`` by spectral calculus."""
    return OperatorMatrix(calc.basis, calc.basis.kron(calc.fock_function(f), np.eye(2)))


def _theta(params: ModelParams) -> Callable[[np.ndarray], np.ndarray]:
    scale = 2.0 * params.coupling_u / params.delta_e
    return lambda x: np.arctan(scale * x)


def rotation_bracket(params: ModelParams) -> Callable[[np.ndarray], np.ndarray]:
    """Scalar ``F(x) = (U/dE) / (1 + (2 U x / dE)^2)`` shared by V and W."""
    r = params.coupling_u / params.delta_e
    return lambda x: r / (1.0 + (2.0 * r * x) ** 2)


def build_unitary(params: ModelParams, calc: QuadratureCalculus,
                  route: str = "halfangle") -> OperatorMatrix:
    """Rotation ``exp(-(i/2) theta(X) sigma_y)``.

    ``route="halfangle"`` uses ``cos(theta/2) - i sin(theta/2) sigma_y``;
    ``route="expm"`` exponentiates the (real antisymmetric) generator directly.
    """
    th = _theta(params)
    basis = calc.basis
    if route not in ("halfangle", "expm"):
        raise ValueError(f"unknown route {route!r}")
    if params.coupling_u == 0:
        return OperatorMatrix(basis, np.eye(basis.dim))
    if route == "halfangle":
        c = calc.fock_function(lambda x: np.cos(th(x) / 2))
        s = calc.fock_function(lambda x: np.sin(th(x) / 2))
        u = basis.kron(c, np.eye(2)) - basis.kron(s, _I_SIGMA_Y)
    elif route == "expm":
        gen = -0.5 * basis.kron(calc.fock_function(th), _I_SIGMA_Y)
        u = linalg.expm(gen)
    return OperatorMatrix(basis, u)


def rotate_hamiltonian(h: OperatorMatrix, u: OperatorMatrix,
                       unitarity_tol: float = UNITARITY_TOL) -> OperatorMatrix:
    """``U^dag H U``."""
    if h.basis != u.basis:
        raise ContractError(f"basis mismatch: {h.basis} vs {u.basis}")
    eye = np.eye(u.basis.dim)
    resid = np.max(np.abs(u.matrix.conj().T @ u.matrix - eye))
    if resid > unitarity_tol:
        raise ContractError(f"rotation is not unitary (residual {resid:.3e})")
    out = u.matrix.conj().T @ h.matrix @ u.matrix
    return OperatorMatrix(h.basis, 0.5 * (out + out.conj().T))


def _dressed_splitting(params: ModelParams) -> Callable[[np.ndarray], np.ndarray]:
    de2 = params.delta_e ** 2
    u2 = params.coupling_u ** 2
    return lambda x: np.sqrt(de2 + 4.0 * u2 * x * x)


def build_h0(params: ModelParams, calc: QuadratureCalculus) -> OperatorMatrix:
    """``sqrt(dE^2 + 4 U^2 X^2) sigma_z / 2 + w a^dag a``."""
    basis = calc.basis
    s = calc.fock_function(_dressed_splitting(params))
    num = np.diag(np.arange(basis.fock_dim, dtype=float))
    h0 = basis.kron(s, _SIGMA_Z_HALF) + params.hbar_omega0 * basis.kron(num, np.eye(2))
    return OperatorMatrix(basis, h0)


def build_v(params: ModelParams, calc: QuadratureCalculus) -> OperatorMatrix:
    """Spin-flipping perturbation ``(i w/2){F (a - a^dag) + (a - a^dag) F} sigma_y``."""
    basis = calc.basis
    f = calc.fock_function(rotation_bracket(params))
    a = _fock_ladder(basis.n_max)
    d = a - a.T
    sym = 0.5 * params.hbar_omega0 * (f @ d + d @ f)
    return OperatorMatrix(basis, basis.kron(sym, _I_SIGMA_Y))


def build_w(params: ModelParams, calc: QuadratureCalculus) -> OperatorMatrix:
    """Spin-diagonal remainder ``w F(X)^2``."""
    br = rotation_bracket(params)
    return apply_scalar_function(calc, lambda x: params.hbar_omega0 * br(x) ** 2)


def h0_sector(params: ModelParams, calc: QuadratureCalculus, m: float) -> np.ndarray:
    """Fock-space block of ``H0`` for spin projection ``m``."""
    if m not in (0.5, -0.5):
        raise ContractError(f"spin projection must be +-1/2, got {m}")
    s = calc.fock_function(_dressed_splitting(params))
    num = np.diag(np.arange(calc.basis.fock_dim, dtype=float))
    return m * s + params.hbar_omega0 * num


def h0_eigenstates(params: ModelParams, calc: QuadratureCalculus,
                   m: float) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenpairs of one spin sector of ``H0``.

    The sector is a one-dimensional oscillator with an even potential, so the
    sorted position on the truncation-safe interior equals the oscillator
    quantum number ``n``.
    """
    return linalg.eigh(h0_sector(params, calc, m))


def interior_indices(basis: FockSpinBasis, frac: float = 0.6) -> np.ndarray:
    """Basis indices whose Fock number lies in the lowest ``frac`` of the space."""
    return np.flatnonzero(basis.fock_numbers < frac * basis.fock_dim)


def decomposition_residual(params: ModelParams, calc: QuadratureCalculus,
                           frac: float = 0.6) -> float:
    """``max |H' - (H0 + V + W)|`` over the interior block."""
    h = build_hamiltonian(params, calc.basis)
    hp = rotate_hamiltonian(h, build_unitary(params, calc))
    parts = build_h0(params, calc) + build_v(params, calc) + build_w(params, calc)
    idx = interior_indices(calc.basis, frac)
    diff = (hp - parts).matrix[np.ix_(idx, idx)]
    return float(np.max(np.abs(diff)))
