"""Multiphoton Bloch-Siegert resonances of the spin-boson model.

Exact truncated-Fock spectra, the rotated-frame decomposition ``H0 + V + W``,
a position-grid solver for the dressed levels, and three estimates of the
level splitting at the odd-photon anticrossings.
"""

__version__ = "0.1.0"

from .model import ModelParams, ParameterError, RegimeWarning, coupling_for_g, derive_g
from .fockspin import (ContractError, FockSpinBasis, OperatorMatrix, Spectrum, build_hamiltonian,
                       build_ladder, diagonalize, parity_operator)
from .rotation import (QuadratureCalculus, apply_scalar_function, build_h0, build_unitary,
                       build_v, build_w, decomposition_residual, rotate_hamiltonian)
from .grid1d import (DressedLevelIndex, GridEigenproblem, GridFunction, dressed_level_energy,
                     grid_dressed_gap, rotated_eigenfunction_pair, solve_effective_oscillator, wkb_dressed_energy)
from .resonance import (SplittingResult, branch_energies, crossing_gap, degenerate_pt_splitting,
                        exact_splitting, find_resonance, fit_two_level, shirley_splitting,
                        verify_rotated_pt_in_matrix_rep)
