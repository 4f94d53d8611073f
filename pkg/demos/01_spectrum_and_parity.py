"""
Exact spectrum of the spin-boson model
======================================

Build the Hamiltonian in a truncated Fock x spin basis, diagonalize it, and
look at how parity organizes the levels.
"""

import numpy as np

from bsshift import FockSpinBasis, ModelParams, build_hamiltonian, diagonalize, parity_operator

# a two-level system 11 oscillator quanta wide, large photon numbers
params = ModelParams(delta_e=11.0, hbar_omega0=1.0, n_ref=60.0)
basis = FockSpinBasis(120)

# without coupling the spectrum is two shifted ladders n w +- dE/2
spec = diagonalize(build_hamiltonian(params, basis))
print("uncoupled, lowest six:", spec.eigenvalues[:6])

# switch on the coupling at g = U sqrt(n)/dE = 0.4
h = build_hamiltonian(params.with_g(0.4), basis)
print("coupling U =", params.with_g(0.4).coupling_u)

# parity sigma_z (-1)^N commutes with H, so every eigenvector has a label
print("|[P, H]| =", h.commutator_norm(parity_operator(basis)))
spec = diagonalize(h)
near = np.argsort(np.abs(spec.eigenvalues - 60.0))[:6]
for j in sorted(near):
    print(f"  E = {spec.eigenvalues[j]:10.5f}   parity {spec.parity_labels[j]:+d}")

# levels of opposite parity may cross; same-parity levels repel
