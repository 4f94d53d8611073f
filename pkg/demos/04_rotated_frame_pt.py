"""
Degenerate perturbation theory in the rotated frame
===================================================

The rotated Hamiltonian is H0 + V + W.  At a resonance two H0 levels are
degenerate and V couples them; twice that element estimates the splitting.
"""

from bsshift import (FockSpinBasis, ModelParams, QuadratureCalculus, decomposition_residual,
                     degenerate_pt_splitting, exact_splitting, verify_rotated_pt_in_matrix_rep)

params = ModelParams(11.0, n_ref=60.0)

# the decomposition is an identity away from the truncation edge
calc = QuadratureCalculus.for_basis(FockSpinBasis(200))
print("|H' - (H0 + V + W)| =", decomposition_residual(params.with_g(0.5), calc))

print("\n2k+1   gap exact    gap PT      rel. diff")
for k in range(6, 11):
    ex = exact_splitting(k, params)
    pt = degenerate_pt_splitting(k, params)
    print(f"{2 * k + 1:4d}  {ex.gap:11.4e}  {pt.gap:11.4e}  {abs(pt.gap - ex.gap) / ex.gap:8.1%}")

# the same element from Fock-space eigenvectors, and the size of W
cmp = verify_rotated_pt_in_matrix_rep(6, params)
print(f"\ngrid element {cmp.grid_element:.6e}, matrix element {cmp.matrix_element:.6e}")
print(f"<W> = {max(cmp.w_expectation):.2e}, bound (U/dE)^2 = {cmp.w_bound:.2e}")
