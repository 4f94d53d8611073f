"""
Splitting at multiphoton resonances
===================================

Locate each odd-photon resonance, track the two exact levels through the
anticrossing, and compare the minimum gap with the weak-coupling power law.
"""

import numpy as np

from bsshift import (ModelParams, branch_energies, crossing_gap, exact_splitting,
                     find_resonance, fit_two_level, shirley_splitting)

params = ModelParams(11.0, n_ref=60.0)

print("2k+1   g0(WKB)   g0(exact)   gap exact    gap Shirley")
for k in range(6, 11):
    wkb = find_resonance(k, params)
    ex = exact_splitting(k, params)
    sh = shirley_splitting(k, ex.g_at_min, params)
    print(f"{2 * k + 1:4d}  {wkb.g0:8.5f}  {ex.g_at_min:9.6f}  {ex.gap:11.4e}  {sh.gap:11.4e}")

# close to the minimum the two branches look like a 2x2 problem
ex = exact_splitting(6, params)
half = 6 * ex.gap / 13 * ex.g_at_min
g = np.linspace(ex.g_at_min - half, ex.g_at_min + half, 41)
lower, upper = branch_energies(ex, params, g)
model = fit_two_level(g, lower, upper)
print(f"\ntwo-level fit: 2|v| = {2 * model.v:.4e} vs gap {ex.gap:.4e}")

# an even number of quanta connects opposite parities: a true crossing
print("12-quantum crossing gap:", crossing_gap(12, params).gap)
