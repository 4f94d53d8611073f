"""
Dressed transition energy
=========================

In the rotated frame each spin projection sees an oscillator with potential
y^2 +- sqrt(dE^2 + 8 U^2 y^2).  The splitting of the two ladders grows with
coupling; a semiclassical integral captures it well.
"""

from bsshift import ModelParams, grid_dressed_gap, wkb_dressed_energy

n = 100
print(" g      WKB         grid        rel. diff")
for g in (0.0, 0.1, 0.3, 0.6, 1.0):
    p = ModelParams(11.0, n_ref=n).with_g(g)
    wkb = wkb_dressed_energy(g, n, 11.0)
    grid = grid_dressed_gap(p, n)
    print(f"{g:4.1f}  {wkb:10.6f}  {grid:10.6f}  {abs(wkb - grid) / grid:.1e}")

# the resonance with 2k+1 quanta sits where this energy reaches (2k+1) w
