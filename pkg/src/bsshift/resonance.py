"""Bloch-Siegert resonances and the level splitting at their anticrossings.

Near the ``(2k+1)``-photon resonance the states ``|n, +1/2>`` and
``|n + 2k + 1, -1/2>`` become degenerate in the rotated-frame ``H0`` and
anticross in the full Hamiltonian.  Three estimates of the splitting are
provided:

* :func:`exact_splitting`: minimum adiabatic gap of the exact spin-boson
  spectrum, found by overlap tracking across a coarse g-scan followed by a
  golden-section search;
* :func:`shirley_splitting`: the weak-coupling closed form;
* :func:`degenerate_pt_splitting`: ``2 |<psi_{n,+}| V |psi_{n+2k+1,-}>|`` with
  grid eigenfunctions of ``H0``.

The pair is chosen so that its mean photon number ``n + k + 1/2`` is as close
as possible to ``params.n_ref``; every g reported by these functions is
referenced to that mean (see :func:`resonant_pair`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy import optimize
from scipy.special import gammaln

from .fockspin import FockSpinBasis, block_eigenvalues, block_eigh
from .grid1d import (DressedLevelIndex, GridEigenproblem, GridFunction, level_energy, solve_level,
                     wkb_dressed_energy)
from .model import ModelParams, coupling_for_g
from .rotation import QuadratureCalculus, build_v, build_w, h0_eigenstates

__all__ = [
    "NoResonanceError",
    "ResonanceRangeError",
    "LevelTrackingError",
    "LabelingError",
    "TruncationError",
    "ResonantPair",
    "ResonanceResult",
    "TwoLevelModel",
    "SplittingResult",
    "PTComparison",
    "resonant_pair",
    "find_resonance",
    "shirley_splitting",
    "shirley_log_gap",
    "golden_section",
    "track_levels",
    "exact_splitting",
    "crossing_gap",
    "branch_energies",
    "fit_two_level",
    "pt_matrix_element",
    "degenerate_pt_splitting",
    "verify_rotated_pt_in_matrix_rep",
]

DEFAULT_N_MAX = 200
G_MAX = 5.0
# half-width of the scan window in units of the oscillator quantum of detuning;
# neighbouring resonances of the same adiabatic level sit at +-2
DETUNING_WINDOW = 0.75
TRUNCATION_FRAC = 0.9
TRUNCATION_TOL = 1e-8


class NoResonanceError(ValueError):
    """The requested photon number is below the bare transition energy."""


class ResonanceRangeError(ValueError):
    """Resonance not bracketed within the searched coupling range."""


class LevelTrackingError(RuntimeError):
    """Eigenvector continuation became ambiguous; rerun with a finer scan."""


class LabelingError(RuntimeError):
    """Matrix-representation eigenstates could not be matched to grid levels."""


class TruncationError(ValueError):
    """Tracked eigenstates reach into the top of the truncated Fock space."""


@dataclass(frozen=True)
class ResonantPair:
    k: int
    n_low: int

    @property
    def photons(self) -> int:
        return 2 * self.k + 1

    @property
    def n_high(self) -> int:
        return self.n_low + self.photons

    @property
    def n_mean(self) -> float:
        return self.n_low + self.photons / 2

    @property
    def low(self) -> DressedLevelIndex:
        return DressedLevelIndex(self.n_low, 0.5)

    @property
    def high(self) -> DressedLevelIndex:
        return DressedLevelIndex(self.n_high, -0.5)

    @property
    def parity(self) -> int:
        return 1 if self.n_low % 2 == 0 else -1


@dataclass(frozen=True)
class ResonanceResult:
    k: int
    g0: float
    residual: float
    method: str
    n_ref: float

    @property
    def two_k_plus_one(self) -> int:
        return 2 * self.k + 1


@dataclass(frozen=True)
class SplittingResult:
    k: int
    g_at_min: float
    gap: float
    method: str
    diagnostics: dict = field(default_factory=dict, compare=False)

    @property
    def two_k_plus_one(self) -> int:
        return 2 * self.k + 1


@dataclass(frozen=True)
class TwoLevelModel:
    """Two diabatic levels ``e_i(g) = a_i + b_i g`` coupled by a constant ``v``."""

    a0: float
    b0: float
    a1: float
    b1: float
    v: float

    def diabatic(self, g):
        g = np.asarray(g, dtype=float)
        return self.a0 + self.b0 * g, self.a1 + self.b1 * g

    def adiabatic(self, g):
        e0, e1 = self.diabatic(g)
        mid = 0.5 * (e0 + e1)
        half = np.sqrt(0.25 * (e0 - e1) ** 2 + self.v ** 2)
        return mid - half, mid + half

    def amplitudes(self, g: float) -> tuple[np.ndarray, np.ndarray]:
        """``(c0, c1)`` columns for the lower and upper branch at ``g``."""
        e0, e1 = self.diabatic(g)
        _, vec = np.linalg.eigh(np.array([[e0, self.v], [self.v, e1]]))
        return vec[:, 0], vec[:, 1]

    @property
    def g_cross(self) -> float:
        return (self.a1 - self.a0) / (self.b0 - self.b1)

    @property
    def splitting(self) -> float:
        lo, hi = self.adiabatic(self.g_cross)
        return float(hi - lo)


@dataclass(frozen=True)
class PTComparison:
    k: int
    g0: float
    grid_element: float
    matrix_element: float
    w_expectation: tuple[float, float]
    w_bound: float
    labels: dict = field(default_factory=dict, compare=False)

    @property
    def relative_difference(self) -> float:
        ref = max(abs(self.grid_element), abs(self.matrix_element))
        if ref == 0:
            return 0.0
        return abs(abs(self.grid_element) - abs(self.matrix_element)) / ref


def resonant_pair(k: int, n_ref: float) -> ResonantPair:
    """Pair ``(n, +1/2), (n + 2k + 1, -1/2)`` whose mean photon number is nearest ``n_ref``."""
    if k < 0:
        raise ValueError(f"resonance order must be >= 0, got {k}")
    n_low = max(0, int(math.floor(n_ref - k)))
    return ResonantPair(k, n_low)


def _pair_params(k: int, params: ModelParams) -> tuple[ResonantPair, ModelParams]:
    pair = resonant_pair(k, params.n_ref)
    return pair, replace(params, n_ref=pair.n_mean)


def _check_order(k: int, params: ModelParams) -> bool:
    """True when the resonance sits at zero coupling."""
    target = (2 * k + 1) * params.hbar_omega0
    if math.isclose(target, params.delta_e, rel_tol=1e-12):
        return True
    if target < params.delta_e:
        raise NoResonanceError(
            f"{2 * k + 1} quanta ({target:g}) is below the bare transition energy "
            f"{params.delta_e:g}; the dressed energy only increases with coupling")
    return False


def _wkb_root(target: float, params: ModelParams, g_max: float = G_MAX,
              xtol: float = 1e-14) -> float:
    f = lambda g: wkb_dressed_energy(g, params.n_ref, params.delta_e) - target
    if f(0.0) >= 0:
        return 0.0
    if f(g_max) < 0:
        raise ResonanceRangeError(f"dressed energy stays below {target:g} for g <= {g_max:g}")
    return optimize.brentq(f, 0.0, g_max, xtol=xtol, rtol=4 * np.finfo(float).eps)


def _pair_detuning_fn(pair: ResonantPair, params: ModelParams,
                      grid: GridEigenproblem) -> Callable[[float], float]:
    """``E_{n,+}(g) - E_{n+2k+1,-}(g)`` from the grid, on a fixed box and spacing."""

    def detuning(g: float) -> float:
        p = params.with_g(g)
        gp = GridEigenproblem(p, grid.n_target, grid.half_width, grid.spacing)
        return level_energy(p, pair.low, gp) - level_energy(p, pair.high, gp)

    return detuning


def _pair_grid(pair: ResonantPair, params: ModelParams, g_hi: float,
               grid: GridEigenproblem | None = None) -> GridEigenproblem:
    p = params.with_g(g_hi)
    if grid is None:
        return GridEigenproblem.for_levels(p, pair.n_high)
    return GridEigenproblem(p, max(grid.n_target, pair.n_high), grid.half_width, grid.spacing)


def find_resonance(k: int, params: ModelParams, method: str = "wkb", g_max: float = G_MAX,
                   tol: float = 1e-8, n_max: int = DEFAULT_N_MAX) -> ResonanceResult:
    """Coupling at which the dressed transition energy equals ``(2k+1) w``.

    ``method`` is ``"wkb"`` (semiclassical dressed energy at ``params.n_ref``),
    ``"grid"`` (degeneracy of the ``H0`` levels of :func:`resonant_pair`) or
    ``"exact-spectrum"`` (location of the minimum exact gap; ``residual`` is
    then that gap).
    """
    target = (2 * k + 1) * params.hbar_omega0
    if _check_order(k, params):
        return ResonanceResult(k, 0.0, 0.0, method, params.n_ref)
    if method == "wkb":
        g0 = _wkb_root(target, params, g_max)
        resid = abs(wkb_dressed_energy(g0, params.n_ref, params.delta_e) - target)
        return ResonanceResult(k, g0, resid, method, params.n_ref)
    if method == "grid":
        pair = resonant_pair(k, params.n_ref)
        g_guess = _wkb_root(target, replace(params, n_ref=pair.n_mean), g_max)
        g_guess *= math.sqrt(params.n_ref / pair.n_mean)
        lo, hi = 0.9 * g_guess, 1.1 * g_guess
        f = _pair_detuning_fn(pair, params, _pair_grid(pair, params, 1.5 * hi))
        while f(lo) > 0:
            lo *= 0.8
        while f(hi) < 0:
            hi *= 1.2
            if hi > g_max:
                raise ResonanceRangeError(f"no grid degeneracy for g <= {g_max:g}")
        g0 = optimize.brentq(f, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps)
        resid = abs(f(g0))
        if resid > tol:
            raise ResonanceRangeError(f"grid resonance residual {resid:.3e} exceeds {tol:.1e}")
        return ResonanceResult(k, g0, resid, method, params.n_ref)
    if method == "exact-spectrum":
        res = exact_splitting(k, params, n_max=n_max)
        return ResonanceResult(k, res.g_at_min, res.gap, method, res.diagnostics["n_mean"])
    raise ValueError(f"unknown method {method!r}")


def shirley_log_gap(k: int, g0: float, params: ModelParams) -> float:
    """``log`` of the weak-coupling splitting (``-inf`` at ``g0 = 0``)."""
    if g0 == 0:
        return -math.inf
    ratio = params.delta_e / params.hbar_omega0
    return ((2 * k + 1) * math.log(g0) - (2 * k - 1) * math.log(2.0)
            - 2.0 * gammaln(k + 1) + 2 * k * math.log(ratio) + math.log(params.delta_e))


def shirley_splitting(k: int, g0: float, params: ModelParams) -> SplittingResult:
    """Weak-coupling splitting ``g0^{2k+1} / (2^{2k-1} (k!)^2) (dE/w)^{2k} dE``."""
    if g0 < 0:
        raise ValueError(f"g0 must be non-negative, got {g0}")
    gap = math.exp(shirley_log_gap(k, g0, params))
    return SplittingResult(k, g0, gap, "shirley", {"weak_coupling_estimate": True})


def golden_section(f: Callable[[float], float], a: float, b: float,
                   xtol: float) -> tuple[float, float]:
    """Minimize a unimodal ``f`` on ``[a, b]`` to bracket width ``xtol``."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = min(a, b), max(a, b)
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > xtol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return (c, fc) if fc < fd else (d, fd)


def track_levels(g_values: np.ndarray, solve: Callable[[float], tuple[np.ndarray, np.ndarray]],
                 start: list[int], min_overlap: float = 0.9, fail_overlap: float = 0.5,
                 max_halvings: int = 10) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Follow eigenvectors across a parameter scan by maximal overlap.

    ``solve(g)`` returns ``(w, v)`` for a fixed window of eigenpairs.  Steps
    are halved while any tracked overlap is below ``min_overlap``.  Returns the
    visited g values (refinements included), the tracked energies and the
    column each tracked state occupied.
    """
    g_values = np.asarray(g_values, dtype=float)
    w, v = solve(g_values[0])
    cols = list(start)
    vecs = v[:, cols]
    gs, energies, where = [g_values[0]], [w[cols]], [list(cols)]
    for g_next in g_values[1:]:
        g_a = gs[-1]
        while g_a < g_next:
            step = g_next - g_a
            for depth in range(max_halvings + 1):
                g_b = g_next if step == g_next - g_a else g_a + step
                w2, v2 = solve(g_b)
                ov = np.abs(vecs.conj().T @ v2)
                best = ov.max(axis=1)
                if best.min() >= min_overlap:
                    break
                step /= 2
            if best.min() < fail_overlap:
                raise LevelTrackingError(
                    f"max eigenvector overlap {best.min():.3f} < {fail_overlap} between "
                    f"g={g_a:.10g} and g={g_b:.10g}; use a smaller scan step")
            choice = ov.argmax(axis=1)
            if len(set(choice.tolist())) < len(choice):
                raise LevelTrackingError(
                    f"two tracked levels map onto one eigenvector at g={g_b:.10g}; "
                    "use a smaller scan step")
            cols = choice.tolist()
            vecs = v2[:, cols]
            g_a = g_b
            gs.append(g_b)
            energies.append(w2[cols])
            where.append(list(cols))
    return np.array(gs), np.array(energies), np.array(where)


def _scan_window(k: int, pparams: ModelParams, g0: float) -> tuple[float, float]:
    w = pparams.hbar_omega0
    target = (2 * k + 1) * w
    lo_target = target - DETUNING_WINDOW * w
    g_lo = 0.8 * g0
    if lo_target > pparams.delta_e:
        g_lo = max(g_lo, _wkb_root(lo_target, pparams))
    g_hi = min(1.2 * g0, _wkb_root(target + DETUNING_WINDOW * w, pparams))
    return g_lo, g_hi


def _locate_pair_index(pair: ResonantPair, pparams: ModelParams, n_max: int, g: float,
                       coupling_sign: int) -> int:
    """Adiabatic index (within the pair's parity block) of the lower anticrossing level."""
    u = coupling_sign * coupling_for_g(g, pparams)
    w = block_eigenvalues(pparams, n_max, pair.parity, coupling_u=u)
    e_pred = pair.n_low * pparams.hbar_omega0 + 0.5 * pair.photons * pparams.hbar_omega0
    gaps = np.diff(w)
    mids = 0.5 * (w[1:] + w[:-1])
    cand = np.flatnonzero(gaps < pparams.hbar_omega0)
    if cand.size == 0:
        raise LevelTrackingError("no closely spaced level pair near the predicted resonance")
    return int(cand[np.argmin(np.abs(mids[cand] - e_pred))])


def _check_truncation(pparams: ModelParams, n_max: int, parity: int, index: int, u: float):
    _, v = block_eigh(pparams, n_max, parity, coupling_u=u, select=(index, index + 1))
    high = np.arange(n_max + 1) > TRUNCATION_FRAC * n_max
    pop = float(np.max(np.sum(v[high, :] ** 2, axis=0)))
    if pop >= TRUNCATION_TOL:
        raise TruncationError(
            f"tracked states carry population {pop:.2e} above Fock number "
            f"{TRUNCATION_FRAC * n_max:.0f}; increase n_max (currently {n_max})")
    return pop


def exact_splitting(k: int, params: ModelParams, n_max: int = DEFAULT_N_MAX,
                    scan_points: int = 101, g_rtol: float = 1e-9,
                    coupling_sign: int = 1, track_window: int = 2) -> SplittingResult:
    """Minimum exact gap of the ``(2k+1)``-photon anticrossing.

    The pair's parity block is scanned over ``scan_points`` couplings around
    the semiclassical resonance, the two levels are followed by eigenvector
    overlap, and the adiabatic gap is minimized by golden section.
    """
    pair, pp = _pair_params(k, params)
    if pair.n_high > TRUNCATION_FRAC * n_max:
        raise TruncationError(
            f"pair reaches Fock number {pair.n_high}; n_max={n_max} leaves no buffer")
    diag = {"n_max": n_max, "n_low": pair.n_low, "n_high": pair.n_high,
            "n_mean": pair.n_mean, "parity": pair.parity}
    if _check_order(k, pp):
        return SplittingResult(k, 0.0, 0.0, "exact", {**diag, "zero_coupling_degeneracy": True})

    g0 = _wkb_root((2 * k + 1) * pp.hbar_omega0, pp)
    g_lo, g_hi = _scan_window(k, pp, g0)
    j = _locate_pair_index(pair, pp, n_max, g0, coupling_sign)
    lo_col = max(0, j - track_window)
    hi_col = min(n_max, j + 1 + track_window)

    def coupling(g):
        return coupling_sign * coupling_for_g(g, pp)

    def solve(g):
        return block_eigh(pp, n_max, pair.parity, coupling_u=coupling(g),
                          select=(lo_col, hi_col))

    def adiabatic_gap(g):
        w = block_eigenvalues(pp, n_max, pair.parity, coupling_u=coupling(g),
                              select=(j, j + 1))
        return float(w[1] - w[0])

    scan = np.linspace(g_lo, g_hi, scan_points)
    gs, energies, _ = track_levels(scan, solve, [j - lo_col, j + 1 - lo_col])
    sep = np.abs(energies[:, 0] - energies[:, 1])
    i = int(np.argmin(sep))
    a = gs[max(i - 1, 0)]
    b = gs[min(i + 1, len(gs) - 1)]
    g_min, gap = golden_section(adiabatic_gap, a, b, xtol=g_rtol * max(g0, 1e-12))
    pop = _check_truncation(pp, n_max, pair.parity, j, coupling(g_min))
    diag.update({"index": j, "scan_window": (g_lo, g_hi), "scan_evaluations": len(gs),
                 "coupling_u": coupling(g_min), "g0_wkb": g0, "high_fock_population": pop})
    return SplittingResult(k, g_min, gap, "exact", diag)


def crossing_gap(photons: int, params: ModelParams, n_max: int = DEFAULT_N_MAX,
                 g_rtol: float = 1e-12) -> SplittingResult:
    """Minimum separation of ``|n,+1/2>`` and ``|n + photons, -1/2>`` for even ``photons``.

    The two levels lie in opposite parity sectors, so the search minimizes
    ``|E_a - E_b|`` across sectors; the result is a true crossing when it
    drops to rounding level.
    """
    if photons % 2:
        raise ValueError("crossing_gap is for an even number of quanta")
    w = params.hbar_omega0
    target = photons * w
    if target <= params.delta_e:
        raise NoResonanceError(f"{photons} quanta do not exceed the bare transition energy")
    n_low = max(0, int(round(params.n_ref - photons / 2)))
    n_mean = n_low + photons / 2
    pp = replace(params, n_ref=n_mean)
    p_low = 1 if n_low % 2 == 0 else -1
    p_high = -p_low
    g0 = _wkb_root(target, pp)
    g_lo = _wkb_root(target - 0.5 * w, pp) if target - 0.5 * w > pp.delta_e else 0.0
    g_hi = _wkb_root(target + 0.5 * w, pp)
    e_low = (n_low + 0.5 * photons) * w

    def nearest_index(parity):
        ev = block_eigenvalues(pp, n_max, parity, coupling_u=coupling_for_g(g0, pp))
        return int(np.argmin(np.abs(ev - e_low)))

    ja, jb = nearest_index(p_low), nearest_index(p_high)

    def separation(g):
        u = coupling_for_g(g, pp)
        ea = block_eigenvalues(pp, n_max, p_low, coupling_u=u, select=(ja, ja))[0]
        eb = block_eigenvalues(pp, n_max, p_high, coupling_u=u, select=(jb, jb))[0]
        return abs(ea - eb)

    g_min, gap = golden_section(separation, g_lo, g_hi, xtol=g_rtol * g0)
    return SplittingResult(photons // 2, g_min, gap, "exact",
                           {"n_low": n_low, "n_high": n_low + photons, "n_mean": n_mean,
                            "n_max": n_max, "crossing": True})


def branch_energies(result: SplittingResult, params: ModelParams, g_values: np.ndarray,
                    coupling_sign: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Lower and upper adiabatic energies of an :func:`exact_splitting` pair."""
    d = result.diagnostics
    pp = replace(params, n_ref=d["n_mean"])
    j = d["index"]
    lower, upper = [], []
    for g in np.asarray(g_values, dtype=float):
        w = block_eigenvalues(pp, d["n_max"], d["parity"],
                              coupling_u=coupling_sign * coupling_for_g(g, pp), select=(j, j + 1))
        lower.append(w[0])
        upper.append(w[1])
    return np.array(lower), np.array(upper)


def fit_two_level(g: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> TwoLevelModel:
    """Fit adiabatic branches to two linear diabats with constant coupling.

    The branch sum is linear in ``g`` and the squared branch difference is
    quadratic, ``(alpha + beta g)^2 + 4 v^2``, so both fits are linear least squares.
    """
    g = np.asarray(g, dtype=float)
    s1, s0 = np.polyfit(g, lower + upper, 1)
    c2, c1, c0 = np.polyfit(g, (upper - lower) ** 2, 2)
    beta = math.sqrt(max(c2, 0.0))
    alpha = c1 / (2 * beta) if beta > 0 else 0.0
    v2 = max(c0 - alpha ** 2, 0.0) / 4.0
    # diff = e0 - e1 = alpha + beta g, so e0 is the lower diabat before the crossing
    return TwoLevelModel(a0=(s0 + alpha) / 2, b0=(s1 + beta) / 2,
                         a1=(s0 - alpha) / 2, b1=(s1 - beta) / 2, v=math.sqrt(v2))


def pt_matrix_element(params: ModelParams, u_low: GridFunction, u_high: GridFunction) -> float:
    """``<u_low, +1/2| V |u_high, -1/2>`` in the position representation.

    With ``a - a^dag = sqrt(2) d/dy`` and the spin factor of unit modulus the
    element is ``(w/2) sqrt(2) int F (u_low u_high' - u_low' u_high) dy``.
    """
    y = u_low.y
    if u_high.y.shape != y.shape or not np.allclose(u_high.y, y):
        raise ValueError("eigenfunctions must share one grid")
    r = params.coupling_u / params.delta_e
    f = r / (1.0 + 8.0 * r * r * y * y)
    integrand = f * (u_low.values * u_high.derivative() - u_low.derivative() * u_high.values)
    return 0.5 * params.hbar_omega0 * math.sqrt(2.0) * float(np.trapezoid(integrand, y))


def degenerate_pt_splitting(k: int, params: ModelParams,
                            grid: GridEigenproblem | None = None) -> SplittingResult:
    """First-order degenerate-PT splitting in the rotated frame.

    The resonance is the degeneracy of the two ``H0`` grid levels; the
    splitting is twice the ``V`` matrix element between them there.
    ``grid`` optionally fixes the box half-width and spacing.
    """
    pair, pp = _pair_params(k, params)
    diag = {"n_low": pair.n_low, "n_high": pair.n_high, "n_mean": pair.n_mean}
    if _check_order(k, pp):
        return SplittingResult(k, 0.0, 0.0, "degenerate-pt", diag)
    res = find_resonance(k, pp, method="grid")
    p0 = pp.with_g(res.g0)
    g_template = _pair_grid(pair, pp, 1.5 * res.g0, grid)
    gp = GridEigenproblem(p0, g_template.n_target, g_template.half_width, g_template.spacing)
    _, u_low = solve_level(p0, pair.low, gp)
    _, u_high = solve_level(p0, pair.high, gp)
    element = pt_matrix_element(p0, u_low, u_high)
    diag.update({"residual": res.residual, "grid_spacing": gp.h,
                 "grid_half_width": gp.half_width, "element": element,
                 "coupling_u": p0.coupling_u})
    return SplittingResult(k, res.g0, 2.0 * abs(element), "degenerate-pt", diag)


def verify_rotated_pt_in_matrix_rep(k: int, params: ModelParams, n_max: int = DEFAULT_N_MAX,
                                    label_tol: float = 1e-3) -> PTComparison:
    """Evaluate the degenerate-PT element with Fock-space ``H0`` eigenvectors and
    the matrix ``V``, next to the grid evaluation at the same coupling."""
    pair, pp = _pair_params(k, params)
    if _check_order(k, pp):
        return PTComparison(k, 0.0, 0.0, 0.0, (0.0, 0.0), 0.0)
    pt = degenerate_pt_splitting(k, params)
    p0 = pp.with_g(pt.g_at_min)
    gp = GridEigenproblem.for_levels(p0, pair.n_high)
    e_low_grid, u_low = solve_level(p0, pair.low, gp)
    e_high_grid, u_high = solve_level(p0, pair.high, gp)
    grid_el = pt_matrix_element(p0, u_low, u_high)

    basis = FockSpinBasis(n_max)
    calc = QuadratureCalculus.for_basis(basis)
    w_plus, v_plus = h0_eigenstates(p0, calc, 0.5)
    w_minus, v_minus = h0_eigenstates(p0, calc, -0.5)
    labels = {"grid": (e_low_grid, e_high_grid),
              "matrix": (float(w_plus[pair.n_low]), float(w_minus[pair.n_high]))}
    dev = max(abs(labels["grid"][0] - labels["matrix"][0]),
              abs(labels["grid"][1] - labels["matrix"][1]))
    if dev > label_tol:
        near_lo = np.argsort(np.abs(w_plus - e_low_grid))[:3]
        near_hi = np.argsort(np.abs(w_minus - e_high_grid))[:3]
        raise LabelingError(
            f"matrix H0 levels do not match grid levels (max deviation {dev:.3e}); "
            f"nearest matrix indices to n={pair.n_low}: {near_lo.tolist()}, "
            f"to n={pair.n_high}: {near_hi.tolist()}")

    psi_low = np.zeros(basis.dim)
    psi_low[0::2] = v_plus[:, pair.n_low]
    psi_high = np.zeros(basis.dim)
    psi_high[1::2] = v_minus[:, pair.n_high]
    mat_el = build_v(p0, calc).sandwich(psi_low, psi_high).real
    w_op = build_w(p0, calc)
    w_exp = (w_op.sandwich(psi_low, psi_low).real, w_op.sandwich(psi_high, psi_high).real)
    bound = p0.hbar_omega0 * (p0.coupling_u / p0.delta_e) ** 2
    return PTComparison(k, pt.g_at_min, grid_el, mat_el, w_exp, bound, labels)
