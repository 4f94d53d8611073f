"""Position-grid solver for the separated rotated-frame problem.

For spin projection ``m`` the oscillator part ``u(y)`` of an ``H0`` eigenstate
satisfies

    (E + w/2) u = (w/2) (-u'' + y^2 u) + m sqrt(dE^2 + 8 U^2 y^2) u,

which is ``H0`` with ``X -> sqrt(2) y``.  It is discretized with second-order
central differences on ``[-L, L]`` (Dirichlet ends) and eigenvalues are
Richardson-extrapolated from spacings ``h`` and ``2h``.

The dressed transition energy is also available in closed semiclassical form
(:func:`wkb_dressed_energy`): the orbit average of ``sqrt(dE^2 + 8 U^2 y^2)``
over a classical oscillator orbit of energy ``eps = 2n + 1``.
"""

from __future__ import annotations

import math
from functools import lru_cache
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import linalg, optimize, special

from .model import ModelParams, derive_g

__all__ = [
    "GridConfigurationError",
    "QuadratureError",
    "GridEigenproblem",
    "GridFunction",
    "DressedLevelIndex",
    "solve_effective_oscillator",
    "solve_level",
    "level_energy",
    "wkb_dressed_energy",
    "dressed_level_energy",
    "grid_dressed_gap",
    "rotated_eigenfunction_pair",
]

WKB_NODES = 200
WKB_MAX_NODES = 6400
EDGE_MARGIN = 8.0


class GridConfigurationError(ValueError):
    """Box or level request inconsistent with the problem."""


class QuadratureError(ArithmeticError):
    def __init__(self, message: str, achieved: float):
        super().__init__(f"{message} (achieved relative tolerance {achieved:.3e})")
        self.achieved = achieved


def _potential(params: ModelParams, m: float, y: np.ndarray) -> np.ndarray:
    w = params.hbar_omega0
    s = np.sqrt(params.delta_e ** 2 + 8.0 * params.coupling_u ** 2 * y * y)
    return 0.5 * w * y * y + m * s - 0.5 * w


def _turning_point(params: ModelParams, m: float, energy: float) -> float:
    f = lambda y: _potential(params, m, np.asarray(y)) - energy
    hi = max(1.0, math.sqrt(2 * abs(energy) / params.hbar_omega0) + 1.0)
    while f(hi) < 0:
        hi *= 2.0
    if f(0.0) >= 0:
        return 0.0
    return optimize.brentq(f, 0.0, hi)


def _energy_bound(params: ModelParams, n_target: int, m: float) -> float:
    # generous upper estimate of level n_target's energy
    dressed = wkb_dressed_energy(derive_g(params), max(n_target, 1), params.delta_e,
                                 n_ref=params.n_ref)
    return (n_target + 2) * params.hbar_omega0 + m * dressed


def _default_spacing(epsilon: float) -> float:
    # Richardson-extrapolated error ~ 1e-4 eps^3 h^4 for the top level
    return min(0.05, 0.07 * epsilon ** -0.75)


@dataclass(frozen=True)
class GridEigenproblem:
    """Uniform grid ``y_i = -L + i h``, ``i = 0..N`` (``N`` even) for levels up to ``n_target``.

    Use :meth:`for_levels` to get a box and spacing sized for the request.
    """

    params: ModelParams
    n_target: int
    half_width: float
    spacing: float

    def __post_init__(self):
        need = 1.5 * math.sqrt(self.epsilon)
        if self.half_width < need:
            raise GridConfigurationError(
                f"box half-width {self.half_width:g} < 1.5 sqrt(2n+1) = {need:g}")
        for m in (0.5, -0.5):
            yt = _turning_point(self.params, m, _energy_bound(self.params, self.n_target, m))
            if yt >= self.half_width:
                raise GridConfigurationError(
                    f"classical turning point {yt:g} (m={m:+g}) lies outside the box "
                    f"[-{self.half_width:g}, {self.half_width:g}]")

    @classmethod
    def for_levels(cls, params: ModelParams, n_target: int, spacing: float | None = None,
                   half_width: float | None = None) -> "GridEigenproblem":
        eps = 2 * n_target + 1
        if spacing is None:
            spacing = _default_spacing(eps)
        if half_width is None:
            yt = max(_turning_point(params, m, _energy_bound(params, n_target, m))
                     for m in (0.5, -0.5))
            half_width = max(1.5 * math.sqrt(eps), yt + EDGE_MARGIN)
        return cls(params, int(n_target), float(half_width), float(spacing))

    @property
    def epsilon(self) -> float:
        return 2 * self.n_target + 1

    @property
    def n_intervals(self) -> int:
        n = int(math.ceil(2 * self.half_width / self.spacing))
        return n + (n % 2)

    @property
    def y(self) -> np.ndarray:
        """All grid points including the Dirichlet ends."""
        return np.linspace(-self.half_width, self.half_width, self.n_intervals + 1)

    @property
    def h(self) -> float:
        return 2 * self.half_width / self.n_intervals

    def refined(self, factor: float = 2.0) -> "GridEigenproblem":
        return GridEigenproblem(self.params, self.n_target, self.half_width,
                                self.spacing / factor)

    def widened(self, factor: float = 2.0) -> "GridEigenproblem":
        return GridEigenproblem(self.params, self.n_target, self.half_width * factor,
                                self.spacing)


@dataclass(frozen=True, eq=False)
class GridFunction:
    y: np.ndarray
    values: np.ndarray

    @property
    def h(self) -> float:
        return float(self.y[1] - self.y[0])

    @property
    def norm(self) -> float:
        return float(np.trapezoid(self.values ** 2, self.y))

    def inner(self, other: "GridFunction") -> float:
        return float(np.trapezoid(self.values * other.values, self.y))

    def derivative(self) -> np.ndarray:
        return np.gradient(self.values, self.h)

    def node_count(self, rel_tol: float = 1e-6) -> int:
        v = self.values
        keep = np.abs(v) > rel_tol * np.max(np.abs(v))
        s = np.sign(v[keep])
        return int(np.count_nonzero(s[1:] != s[:-1]))

    def edge_amplitude(self) -> float:
        """Largest ``|u|`` within the outer 1% of the box, relative to ``max |u|``."""
        v = np.abs(self.values)
        k = max(2, len(v) // 100)
        return float(max(v[:k].max(), v[-k:].max()) / v.max())

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="\n") as fh:
            fh.write("y,u\n")
            for a, b in zip(self.y, self.values):
                fh.write(f"{a:.17g},{b:.17g}\n")


@dataclass(frozen=True)
class DressedLevelIndex:
    n: int
    m: float

    def __post_init__(self):
        if self.n < 0 or int(self.n) != self.n:
            raise GridConfigurationError(f"oscillator number must be a non-negative integer, got {self.n}")
        if self.m not in (0.5, -0.5):
            raise GridConfigurationError(f"spin projection must be +-1/2, got {self.m}")


def _tridiagonal(params: ModelParams, m: float, y_inner: np.ndarray, h: float):
    w = params.hbar_omega0
    d = w / h ** 2 + _potential(params, m, y_inner)
    e = np.full(len(y_inner) - 1, -0.5 * w / h ** 2)
    return d, e


def _fix_sign(v: np.ndarray) -> np.ndarray:
    # first lobe positive, for reproducible output
    i = np.argmax(np.abs(v) > 1e-3 * np.max(np.abs(v)))
    return v if v[i] > 0 else -v


def solve_effective_oscillator(params: ModelParams, m: float, n_levels: int,
                               grid: GridEigenproblem, start: int = 0,
                               richardson: bool = True) -> list[tuple[float, GridFunction]]:
    """Eigenpairs ``start .. start + n_levels - 1`` of the spin-``m`` grid problem.

    Energies follow the ``E + w/2`` convention on the left-hand side, so the
    uncoupled limit gives ``n w + m dE``.
    """
    if m not in (0.5, -0.5):
        raise GridConfigurationError(f"spin projection must be +-1/2, got {m}")
    last = start + n_levels - 1
    if n_levels < 1 or last > grid.n_target:
        raise GridConfigurationError(
            f"levels {start}..{last} not covered by grid sized for n <= {grid.n_target}")
    if grid.params != params:
        raise GridConfigurationError("grid was built for different parameters")
    y = grid.y
    h = grid.h
    d, e = _tridiagonal(params, m, y[1:-1], h)
    w, v = linalg.eigh_tridiagonal(d, e, select="i", select_range=(start, last))
    if richardson:
        yc = y[::2]
        dc, ec = _tridiagonal(params, m, yc[1:-1], 2 * h)
        wc = linalg.eigh_tridiagonal(dc, ec, eigvals_only=True, select="i",
                                     select_range=(start, last))
        w = (4.0 * w - wc) / 3.0
    out = []
    for j in range(n_levels):
        vals = np.zeros(len(y))
        vals[1:-1] = _fix_sign(v[:, j]) / math.sqrt(h)
        out.append((float(w[j]), GridFunction(y, vals)))
    return out


def solve_level(params: ModelParams, idx: DressedLevelIndex,
                grid: GridEigenproblem) -> tuple[float, GridFunction]:
    return solve_effective_oscillator(params, idx.m, 1, grid, start=idx.n)[0]


def level_energy(params: ModelParams, idx: DressedLevelIndex, grid: GridEigenproblem,
                 richardson: bool = True) -> float:
    """Energy of one grid level without computing its eigenfunction."""
    if idx.n > grid.n_target:
        raise GridConfigurationError(f"level {idx.n} not covered by grid sized for n <= {grid.n_target}")
    y = grid.y
    h = grid.h
    d, e = _tridiagonal(params, idx.m, y[1:-1], h)
    w = linalg.eigh_tridiagonal(d, e, eigvals_only=True, select="i",
                                select_range=(idx.n, idx.n))[0]
    if not richardson:
        return float(w)
    dc, ec = _tridiagonal(params, idx.m, y[::2][1:-1], 2 * h)
    wc = linalg.eigh_tridiagonal(dc, ec, eigvals_only=True, select="i",
                                 select_range=(idx.n, idx.n))[0]
    return float((4.0 * w - wc) / 3.0)


@lru_cache(maxsize=16)
def _gauss_legendre(k: int) -> tuple[np.ndarray, np.ndarray]:
    x, wts = special.roots_legendre(k)
    return np.sin(0.5 * math.pi * x) ** 2, wts


def wkb_dressed_energy(g: float, n: float, delta_e: float, nodes: int = WKB_NODES,
                       rtol: float = 1e-12, n_ref: float | None = None) -> float:
    """Semiclassical dressed transition energy ``dE(g)``.

    ``(dE/pi) int_{-sqrt(eps)}^{sqrt(eps)} sqrt((1 + 8 g^2 y^2 / n) / (eps - y^2)) dy``
    with ``eps = 2n + 1``, evaluated after ``y = sqrt(eps) sin(theta)`` as a
    Gauss-Legendre sum of the smooth integrand ``sqrt(1 + (8 g^2 eps / n) sin^2 theta)``.
    The node count doubles from ``nodes`` until successive sums agree to
    ``rtol``.

    ``n_ref`` is the photon number defining ``g`` if it differs from the orbit's
    ``n`` (defaults to ``n``), i.e. the coefficient is ``8 g^2 / n_ref``.
    """
    if g < 0:
        raise ValueError(f"g must be non-negative, got {g}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    n_ref = n if n_ref is None else n_ref
    a = 8.0 * g * g * (2 * n + 1) / n_ref
    if a == 0.0:
        return float(delta_e)

    def rule(k: int) -> float:
        s2, wts = _gauss_legendre(k)
        # (1/pi) * (pi/2) * sum
        return 0.5 * float(np.dot(wts, np.sqrt(1.0 + a * s2)))

    k = nodes
    prev = rule(k)
    while True:
        cur = rule(2 * k)
        err = abs(cur - prev) / abs(cur)
        if err <= rtol:
            return delta_e * cur
        if 2 * k >= WKB_MAX_NODES:
            raise QuadratureError("WKB quadrature did not converge", err)
        k *= 2
        prev = cur


def dressed_level_energy(idx: DressedLevelIndex, g: float, params: ModelParams) -> float:
    """Dressed ladder ``E_{n,m}(g) = dE(g) m + w n`` with ``dE(g)`` at ``n_ref``."""
    return wkb_dressed_energy(g, params.n_ref, params.delta_e) * idx.m \
        + params.hbar_omega0 * idx.n


def grid_dressed_gap(params: ModelParams, n: int, grid: GridEigenproblem | None = None) -> float:
    """``E_{n,+1/2} - E_{n,-1/2}`` from the grid solver."""
    grid = grid or GridEigenproblem.for_levels(params, n)
    return (level_energy(params, DressedLevelIndex(n, 0.5), grid)
            - level_energy(params, DressedLevelIndex(n, -0.5), grid))


def rotated_eigenfunction_pair(params: ModelParams, low: DressedLevelIndex,
                               high: DressedLevelIndex,
                               grid: GridEigenproblem | None = None
                               ) -> tuple[GridFunction, GridFunction]:
    """Grid eigenfunctions ``u_{n,m}`` and ``u_{n',m-1}`` on one shared grid."""
    if low.m - high.m != 1:
        raise GridConfigurationError(
            f"pair must differ by one unit of spin projection, got {low.m:+g} and {high.m:+g}")
    grid = grid or GridEigenproblem.for_levels(params, max(low.n, high.n))
    _, u_low = solve_level(params, low, grid)
    _, u_high = solve_level(params, high, grid)
    return u_low, u_high
