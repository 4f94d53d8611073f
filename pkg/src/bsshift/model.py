"""Physical parameters of the spin-boson problem and the dimensionless coupling.

Energies are carried in the same units as ``hbar_omega0``; with the default
``hbar_omega0 = 1`` every reported energy is in units of the oscillator quantum.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

__all__ = [
    "ParameterError",
    "RegimeWarning",
    "ModelParams",
    "derive_g",
    "coupling_for_g",
    "REGIME_MIN_RATIO",
    "REGIME_MIN_PHOTONS",
]

# multiphoton regime thresholds: delta_e / hbar_omega0 and n_ref
REGIME_MIN_RATIO = 5.0
REGIME_MIN_PHOTONS = 20.0


class ParameterError(ValueError):
    """Raised for physically invalid model parameters."""


class RegimeWarning(UserWarning):
    """Emitted when an approximation is used outside the multiphoton regime."""


@dataclass(frozen=True)
class ModelParams:
    """Inputs of the spin-boson Hamiltonian.

    Attributes
    ----------
    delta_e : float
        Bare two-level transition energy.
    hbar_omega0 : float
        Oscillator quantum (the energy unit, normally 1).
    coupling_u : float
        Linear coupling strength ``U``.
    n_ref : float
        Reference photon number used to define the dimensionless coupling.
        Real valued so that ``g`` can be held fixed while the basis changes.
    """

    delta_e: float
    hbar_omega0: float = 1.0
    coupling_u: float = 0.0
    n_ref: float = 60.0

    def __post_init__(self):
        for name in ("delta_e", "hbar_omega0", "coupling_u", "n_ref"):
            if not math.isfinite(getattr(self, name)):
                raise ParameterError(f"{name} must be finite")
        if self.delta_e <= 0:
            raise ParameterError(f"delta_e must be positive, got {self.delta_e}")
        if self.hbar_omega0 <= 0:
            raise ParameterError(f"hbar_omega0 must be positive, got {self.hbar_omega0}")
        if self.coupling_u < 0:
            raise ParameterError(f"coupling_u must be non-negative, got {self.coupling_u}")
        if self.n_ref < 1:
            raise ParameterError(f"n_ref must be >= 1, got {self.n_ref}")

    @property
    def regime_ok(self) -> bool:
        return (self.delta_e / self.hbar_omega0 >= REGIME_MIN_RATIO
                and self.n_ref >= REGIME_MIN_PHOTONS)

    def check_regime(self, what: str = "this approximation") -> bool:
        if not self.regime_ok:
            warnings.warn(
                f"{what} assumes delta_e/hbar_omega0 >= {REGIME_MIN_RATIO:g} and "
                f"n_ref >= {REGIME_MIN_PHOTONS:g}; got {self.delta_e / self.hbar_omega0:g} "
                f"and {self.n_ref:g}",
                RegimeWarning,
                stacklevel=3,
            )
        return self.regime_ok

    @property
    def g(self) -> float:
        return derive_g(self)

    def with_g(self, g: float) -> "ModelParams":
        """Copy with ``coupling_u`` set so that the dimensionless coupling is ``g``."""
        return replace(self, coupling_u=coupling_for_g(g, self))

    def with_coupling(self, coupling_u: float) -> "ModelParams":
        return replace(self, coupling_u=coupling_u)


def derive_g(params: ModelParams) -> float:
    """Dimensionless coupling ``g = U sqrt(n_ref) / delta_e``."""
    return params.coupling_u * math.sqrt(params.n_ref) / params.delta_e


def coupling_for_g(g: float, params: ModelParams) -> float:
    """Coupling energy ``U`` that realises dimensionless coupling ``g``."""
    if g < 0 or not math.isfinite(g):
        raise ParameterError(f"g must be finite and non-negative, got {g}")
    if params.n_ref <= 0:
        raise ParameterError("n_ref must be positive")
    return g * params.delta_e / math.sqrt(params.n_ref)
