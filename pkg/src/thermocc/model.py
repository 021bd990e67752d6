"""Single-impurity Anderson model: parameters, bath discretization, occupations.

Units: energies in eV, times in 1/eV (hbar = 1). The electronic bath is a
flat band of half-width D, discretized logarithmically; the impurity level
may be driven harmonically in time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ConfigError",
    "SiamConfig",
    "BathDiscretization",
    "Occupations",
    "build_bath",
    "occupation",
    "impurity_level",
]


class CapacityError(RuntimeError):
    """A requested problem size exceeds a method's resource guard."""


class ConfigError(ValueError):
    """Raised when a parameter set violates a model invariant."""


@dataclass(frozen=True)
class SiamConfig:
    """All physical and numerical parameters of a run.

    Defaults are the base case used throughout: an asymmetric impurity at
    epsilon0 = -0.08 eV hybridized with strength V = 0.04 eV to a flat band
    of half-width 1 eV, Hubbard U = 0.1 eV, k_B*T = 0.04 eV.
    """

    epsilon0: float = -0.08
    V: float = 0.04
    U: float = 0.1
    temperature: float = 0.04
    gamma: float = 0.0
    delta_eps: float = 0.0
    omega: float = 0.0
    lambda_disc: float = 1.1
    n_bath: int = 30
    band_halfwidth: float = 1.0
    dt: float = 0.01
    t_final: float = 200.0
    init_imp_occ_alpha: float = 1.0
    init_imp_occ_beta: float = 0.0
    tebd_dt: float = 0.005
    svd_threshold: float = 1e-10
    max_bond: int = 200
    out_stride: int = 10

    def __post_init__(self):
        if not self.lambda_disc > 1.0:
            raise ConfigError(f"lambda_disc must be > 1, got {self.lambda_disc}")
        if self.n_bath <= 0:
            raise ConfigError(f"n_bath must be a positive integer, got {self.n_bath}")
        if not self.dt > 0:
            raise ConfigError(f"dt must be > 0, got {self.dt}")
        if not self.tebd_dt > 0:
            raise ConfigError(f"tebd_dt must be > 0, got {self.tebd_dt}")
        if not self.band_halfwidth > 0:
            raise ConfigError(f"band_halfwidth must be > 0, got {self.band_halfwidth}")
        if self.gamma < 0:
            raise ConfigError(f"gamma must be >= 0, got {self.gamma}")
        if self.temperature < 0:
            raise ConfigError(f"temperature must be >= 0, got {self.temperature}")
        for name in ("init_imp_occ_alpha", "init_imp_occ_beta"):
            x = getattr(self, name)
            if not 0.0 <= x <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {x}")
        if self.t_final < 0:
            raise ConfigError(f"t_final must be >= 0, got {self.t_final}")
        if self.out_stride < 1:
            raise ConfigError(f"out_stride must be >= 1, got {self.out_stride}")
        if self.max_bond < 1:
            raise ConfigError(f"max_bond must be >= 1, got {self.max_bond}")
        if not 0.0 <= self.svd_threshold < 1.0:
            raise ConfigError(f"svd_threshold must lie in [0, 1), got {self.svd_threshold}")

    @property
    def n_orb(self) -> int:
        """Orbitals per spin: impurity plus bath levels."""
        return self.n_bath + 1


@dataclass(frozen=True)
class BathDiscretization:
    """Discretized bath levels and impurity couplings, spin independent."""

    energies: np.ndarray  # shape (n_bath,), sorted ascending, symmetric about 0
    couplings: np.ndarray  # shape (n_bath,), positive, sum of squares = V^2


@dataclass(frozen=True)
class Occupations:
    """Reference thermal occupations v (and u = 1 - v) per spin orbital.

    Index 0 is the impurity; 1..n_bath follow the bath ordering of
    :class:`BathDiscretization`.
    """

    v_alpha: np.ndarray
    v_beta: np.ndarray

    @property
    def u_alpha(self) -> np.ndarray:
        return 1.0 - self.v_alpha

    @property
    def u_beta(self) -> np.ndarray:
        return 1.0 - self.v_beta

    def v(self, spin: str) -> np.ndarray:
        return self.v_alpha if spin == "a" else self.v_beta

    def u(self, spin: str) -> np.ndarray:
        return 1.0 - self.v(spin)


def build_bath(config: SiamConfig) -> BathDiscretization:
    """Logarithmic discretization of a flat band of half-width D.

    Each side of the band is split into n_bath/2 intervals
    [D*L^-(n+1), D*L^-n]; the representative level energy is the arithmetic
    midpoint of its interval, mirrored to negative energies. Couplings are
    width-weighted so that sum_i V_i^2 = V^2 (flat hybridization density).
    """
    if config.n_bath % 2 != 0:
        raise ConfigError(f"build_bath needs an even n_bath, got {config.n_bath}")
    half = config.n_bath // 2
    lam = config.lambda_disc
    d = config.band_halfwidth

    edges = d * lam ** -np.arange(half + 1, dtype=float)  # D, D/L, ..., D/L^half
    upper, lower = edges[:-1], edges[1:]
    mids = 0.5 * (upper + lower)
    widths = upper - lower

    energies = np.concatenate([-mids[::-1], mids])
    widths_full = np.concatenate([widths[::-1], widths])
    couplings = config.V * np.sqrt(widths_full / widths_full.sum())

    order = np.argsort(energies)
    return BathDiscretization(energies=energies[order], couplings=couplings[order])


def occupation(eps: float, temperature: float) -> float:
    """Fermi-Dirac occupation with chemical potential fixed at zero.

    At T = 0 this is the exact step: 1 below the Fermi level, 1/2 at it,
    0 above.
    """
    if temperature == 0.0:
        if eps < 0.0:
            return 1.0
        if eps > 0.0:
            return 0.0
        return 0.5
    x = eps / temperature
    # evaluate in the stable branch to avoid overflow for |x| >> 1
    if x >= 0:
        e = np.exp(-x)
        return float(e / (1.0 + e))
    return float(1.0 / (np.exp(x) + 1.0))


def impurity_level(t: float, config: SiamConfig) -> float:
    """Driven impurity level epsilon0 + delta_eps * sin(Omega t)."""
    if config.delta_eps == 0.0:
        return config.epsilon0
    return config.epsilon0 + config.delta_eps * np.sin(config.omega * t)


def reference_occupations(config: SiamConfig, bath: BathDiscretization) -> Occupations:
    """Occupations of the decoupled reference: configured impurity values,
    Fermi-Dirac bath at the run temperature."""
    bath_v = np.array([occupation(e, config.temperature) for e in bath.energies])
    v_a = np.concatenate([[config.init_imp_occ_alpha], bath_v])
    v_b = np.concatenate([[config.init_imp_occ_beta], bath_v])
    return Occupations(v_alpha=v_a, v_beta=v_b)
