"""Observable extraction and the U=0 quadratic-model oracle."""

from __future__ import annotations

import numpy as np

from .model import ConfigError, SiamConfig, build_bath, reference_occupations
from .trajectory import TrajectoryRecord

__all__ = ["impurity_observables", "total_number", "quadratic_oracle"]


def impurity_observables(numbers: dict) -> tuple:
    """(total population, spin polarization) of the impurity.

    ``numbers`` maps spin to the per-orbital density vector <a+_i a_i>.
    """
    na = float(np.real(numbers["a"][0]))
    nb = float(np.real(numbers["b"][0]))
    return na + nb, na - nb


def total_number(numbers: dict) -> float:
    """Total electron number: sum of densities over all spin orbitals."""
    return float(sum(np.real(v).sum() for v in numbers.values()))


def quadratic_oracle(config: SiamConfig, bath=None) -> TrajectoryRecord:
    """Exact U=0 closed-system dynamics from the one-body matrix.

    For a quadratic Hamiltonian the quench populations are
    n_i(t) = sum_k f_k |[exp(-i h t)]_{ik}|^2 with f the initial mode
    occupations; one eigendecomposition of h gives all times. Each spin
    evolves independently with its own initial impurity occupation.
    """
    if config.U != 0.0:
        raise ConfigError("quadratic oracle requires U = 0")
    if config.gamma != 0.0 or config.delta_eps != 0.0:
        raise ConfigError("quadratic oracle requires gamma = 0 and delta_eps = 0")
    if bath is None:
        bath = build_bath(config)
    occ = reference_occupations(config, bath)

    n = config.n_orb
    h = np.zeros((n, n))
    h[0, 0] = config.epsilon0
    h[np.arange(1, n), np.arange(1, n)] = bath.energies
    h[0, 1:] = bath.couplings
    h[1:, 0] = bath.couplings
    evals, vecs = np.linalg.eigh(h)

    times = np.arange(0, int(round(config.t_final / config.dt)) + 1, config.out_stride) * config.dt
    rec = TrajectoryRecord()
    for t in times:
        phases = np.exp(-1j * evals * t)
        prop = (vecs * phases) @ vecs.T.conj()  # exp(-i h t)
        dens = {}
        for s in ("a", "b"):
            f = occ.v(s)
            dens[s] = np.abs(prop) ** 2 @ f
        n_tot, pol = impurity_observables(dens)
        rec.add(
            float(t),
            n_imp_alpha=float(dens["a"][0]),
            n_imp_beta=float(dens["b"][0]),
            n_total=n_tot,
            polarization=pol,
            n_electrons=total_number(dens),
        )
    return rec
