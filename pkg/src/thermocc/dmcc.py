"""Cluster-amplitude storage and real-time propagation.

The density-matrix ket is parametrized as exp(T)|0> over the thermal
quasi-particle vacuum; amplitudes obey dT/dt = -i R with the residuals R
compiled by :mod:`thermocc.wick`. A fixed-step classical RK4 integrates the
quench from T(0) = 0 (decoupled thermal reference, coupling active for
t > 0). Trace preservation is structural: no scalar residual exists, so the
recorded trace deviation is identically zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import CapacityError, ConfigError, SiamConfig, build_bath, reference_occupations
from .observables import impurity_observables, total_number
from .thermofield import SPINS, build_super_hamiltonian, number_expectation
from .trajectory import TrajectoryRecord
from .wick import evaluate, generate_eom, scalar_residual_instructions

__all__ = ["ClusterAmplitudes", "rk4_step", "run_quench", "hermiticity_deviation"]

METHOD_ORDER = {"dmcc_s": "s", "dmcc_sd": "sd"}

# t2 memory above this bath size needs an explicit opt-in (3 blocks of
# (N_b+1)^4 complex doubles; 60 -> ~0.7 GB working set before RK4 stages)
LARGE_T2_BATH = 40


@dataclass
class ClusterAmplitudes:
    """Cluster amplitudes t1 (per spin) and optionally t2 (spin blocks)."""

    t1: dict  # spin -> (n, n) complex
    t2: dict | None  # {"aa","bb","ab"} -> (n, n, n, n) complex, or None
    time: float = 0.0

    @classmethod
    def zeros(cls, n_orb: int, order: str) -> "ClusterAmplitudes":
        t1 = {s: np.zeros((n_orb, n_orb), dtype=complex) for s in SPINS}
        t2 = None
        if order == "sd":
            t2 = {k: np.zeros((n_orb,) * 4, dtype=complex) for k in ("aa", "bb", "ab")}
        return cls(t1=t1, t2=t2)

    def as_dict(self) -> dict:
        return {"t1": self.t1, "t2": self.t2}

    def combine(self, others, coeffs, time) -> "ClusterAmplitudes":
        """self + sum coeff * other, as a new instance."""
        t1 = {s: self.t1[s] + sum(c * o["t1"][s] for o, c in zip(others, coeffs)) for s in SPINS}
        t2 = None
        if self.t2 is not None:
            t2 = {
                k: self.t2[k] + sum(c * o["t2"][k] for o, c in zip(others, coeffs))
                for k in self.t2
            }
        return ClusterAmplitudes(t1=t1, t2=t2, time=time)


def hermiticity_deviation(state: ClusterAmplitudes) -> float:
    """max over spins of max|t1 - t1^dagger|; a closed-system diagnostic."""
    return max(float(np.abs(state.t1[s] - state.t1[s].conj().T).max()) for s in SPINS)


def antisymmetry_deviation(state: ClusterAmplitudes) -> float:
    if state.t2 is None:
        return 0.0
    dev = 0.0
    for k in ("aa", "bb"):
        t = state.t2[k]
        dev = max(dev, float(np.abs(t + t.transpose(1, 0, 2, 3)).max()))
        dev = max(dev, float(np.abs(t + t.transpose(0, 1, 3, 2)).max()))
    return dev


def _antisymmetrize(t2: dict) -> None:
    for k in ("aa", "bb"):
        t = t2[k]
        t2[k] = 0.25 * (
            t
            - t.transpose(1, 0, 2, 3)
            - t.transpose(0, 1, 3, 2)
            + t.transpose(1, 0, 3, 2)
        )


def _derivative(program, sh, state_dict, t):
    h = {s: sh.h(s, t) for s in SPINS}
    n = sh.n_orb
    r = evaluate(program, h, sh.pairing, state_dict, n)
    d = {"t1": {s: -1j * r[f"r1_{s}"] for s in SPINS}, "t2": None}
    if program.order == "sd":
        d["t2"] = {k: -1j * r[f"r2_{k}"] for k in ("aa", "bb", "ab")}
    return d


def rk4_step(state: ClusterAmplitudes, program, sh, dt: float) -> ClusterAmplitudes:
    """One classical RK4 update of the amplitudes; re-antisymmetrizes t2."""
    t = state.time
    k1 = _derivative(program, sh, state.as_dict(), t)
    k2 = _derivative(program, sh, state.combine([k1], [0.5 * dt], t).as_dict(), t + 0.5 * dt)
    k3 = _derivative(program, sh, state.combine([k2], [0.5 * dt], t).as_dict(), t + 0.5 * dt)
    k4 = _derivative(program, sh, state.combine([k3], [dt], t).as_dict(), t + dt)
    w = dt / 6.0
    new = state.combine([k1, k2, k3, k4], [w, 2 * w, 2 * w, w], t + dt)
    if new.t2 is not None:
        _antisymmetrize(new.t2)
    if not np.isfinite(new.t1["a"]).all():
        raise FloatingPointError(f"cluster integration diverged at t={t + dt:.6g}")
    return new


def run_quench(
    config: SiamConfig,
    method: str = "dmcc_sd",
    bath=None,
    allow_large_t2: bool = False,
) -> TrajectoryRecord:
    """Propagate the quench from the decoupled thermal reference.

    Amplitudes start at zero with the impurity-bath coupling already present
    in the generator; observables are recorded every ``config.out_stride``
    steps together with the Hermiticity diagnostic.
    """
    if method not in METHOD_ORDER:
        raise ConfigError(f"unknown method {method!r}; expected dmcc_s or dmcc_sd")
    order = METHOD_ORDER[method]
    if order == "sd" and config.n_bath > LARGE_T2_BATH and not allow_large_t2:
        raise CapacityError(
            f"dmcc_sd with n_bath={config.n_bath} allocates multi-GB t2 blocks; "
            "pass allow_large_t2 to proceed"
        )
    if bath is None:
        bath = build_bath(config)
    occ = reference_occupations(config, bath)
    sh = build_super_hamiltonian(config, bath, occ)
    program = generate_eom(sh, order)
    assert not scalar_residual_instructions(sh, order), "trace preservation must be structural"

    state = ClusterAmplitudes.zeros(config.n_orb, order)
    rec = TrajectoryRecord()

    def record(st):
        numbers = number_expectation(occ, st.t1)
        n_tot, pol = impurity_observables(numbers)
        rec.add(
            st.time,
            n_imp_alpha=float(np.real(numbers["a"][0])),
            n_imp_beta=float(np.real(numbers["b"][0])),
            n_total=n_tot,
            polarization=pol,
            n_electrons=total_number(numbers),
            trace_dev=0.0,
            herm_dev=hermiticity_deviation(st),
        )

    record(state)
    n_steps = int(round(config.t_final / config.dt))
    for step in range(n_steps):
        state = rk4_step(state, program, sh, config.dt)
        state.time = (step + 1) * config.dt  # avoid accumulated float drift
        if (step + 1) % config.out_stride == 0:
            record(state)
    return rec
