"""Brute-force references in the full doubled Fock space.

Two independent oracles live here:

* a Liouville propagator in the original (untransformed) operator alphabet
  for tiny baths, used to validate the transformed generator, the cluster
  dynamics, and the TEBD propagator;
* a projection oracle in the quasi-particle alphabet that evaluates the
  cluster equation-of-motion residuals literally via a dense similarity
  transform, used to validate the contraction compiler.

Mode layout (both spaces): sites ordered alpha impurity, alpha bath 1..N_b,
beta impurity, beta bath 1..N_b; each site carries its non-tilde mode
immediately followed by its tilde mode.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .fock import FockSpace
from .model import BathDiscretization, CapacityError, Occupations, SiamConfig, build_bath, impurity_level, occupation, reference_occupations
from .thermofield import ANN, CRE, SPINS, SuperHamiltonian
from .trajectory import TrajectoryRecord

__all__ = [
    "DoubledSpace",
    "build_thermal_ket",
    "build_generator",
    "propagate_dense",
    "projection_oracle",
    "quasiparticle_matrix",
    "super_hamiltonian_matrix",
]


class DoubledSpace:
    """Doubled (physical + tilde) Fock space over both spins of the SIAM."""

    def __init__(self, n_orb: int):
        self.n_orb = n_orb
        self.space = FockSpace(4 * n_orb)

    def mode(self, spin: str, orb: int, tilde: bool) -> int:
        site = orb if spin == "a" else self.n_orb + orb
        return 2 * site + (1 if tilde else 0)

    def ann(self, spin, orb, tilde=False):
        return self.space.annihilation(self.mode(spin, orb, tilde))

    def cre(self, spin, orb, tilde=False):
        return self.space.creation(self.mode(spin, orb, tilde))

    def num(self, spin, orb, tilde=False):
        return self.space.number(self.mode(spin, orb, tilde))

    def pair_product_ket(self, weights: dict) -> np.ndarray:
        """Product over spin orbitals of (w0 + w1 * a+ at+) applied to vacuum.

        ``weights[(spin, orb)] = (w0, w1)``; the pair creators are even and
        commute, so application order is immaterial.
        """
        psi = self.space.vacuum()
        for (spin, orb), (w0, w1) in weights.items():
            op = self.cre(spin, orb) @ self.cre(spin, orb, tilde=True)
            psi = w0 * psi + w1 * (op @ psi)
        return psi

    def unit_ket(self) -> np.ndarray:
        return self.pair_product_ket(
            {(s, i): (1.0, 1.0) for s in SPINS for i in range(self.n_orb)}
        )


def build_thermal_ket(space: DoubledSpace, occ: Occupations) -> np.ndarray:
    """Normalized decoupled thermal ket: per mode (1-v)|00> + v|11>."""
    if space.n_orb > 5:
        raise CapacityError("dense thermal ket limited to n_bath <= 4")
    weights = {}
    for s in SPINS:
        v = occ.v(s)
        for i in range(space.n_orb):
            weights[(s, i)] = (1.0 - v[i], v[i])
    return space.pair_product_ket(weights)


def _one_body_physical(config: SiamConfig, bath: BathDiscretization, t: float) -> np.ndarray:
    n = config.n_orb
    h = np.zeros((n, n))
    h[0, 0] = impurity_level(t, config)
    h[np.arange(1, n), np.arange(1, n)] = bath.energies
    h[0, 1:] = bath.couplings
    h[1:, 0] = bath.couplings
    return h


def build_generator(
    config: SiamConfig, bath: BathDiscretization, t: float = 0.0, space: DoubledSpace | None = None
) -> sp.csr_matrix:
    """Explicit matrix of H - H~ + D in the original operator alphabet."""
    if space is None:
        space = DoubledSpace(config.n_orb)
    if space.n_orb > 5:
        raise CapacityError("dense generator limited to n_bath <= 4")
    h1 = _one_body_physical(config, bath, t)
    n = config.n_orb
    dim = space.space.dim
    gen = sp.csr_matrix((dim, dim), dtype=complex)

    for s in SPINS:
        for p in range(n):
            for q in range(n):
                if h1[p, q] == 0.0:
                    continue
                gen = gen + h1[p, q] * (space.cre(s, p) @ space.ann(s, q))
                gen = gen - h1[p, q] * (space.cre(s, p, True) @ space.ann(s, q, True))
    # Hubbard interaction on the impurity, minus its tilde copy
    w = space.num("a", 0) @ space.num("b", 0) - space.num("a", 0, True) @ space.num("b", 0, True)
    gen = gen + config.U * w

    if config.gamma > 0.0:
        ident = space.space.identity()
        for s in SPINS:
            for i in range(1, n):
                v = occupation(bath.energies[i - 1], config.temperature)
                g1, g2 = config.gamma * (1.0 - v), config.gamma * v
                d = (g1 - g2) * (space.num(s, i) + space.num(s, i, True))
                d = d - 2.0 * g1 * (space.ann(s, i, True) @ space.ann(s, i))
                d = d + 2.0 * g2 * (space.cre(s, i, True) @ space.cre(s, i))
                d = d + 2.0 * g2 * ident
                gen = gen + (-1j) * d
    return gen.tocsr()


def quasiparticle_matrix(space: DoubledSpace, occ: Occupations, symbol) -> sp.csr_matrix:
    """Sparse matrix of one quasi-particle symbol in the original alphabet."""
    s, i = symbol.spin, symbol.index
    u = 1.0 - occ.v(s)[i]
    v = occ.v(s)[i]
    if symbol.kind == CRE and not symbol.tilde:  # b+ = a+ - at
        return space.cre(s, i) - space.ann(s, i, True)
    if symbol.kind == CRE and symbol.tilde:  # bt+ = at+ + a
        return space.cre(s, i, True) + space.ann(s, i)
    if symbol.kind == ANN and not symbol.tilde:  # b = u a - v at+
        return u * space.ann(s, i) - v * space.cre(s, i, True)
    # bt = u at + v a+
    return u * space.ann(s, i, True) + v * space.cre(s, i)


def super_hamiltonian_matrix(sh: SuperHamiltonian, t: float = 0.0, space: DoubledSpace | None = None) -> sp.csr_matrix:
    """Assemble the transformed generator as an explicit matrix.

    Cross-check: this must equal :func:`build_generator` exactly, since the
    Bogoliubov transformation is a rewriting of the same operator.
    """
    if space is None:
        space = DoubledSpace(sh.n_orb)
    dim = space.space.dim
    out = sp.csr_matrix((dim, dim), dtype=complex)
    for term in sh.terms(t):
        mat = sp.identity(dim, format="csr", dtype=complex)
        for sym in term.symbols:
            mat = mat @ quasiparticle_matrix(space, sh.occ, sym)
        out = out + term.coeff * mat
    return out.tocsr()


def propagate_dense(config: SiamConfig, record_diag: bool = True) -> TrajectoryRecord:
    """RK4 propagation of the density-matrix ket for tiny baths.

    Uses the same classical RK4 and step size as the cluster integrator so
    that time-discretization errors are common mode in comparisons.
    """
    if config.n_bath > 3:
        raise CapacityError("dense propagation limited to n_bath <= 3")
    bath = build_bath(config)
    occ = reference_occupations(config, bath)
    space = DoubledSpace(config.n_orb)

    gen0 = build_generator(config, bath, t=0.0, space=space)
    if config.delta_eps != 0.0:
        drive = sp.csr_matrix((space.space.dim, space.space.dim), dtype=complex)
        for s in SPINS:
            drive = drive + (space.num(s, 0) - space.num(s, 0, True))
        drive = drive.tocsr()

        def gen_apply(time, psi):
            amp = config.delta_eps * np.sin(config.omega * time)
            return -1j * (gen0 @ psi + amp * (drive @ psi))
    else:

        def gen_apply(time, psi):
            return -1j * (gen0 @ psi)

    unit = space.unit_ket()
    psi = build_thermal_ket(space, occ)
    numbers = {
        (s, i): space.num(s, i) for s in SPINS for i in range(config.n_orb)
    }

    rec = TrajectoryRecord()

    def record(time, psi):
        tr = unit @ psi
        ns = {k: float((unit @ (op @ psi)).real) for k, op in numbers.items()}
        na, nb = ns[("a", 0)], ns[("b", 0)]
        rec.add(
            time,
            n_imp_alpha=na,
            n_imp_beta=nb,
            n_total=na + nb,
            polarization=na - nb,
            n_electrons=sum(ns.values()),
            trace_dev=abs(tr - 1.0) if record_diag else None,
        )

    n_steps = int(round(config.t_final / config.dt))
    record(0.0, psi)
    dt = config.dt
    for step in range(n_steps):
        t = step * dt
        k1 = gen_apply(t, psi)
        k2 = gen_apply(t + 0.5 * dt, psi + 0.5 * dt * k1)
        k3 = gen_apply(t + 0.5 * dt, psi + 0.5 * dt * k2)
        k4 = gen_apply(t + dt, psi + dt * k3)
        psi = psi + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.isfinite(psi[0]):
            raise FloatingPointError(f"dense propagation diverged at t={t + dt}")
        if (step + 1) % config.out_stride == 0:
            record((step + 1) * dt, psi)
    return rec


# ---------------------------------------------------------------------------
# projection oracle in the quasi-particle alphabet
# ---------------------------------------------------------------------------


class QuasiSpace:
    """Fock representation of the quasi-particle algebra (b, bt canonical)."""

    def __init__(self, n_orb: int):
        self.n_orb = n_orb
        self.space = FockSpace(4 * n_orb)

    def mode(self, spin, orb, tilde):
        site = orb if spin == "a" else self.n_orb + orb
        return 2 * site + (1 if tilde else 0)

    def b(self, spin, orb, tilde=False):
        return self.space.annihilation(self.mode(spin, orb, tilde))

    def bdag(self, spin, orb, tilde=False):
        return self.space.creation(self.mode(spin, orb, tilde))


def _cluster_matrix(qs: QuasiSpace, amps: dict) -> sp.csr_matrix:
    """T = sum t1 b+ bt+ + 1/4 sum t2 b+ b+ bt+ bt+ (canonical spin blocks)."""
    n = qs.n_orb
    dim = qs.space.dim
    T = sp.csr_matrix((dim, dim), dtype=complex)
    for s in SPINS:
        t1 = amps["t1"][s]
        for m in range(n):
            for mm in range(n):
                if t1[m, mm] != 0.0:
                    T = T + t1[m, mm] * (qs.bdag(s, m) @ qs.bdag(s, mm, True))
    t2 = amps.get("t2")
    if t2 is not None:
        for s, key in (("a", "aa"), ("b", "bb")):
            blk = t2[key]
            for i in range(n):
                for k in range(n):
                    for j in range(n):
                        for l in range(n):
                            c = blk[i, k, j, l]
                            if c != 0.0:
                                T = T + 0.25 * c * (
                                    qs.bdag(s, i) @ qs.bdag(s, k) @ qs.bdag(s, l, True) @ qs.bdag(s, j, True)
                                )
        blk = t2["ab"]
        for i in range(n):
            for k in range(n):
                for j in range(n):
                    for l in range(n):
                        c = blk[i, k, j, l]
                        if c != 0.0:
                            T = T + c * (
                                qs.bdag("a", i) @ qs.bdag("b", k) @ qs.bdag("b", l, True) @ qs.bdag("a", j, True)
                            )
    return T.tocsr()


def _apply_exp(T: sp.csr_matrix, psi: np.ndarray, sign: float) -> np.ndarray:
    """exp(sign*T) psi by the (terminating) power series."""
    out = psi.copy()
    term = psi.copy()
    k = 0
    while True:
        k += 1
        term = (sign / k) * (T @ term)
        nrm = np.linalg.norm(term)
        if nrm == 0.0:
            return out
        out = out + term
        if k > 64:
            raise RuntimeError("cluster exponential series failed to terminate")


def _sh_quasi_matrix(qs: QuasiSpace, sh: SuperHamiltonian, t: float) -> sp.csr_matrix:
    n = qs.n_orb
    dim = qs.space.dim
    out = sp.csr_matrix((dim, dim), dtype=complex)
    for s in SPINS:
        h = sh.h(s, t)
        A = sh.pairing[s]
        for p in range(n):
            for q in range(n):
                if h[p, q] != 0.0:
                    out = out + h[p, q] * (qs.bdag(s, p) @ qs.b(s, q))
                    out = out - np.conj(h[p, q]) * (qs.bdag(s, p, True) @ qs.b(s, q, True))
                if A[p, q] != 0.0:
                    out = out + A[p, q] * (qs.bdag(s, p) @ qs.bdag(s, q, True))
    for term in sh.interaction:
        mat = sp.identity(dim, format="csr", dtype=complex)
        for sym in term.symbols:
            if sym.kind == CRE:
                mat = mat @ qs.bdag(sym.spin, sym.index, sym.tilde)
            else:
                mat = mat @ qs.b(sym.spin, sym.index, sym.tilde)
        out = out + term.coeff * mat
    return out.tocsr()


def projection_oracle(sh: SuperHamiltonian, amps: dict, t: float = 0.0) -> dict:
    """Residual tensors from the literal dense similarity transform.

    Computes chi = exp(-T) H' exp(T)|0> in the quasi-particle Fock space and
    projects onto single and double excitations. By the linked-operator
    identity the projections equal the connected (H' exp(T)) residuals, so
    this is an independent oracle for the contraction compiler.
    """
    n = sh.n_orb
    if n > 3:
        raise CapacityError("projection oracle limited to n_bath <= 2")
    qs = QuasiSpace(n)
    T = _cluster_matrix(qs, amps)
    H = _sh_quasi_matrix(qs, sh, t)
    vac = qs.space.vacuum()

    phi = _apply_exp(T, vac, +1.0)
    chi = _apply_exp(T, H @ phi, -1.0)

    out = {}
    for s in SPINS:
        r1 = np.zeros((n, n), dtype=complex)
        for i in range(n):
            x = qs.b(s, i) @ chi
            for j in range(n):
                r1[i, j] = (qs.b(s, j, True) @ x)[0]
        out[f"r1_{s}"] = r1
    if "t2" in (amps or {}) and amps.get("t2") is not None:
        for s, key in (("a", "aa"), ("b", "bb")):
            r2 = np.zeros((n, n, n, n), dtype=complex)
            for i in range(n):
                xi = qs.b(s, i) @ chi
                for k in range(n):
                    xik = qs.b(s, k) @ xi
                    for l in range(n):
                        xikl = qs.b(s, l, True) @ xik
                        for j in range(n):
                            r2[i, k, j, l] = (qs.b(s, j, True) @ xikl)[0]
            out[f"r2_{key}"] = r2
        r2 = np.zeros((n, n, n, n), dtype=complex)
        for i in range(n):
            xi = qs.b("a", i) @ chi
            for k in range(n):
                xik = qs.b("b", k) @ xi
                for l in range(n):
                    xikl = qs.b("b", l, True) @ xik
                    for j in range(n):
                        r2[i, k, j, l] = (qs.b("a", j, True) @ xikl)[0]
        out["r2_ab"] = r2
    return out
