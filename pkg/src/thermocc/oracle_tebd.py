"""Thermo-field TEBD/MPS propagator in the original operator alphabet.

The density-matrix ket lives on a chain of 2(N_b+1) sites with local
dimension 4 (occupations of a spin orbital's physical and tilde modes,
basis index 2*n + t). Site order: alpha impurity, alpha bath 1..N_b,
beta impurity, beta bath 1..N_b.

Every generator term couples an impurity to one other site, so a
second-order Trotter step walks each impurity across its bath with
fermionic swap gates: alpha impurity sweeps right through its bath, an
impurity-impurity gate applies the interaction, the beta impurity sweeps
right through its bath, and the whole sequence is applied again in exact
reverse. Each pair gate is the exact exponential of its 16-dimensional
generator block (hybridization + the partner site's on-site and dissipator
terms), so trace and electron number are conserved gate by gate and the
only error sources are the Trotter split and SVD truncation.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .fock import FockSpace
from .model import (
    CapacityError,
    SiamConfig,
    build_bath,
    impurity_level,
    occupation,
    reference_occupations,
)
from .trajectory import TrajectoryRecord

__all__ = ["MPS", "run_tebd"]

_PARITY = np.array([0, 1, 1, 0])  # site states 00, 01, 10, 11
_TRACE_VEC = np.array([1.0, 0.0, 0.0, 1.0])
_NUMBER_VEC = np.array([0.0, 0.0, 1.0, 1.0])  # physical occupation per state

# fermionic swap: |s1 s2> -> (-1)^(p1 p2) |s2 s1>
_FSWAP = np.zeros((16, 16))
for _s1 in range(4):
    for _s2 in range(4):
        _FSWAP[_s2 * 4 + _s1, _s1 * 4 + _s2] = (-1.0) ** (_PARITY[_s1] * _PARITY[_s2])


class MPS:
    """Open-boundary MPS with (chi_l, 4, chi_r) site tensors."""

    def __init__(self, site_vectors):
        self.tensors = [np.asarray(v, dtype=complex).reshape(1, 4, 1) for v in site_vectors]
        self.discarded_weight = 0.0

    def __len__(self):
        return len(self.tensors)

    def bond_dims(self):
        return [t.shape[2] for t in self.tensors[:-1]]

    def apply_two_site(self, gate, pos, threshold, max_bond, absorb_right=True):
        """Apply a 16x16 gate at (pos, pos+1) and re-split with a truncated SVD."""
        a, b = self.tensors[pos], self.tensors[pos + 1]
        cl, cr = a.shape[0], b.shape[2]
        theta = np.tensordot(a, b, axes=(2, 0)).reshape(cl, 16, cr)
        theta = np.tensordot(gate, theta, axes=(1, 1)).transpose(1, 0, 2)
        mat = theta.reshape(cl * 4, 4 * cr)
        u, s, vh = np.linalg.svd(mat, full_matrices=False)
        total = float(np.sum(s**2))
        if total == 0.0:
            raise FloatingPointError("MPS state vanished during propagation")
        keep = max(1, int(np.sum(s > threshold * s[0])))
        if keep > max_bond:
            raise CapacityError(
                f"bond overflow at sites ({pos}, {pos + 1}): "
                f"{keep} singular values above threshold exceed max_bond={max_bond}"
            )
        self.discarded_weight += float(np.sum(s[keep:] ** 2)) / total
        u, s, vh = u[:, :keep], s[:keep], vh[:keep]
        if absorb_right:
            self.tensors[pos] = u.reshape(cl, 4, keep)
            self.tensors[pos + 1] = (s[:, None] * vh).reshape(keep, 4, cr)
        else:
            self.tensors[pos] = (u * s).reshape(cl, 4, keep)
            self.tensors[pos + 1] = vh.reshape(keep, 4, cr)

    def site_expectations(self, vecs_by_site):
        """<1| O |psi> / <1|psi> for diagonal single-site weight vectors.

        Returns (values, trace) where values[i] uses vecs_by_site[i] at site
        i and the trace vector elsewhere.
        """
        n = len(self.tensors)
        mats = [np.tensordot(_TRACE_VEC, t, axes=(0, 1)) for t in self.tensors]
        lefts = [np.ones((1,))]
        for m in mats[:-1]:
            lefts.append(lefts[-1] @ m)
        rights = [np.ones((1,))] * n
        acc = np.ones((1,))
        for i in range(n - 1, 0, -1):
            acc = mats[i] @ acc
            rights[i - 1] = acc
        trace = complex((lefts[-1] @ mats[-1] @ np.ones((1,)))[()])
        values = []
        for i, vec in vecs_by_site:
            m = np.tensordot(vec, self.tensors[i], axes=(0, 1))
            if i == n - 1:
                val = lefts[i] @ m @ np.ones((1,))
            else:
                val = lefts[i] @ m @ rights[i]
            values.append(complex(val[()]))
        return values, trace


# ---------------------------------------------------------------------------
# gate construction
# ---------------------------------------------------------------------------


def _pair_space():
    return FockSpace(4)  # modes: n_left, t_left, n_right, t_right


def _site_ops(space, side):
    base = 0 if side == "left" else 2
    return {
        "a": space.annihilation(base),
        "at": space.annihilation(base + 1),
        "n": space.number(base),
        "nt": space.number(base + 1),
    }


def _hybridization_block(v_coupling, eps, gamma, v_occ):
    """Generator block for (impurity, bath level) with the bath site's
    on-site energy and dissipator folded in. Impurity on the left."""
    sp = _pair_space()
    L, R = _site_ops(sp, "left"), _site_ops(sp, "right")
    g = v_coupling * (L["a"].T @ R["a"] + R["a"].T @ L["a"])
    g = g - v_coupling * (L["at"].T @ R["at"] + R["at"].T @ L["at"])
    g = g + eps * (R["n"] - R["nt"])
    if gamma > 0.0:
        g1, g2 = gamma * (1.0 - v_occ), gamma * v_occ
        d = (g1 - g2) * (R["n"] + R["nt"])
        d = d - 2.0 * g1 * (R["at"] @ R["a"])
        d = d + 2.0 * g2 * (R["at"].T @ R["a"].T)
        d = d + 2.0 * g2 * sp.identity()
        g = g + (-1j) * d
    return g.toarray()


def _impurity_block(eps0_t, u_int):
    """Generator block for (alpha impurity, beta impurity)."""
    sp = _pair_space()
    L, R = _site_ops(sp, "left"), _site_ops(sp, "right")
    g = eps0_t * (L["n"] - L["nt"] + R["n"] - R["nt"])
    g = g + u_int * (L["n"] @ R["n"] - L["nt"] @ R["nt"])
    return g.toarray()


def _half_gates(config, bath, dt_half, eps0_t):
    """Exponentiated half-step gates for one forward (or reverse) sweep."""
    hyb = []
    for i in range(config.n_bath):
        v_occ = occupation(bath.energies[i], config.temperature)
        block = _hybridization_block(bath.couplings[i], bath.energies[i], config.gamma, v_occ)
        hyb.append(scipy.linalg.expm(-1j * dt_half * block))
    center = scipy.linalg.expm(-1j * dt_half * _impurity_block(eps0_t, config.U))
    return hyb, center


def run_tebd(config: SiamConfig, bath=None) -> TrajectoryRecord:
    """Propagate the quench with second-order Trotter TEBD."""
    if bath is None:
        bath = build_bath(config)
    occ = reference_occupations(config, bath)
    nb = config.n_bath

    sites = []
    for s in ("a", "b"):
        for i in range(nb + 1):
            v = occ.v(s)[i]
            sites.append([1.0 - v, 0.0, 0.0, v])
    mps = MPS(sites)

    dt = config.tebd_dt
    dt_half = 0.5 * dt
    hyb, center_static = _half_gates(config, bath, dt_half, config.epsilon0)
    fwd = [_FSWAP @ g for g in hyb]  # gate, then move the impurity right
    rev = [g @ _FSWAP for g in hyb]
    thr, cap = config.svd_threshold, config.max_bond
    driven = config.delta_eps != 0.0

    rec = TrajectoryRecord()

    def record(time):
        wanted = [(0, _NUMBER_VEC), (nb + 1, _NUMBER_VEC)]
        wanted += [(i, _NUMBER_VEC) for i in range(1, nb + 1)]
        wanted += [(nb + 1 + i, _NUMBER_VEC) for i in range(1, nb + 1)]
        vals, trace = mps.site_expectations(wanted)
        vals = [v / trace for v in vals]
        na, nbeta = vals[0].real, vals[1].real
        rec.add(
            time,
            n_imp_alpha=na,
            n_imp_beta=nbeta,
            n_total=na + nbeta,
            polarization=na - nbeta,
            n_electrons=float(np.sum([v.real for v in vals])),
            trace_dev=abs(trace - 1.0),
            discarded_weight=mps.discarded_weight,
        )

    record(0.0)
    n_steps = int(round(config.t_final / dt))
    for step in range(n_steps):
        t_mid = (step + 0.5) * dt
        if driven:
            center = scipy.linalg.expm(
                -1j * dt_half * _impurity_block(impurity_level(t_mid, config), config.U)
            )
        else:
            center = center_static
        try:
            # forward half: alpha impurity walks right, interaction, beta walks right
            for k in range(nb):
                mps.apply_two_site(fwd[k], k, thr, cap, absorb_right=True)
            mps.apply_two_site(center, nb, thr, cap, absorb_right=True)
            for k in range(nb):
                mps.apply_two_site(fwd[k], nb + 1 + k, thr, cap, absorb_right=True)
            # reverse half: exact mirror, restoring the site order
            for k in range(nb - 1, -1, -1):
                mps.apply_two_site(rev[k], nb + 1 + k, thr, cap, absorb_right=False)
            mps.apply_two_site(center, nb, thr, cap, absorb_right=False)
            for k in range(nb - 1, -1, -1):
                mps.apply_two_site(rev[k], k, thr, cap, absorb_right=False)
        except CapacityError as exc:
            raise CapacityError(f"t={(step + 1) * dt:g}: {exc}") from exc
        if (step + 1) % config.out_stride == 0:
            record((step + 1) * dt)
    return rec
