"""Doubled-space operator algebra and the transformed SIAM generator.

The density matrix is treated as a ket in a doubled space of physical and
tilde modes. A thermal Bogoliubov transformation (u_i, v_i per spin orbital,
frozen at t = 0) defines quasi-particle operators b, b-tilde that annihilate
the left (unit) and right (thermal) vacua:

    a-dag = u b-dag + bt,   a  = b + v bt-dag,
    at    = bt - v b-dag,   at-dag = u bt-dag - b.

In this alphabet the full generator splits into a one-body part (matrices h
per spin on the b-dag b channel, -h* on the bt-dag bt channel, and an
antisymmetric pairing matrix on b-dag bt-dag) plus a normal-ordered list of
quartic impurity monomials. The dissipator enters exactly as a -i*gamma
broadening of the bath levels on both one-body channels.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .model import BathDiscretization, Occupations, SiamConfig, impurity_level

__all__ = [
    "OperatorSymbol",
    "OperatorTerm",
    "SuperHamiltonian",
    "tilde_conjugate",
    "normal_order",
    "build_super_hamiltonian",
    "verify_trace_preservation",
    "number_expectation",
]

CRE = "cre"
ANN = "ann"
SPINS = ("a", "b")


@dataclass(frozen=True)
class OperatorSymbol:
    """One quasi-particle creation/annihilation symbol.

    ``index`` is either a concrete orbital (0 = impurity) or a free label
    (string) to be bound by a summation.
    """

    kind: str  # CRE or ANN
    tilde: bool
    spin: str  # "a" or "b"
    index: object  # int or str

    def __post_init__(self):
        if self.kind not in (CRE, ANN):
            raise ValueError(f"bad symbol kind {self.kind!r}")
        if self.spin not in SPINS:
            raise ValueError(f"bad spin {self.spin!r}")

    def __str__(self):
        base = "b~" if self.tilde else "b"
        dag = "+" if self.kind == CRE else ""
        return f"{base}{dag}[{self.index},{self.spin}]"


@dataclass(frozen=True)
class OperatorTerm:
    """A complex coefficient times an ordered product of symbols."""

    coeff: complex
    symbols: tuple

    def __str__(self):
        ops = " ".join(str(s) for s in self.symbols) or "1"
        return f"({self.coeff:+.6g}) {ops}"


def _bsym(kind, tilde, spin, index):
    return OperatorSymbol(kind=kind, tilde=tilde, spin=spin, index=index)


def tilde_conjugate(term: OperatorTerm) -> OperatorTerm:
    """Anti-linear tilde conjugation of a quasi-particle product.

    The coefficient is complex-conjugated and every symbol's tilde flag is
    flipped with the order preserved. For fermions the double-tilde rule
    contributes one factor of -1 per symbol that already carries a tilde,
    so the map is an involution on even-length products.
    """
    sign = (-1) ** sum(1 for s in term.symbols if s.tilde)
    flipped = tuple(replace(s, tilde=not s.tilde) for s in term.symbols)
    return OperatorTerm(coeff=sign * np.conj(term.coeff), symbols=flipped)


def normal_order(term: OperatorTerm) -> OperatorTerm:
    """Reorder so all creations precede all annihilations, tracking signs.

    Only valid when no contraction can arise, i.e. no annihilation has to
    pass a creation of the same mode; the quartic impurity monomials built
    here always satisfy this.
    """
    syms = list(term.symbols)
    sign = 1
    changed = True
    while changed:
        changed = False
        for i in range(len(syms) - 1):
            x, y = syms[i], syms[i + 1]
            if x.kind == ANN and y.kind == CRE:
                if x.tilde == y.tilde and x.spin == y.spin and x.index == y.index:
                    raise ValueError(f"contraction would arise normal-ordering {term}")
                syms[i], syms[i + 1] = y, x
                sign = -sign
                changed = True
    return OperatorTerm(coeff=sign * term.coeff, symbols=tuple(syms))


def _impurity_density_monomials(u0: float, v0: float, spin: str, tilde_frame: bool):
    """Monomials of n - v (or its tilde conjugate) for one impurity spin.

    n - v  =  u b+b - v bt+bt + u v b+bt+ + bt b
    (n - v)~ = -v b+b + u bt+bt + u v b+bt+ + bt b
    """
    b_cre = _bsym(CRE, False, spin, 0)
    b_ann = _bsym(ANN, False, spin, 0)
    t_cre = _bsym(CRE, True, spin, 0)
    t_ann = _bsym(ANN, True, spin, 0)
    if not tilde_frame:
        return [
            (u0, (b_cre, b_ann)),
            (-v0, (t_cre, t_ann)),
            (u0 * v0, (b_cre, t_cre)),
            (1.0, (t_ann, b_ann)),
        ]
    return [
        (-v0, (b_cre, b_ann)),
        (u0, (t_cre, t_ann)),
        (u0 * v0, (b_cre, t_cre)),
        (1.0, (t_ann, b_ann)),
    ]


def _interaction_terms(u: float, occ: Occupations) -> list:
    """Quartic part of the transformed Hubbard term.

    Expands U * [(n_a - v_a)(n_b - v_b) - tilde conjugate] into
    normal-ordered quasi-particle monomials; the one-body mean-field piece
    U * v_opposite goes into the h matrices instead.
    """
    v0a, v0b = float(occ.v_alpha[0]), float(occ.v_beta[0])
    u0a, u0b = 1.0 - v0a, 1.0 - v0b
    collected = {}
    for tilde_frame, overall in ((False, u), (True, -u)):
        fa = _impurity_density_monomials(u0a, v0a, "a", tilde_frame)
        fb = _impurity_density_monomials(u0b, v0b, "b", tilde_frame)
        for ca, sa in fa:
            for cb, sb in fb:
                raw = OperatorTerm(coeff=overall * ca * cb, symbols=sa + sb)
                ordered = normal_order(raw)
                key = ordered.symbols
                collected[key] = collected.get(key, 0.0) + ordered.coeff
    out = []
    for key in sorted(collected, key=lambda k: tuple(str(s) for s in k)):
        c = collected[key]
        if abs(c) > 1e-14:
            out.append(OperatorTerm(coeff=complex(c), symbols=key))
    return out


@dataclass
class SuperHamiltonian:
    """Bogoliubov-transformed generator of the density-matrix ket evolution.

    One-body channels per spin: ``h(spin, t)`` multiplies b+ b, ``-h*``
    multiplies bt+ bt, and the antisymmetric ``pairing`` matrix multiplies
    b+ bt+. ``interaction`` holds the normal-ordered quartic monomials.
    Only the (0, 0) entry of h is time dependent (harmonic driving).
    """

    config: SiamConfig
    occ: Occupations
    h_static: dict  # spin -> complex (n_orb, n_orb), drive excluded
    pairing: dict  # spin -> complex antisymmetric (n_orb, n_orb)
    interaction: list = field(default_factory=list)

    @property
    def n_orb(self) -> int:
        return self.h_static["a"].shape[0]

    def h(self, spin: str, t: float) -> np.ndarray:
        out = self.h_static[spin].copy()
        out[0, 0] += impurity_level(t, self.config) - self.config.epsilon0
        return out

    def terms(self, t: float = 0.0) -> list:
        """Full term list (one-body channels expanded) at time t, mainly for
        structural checks and the dense cross-validation."""
        out = []
        for s in SPINS:
            h = self.h(s, t)
            n = h.shape[0]
            for p in range(n):
                for q in range(n):
                    if h[p, q] != 0:
                        out.append(OperatorTerm(h[p, q], (_bsym(CRE, False, s, p), _bsym(ANN, False, s, q))))
                        out.append(OperatorTerm(-np.conj(h[p, q]), (_bsym(CRE, True, s, p), _bsym(ANN, True, s, q))))
                    d = self.pairing[s][p, q]
                    if d != 0:
                        out.append(OperatorTerm(d, (_bsym(CRE, False, s, p), _bsym(CRE, True, s, q))))
        out.extend(self.interaction)
        return out


def build_super_hamiltonian(
    config: SiamConfig, bath: BathDiscretization, occ: Occupations
) -> SuperHamiltonian:
    """Assemble the transformed generator for the (driven, dissipative) SIAM.

    h carries the level energies, hybridization, the thermal mean-field
    shift U*v0 of the opposite spin on the impurity, and -i*gamma on the
    bath diagonal. The pairing matrix is h0_pq * (u_p v_q - u_q v_p) with
    h0 the real (undamped) one-body matrix, nonzero only on the
    impurity-bath hybridization block.
    """
    n = config.n_orb
    if len(bath.energies) != config.n_bath:
        raise ValueError("bath size does not match config.n_bath")
    if len(occ.v_alpha) != n or len(occ.v_beta) != n:
        raise ValueError("occupation vectors do not match orbital count")

    h0 = np.zeros((n, n))
    h0[0, 0] = config.epsilon0
    h0[np.arange(1, n), np.arange(1, n)] = bath.energies
    h0[0, 1:] = bath.couplings
    h0[1:, 0] = bath.couplings

    h_static, pairing = {}, {}
    for s in SPINS:
        v = occ.v(s)
        u = 1.0 - v
        h = h0.astype(complex).copy()
        v_opp = occ.v("b" if s == "a" else "a")[0]
        h[0, 0] += config.U * v_opp
        h[np.arange(1, n), np.arange(1, n)] -= 1j * config.gamma
        h_static[s] = h
        pairing[s] = h0 * (np.outer(u, v) - np.outer(v, u))

    return SuperHamiltonian(
        config=config,
        occ=occ,
        h_static=h_static,
        pairing=pairing,
        interaction=_interaction_terms(config.U, occ),
    )


def verify_trace_preservation(sh: SuperHamiltonian, return_offenders: bool = False):
    """True iff every normal-ordered generator term contains a creation.

    Creation symbols annihilate the unit bra, so this is the structural
    condition <1| H = 0 and hence conservation of the trace.
    """
    offenders = []
    for term in sh.terms(t=0.0):
        if not any(s.kind == CRE for s in term.symbols):
            offenders.append(term)
    ok = not offenders
    if return_offenders:
        return ok, offenders
    return ok


def number_expectation(occ: Occupations, t1: dict) -> dict:
    """Physical per-spin-orbital occupations <a+ a> = v + diag(t1).

    Follows from a+ = u b+ + bt, a = b + v bt+ and left-vacuum annihilation:
    only the bt b piece of a+ a survives against the singles amplitudes.
    """
    return {s: occ.v(s) + np.diagonal(t1[s]) for s in SPINS}
