"""Contraction compiler for the cluster equations of motion.

The residuals R = <0| P (H' e^T)_connected |0> are generated symbolically
once per run: every way of fully contracting a projection monomial P with a
generator monomial and a multiset of cluster vertices is enumerated, signed
by contraction-line crossings, and compiled into an einsum instruction over
the numeric tensors (one-body channels, pairing, amplitudes). Evaluation is
then pure numpy with cached einsum paths.

Contractions exist only between an annihilation and a creation to its right
with matching spin and tilde flag; cluster vertices carry only creations, so
no T-T contractions arise and the exponential series terminates at the
operator rank of the generator monomial. Connectedness (every cluster vertex
touching the generator vertex) implements the linked form of the residual.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .thermofield import ANN, CRE, SPINS, SuperHamiltonian

__all__ = [
    "Instruction",
    "ContractionProgram",
    "generate_eom",
    "evaluate",
    "dump_equations",
    "scalar_residual_instructions",
]

FIXED = -1  # label value for indices pinned to the impurity slot


@dataclass(eq=False)
class Instruction:
    """One additive einsum contribution to a residual tensor."""

    out: str
    out_entries: tuple  # per output axis: label id, or FIXED (impurity slot)
    operands: tuple  # ((tensor_name, entries), ...)
    coeff: complex
    path: object = None  # cached einsum path, filled lazily

    def subscripts(self):
        letters = "abcdefghijklmnopqrstuvwxyz"
        subs = []
        for _, entries in self.operands:
            subs.append("".join(letters[e] for e in entries if e != FIXED))
        out_sub = "".join(letters[e] for e in self.out_entries if e != FIXED)
        return ",".join(subs) + "->" + out_sub


@dataclass
class ContractionProgram:
    """Compiled residual equations for one cluster truncation."""

    order: str  # "s" or "sd"
    instructions: list = field(default_factory=list)

    def for_output(self, name):
        return [ins for ins in self.instructions if ins.out == name]


# ---------------------------------------------------------------------------
# symbolic vertices
# ---------------------------------------------------------------------------

# a slot is (kind, tilde, spin); vertices pair slots with tensor axes


@dataclass(frozen=True)
class _Vertex:
    tensor: str | None  # None -> scalar coefficient with all slots fixed
    slots: tuple  # ((kind, tilde, spin), ...)
    axis_of_slot: tuple  # tensor axis fed by each slot (ignored when tensor None)
    prefactor: complex = 1.0


def _one_body_vertices():
    out = []
    for s in SPINS:
        out.append(_Vertex(f"h_{s}", ((CRE, False, s), (ANN, False, s)), (0, 1)))
        out.append(_Vertex(f"hc_{s}", ((CRE, True, s), (ANN, True, s)), (0, 1)))
        out.append(_Vertex(f"A_{s}", ((CRE, False, s), (CRE, True, s)), (0, 1)))
    return out


def _interaction_vertices(sh: SuperHamiltonian):
    out = []
    for term in sh.interaction:
        slots = tuple((sym.kind, sym.tilde, sym.spin) for sym in term.symbols)
        out.append(_Vertex(None, slots, tuple(range(len(slots))), term.coeff))
    return out


def _cluster_vertices(order: str):
    out = []
    for s in SPINS:
        out.append(_Vertex(f"t1_{s}", ((CRE, False, s), (CRE, True, s)), (0, 1)))
    if order == "sd":
        for s, key in (("a", "aa"), ("b", "bb")):
            out.append(
                _Vertex(
                    f"t2_{key}",
                    ((CRE, False, s), (CRE, False, s), (CRE, True, s), (CRE, True, s)),
                    (0, 1, 3, 2),  # symbols b+_i b+_k bt+_l bt+_j ; tensor [i,k,j,l]
                    0.25,
                )
            )
        out.append(
            _Vertex(
                "t2_ab",
                ((CRE, False, "a"), (CRE, False, "b"), (CRE, True, "b"), (CRE, True, "a")),
                (0, 1, 3, 2),
            )
        )
    return out


def _projections(order: str):
    """(output name, annihilation slots, output axis fed by each slot)."""
    projs = []
    for s in SPINS:
        projs.append((f"r1_{s}", ((ANN, True, s), (ANN, False, s)), (1, 0)))
    if order == "sd":
        for s, key in (("a", "aa"), ("b", "bb")):
            projs.append(
                (
                    f"r2_{key}",
                    ((ANN, True, s), (ANN, True, s), (ANN, False, s), (ANN, False, s)),
                    (2, 3, 1, 0),  # symbols bt_j bt_l b_k b_i ; tensor [i,k,j,l]
                )
            )
        projs.append(
            (
                "r2_ab",
                ((ANN, True, "a"), (ANN, True, "b"), (ANN, False, "b"), (ANN, False, "a")),
                (2, 3, 1, 0),
            )
        )
    return projs


# ---------------------------------------------------------------------------
# pairing enumeration
# ---------------------------------------------------------------------------


def _enumerate_pairings(slots):
    """All full contraction schemes; each pair is (ann_pos, cre_pos)."""
    counts = {}
    for kind, tilde, spin in slots:
        counts[(tilde, spin)] = counts.get((tilde, spin), 0) + (1 if kind == CRE else -1)
    if any(c != 0 for c in counts.values()):
        return []

    results = []

    def rec(unpaired, pairs):
        if not unpaired:
            results.append(tuple(pairs))
            return
        a = unpaired[0]
        ka, ta, sa = slots[a]
        if ka != ANN:  # leftmost unpaired creation can never contract
            return
        rest = unpaired[1:]
        for c in rest:
            kc, tc, sc = slots[c]
            if kc == CRE and tc == ta and sc == sa:
                rec([x for x in rest if x != c], pairs + [(a, c)])

    rec(list(range(len(slots))), [])
    return results


def _crossing_sign(pairs):
    sign = 1
    for (a1, c1), (a2, c2) in itertools.combinations(pairs, 2):
        lo, hi = ((a1, c1), (a2, c2)) if a1 < a2 else ((a2, c2), (a1, c1))
        if lo[0] < hi[0] < lo[1] < hi[1]:
            sign = -sign
    return sign


def generate_eom(sh: SuperHamiltonian, order: str) -> ContractionProgram:
    """Compile the residual equations for the given truncation ('s' or 'sd')."""
    if order not in ("s", "sd"):
        raise ValueError(f"unknown cluster order {order!r}")
    h_vertices = _one_body_vertices() + _interaction_vertices(sh)
    t_types = _cluster_vertices(order)
    max_t = 4 if order == "sd" else 4

    raw = {}
    for out_name, p_slots, p_axes in _projections(order):
        for h_vtx in h_vertices:
            for size in range(max_t + 1):
                for multiset in itertools.combinations_with_replacement(range(len(t_types)), size):
                    t_list = [t_types[i] for i in multiset]
                    _accumulate(raw, out_name, p_slots, p_axes, h_vtx, t_list, multiset)

    prog = ContractionProgram(order=order)
    for (out, out_entries, operands), coeff in sorted(raw.items(), key=lambda kv: repr(kv[0])):
        if abs(coeff) > 1e-14:
            prog.instructions.append(Instruction(out, out_entries, operands, coeff))
    return prog


def scalar_residual_instructions(sh: SuperHamiltonian, order: str) -> list:
    """Contributions to the vacuum (rank-0) residual <0|(H' e^T)_c|0>.

    An empty result certifies structural trace preservation: every generator
    monomial keeps at least one creation operator, so the amplitude norm
    carries no scalar source.
    """
    raw = {}
    for h_vtx in _one_body_vertices() + _interaction_vertices(sh):
        for size in range(5):
            for multiset in itertools.combinations_with_replacement(
                range(len(_cluster_vertices(order))), size
            ):
                t_list = [_cluster_vertices(order)[i] for i in multiset]
                _accumulate(raw, "r0", (), (), h_vtx, t_list, multiset)
    return [key for key, coeff in raw.items() if abs(coeff) > 1e-14]


def _accumulate(raw, out_name, p_slots, p_axes, h_vtx, t_list, multiset):
    # multiset symmetry factor from the exponential series
    factor = 1.0
    for _, group in itertools.groupby(multiset):
        k = len(list(group))
        for m in range(2, k + 1):
            factor /= m

    slots = list(p_slots) + list(h_vtx.slots)
    owner = [("P", i) for i in range(len(p_slots))] + [("H", i) for i in range(len(h_vtx.slots))]
    for vi, tv in enumerate(t_list):
        slots.extend(tv.slots)
        owner.extend(("T", vi, i) for i in range(len(tv.slots)))

    for pairs in _enumerate_pairings(slots):
        # connectedness: every cluster vertex must touch the generator vertex
        touched = set()
        ok = True
        for a, c in pairs:
            oa, oc = owner[a], owner[c]
            kinds = {oa[0], oc[0]}
            if kinds == {"H", "T"}:
                touched.add(oa[1] if oa[0] == "T" else oc[1])
            elif kinds == {"T"} and oa[1] != oc[1]:
                ok = False  # cannot happen (both creations) but keep the guard
        if not ok or len(touched) != len(t_list):
            continue

        # labels: each contraction class has exactly two slots
        label_of = {}
        scalar_h = h_vtx.tensor is None
        for a, c in pairs:
            fixed = (scalar_h and owner[a][0] == "H") or (scalar_h and owner[c][0] == "H")
            lab = FIXED if fixed else object()
            label_of[a] = lab
            label_of[c] = lab

        # output entries
        out_entries = [None] * len(p_axes)
        for i, axis in enumerate(p_axes):
            out_entries[axis] = label_of[i]

        operands = []
        base = len(p_slots)
        if not scalar_h:
            entries = [None] * len(h_vtx.slots)
            for i, axis in enumerate(h_vtx.axis_of_slot):
                entries[axis] = label_of[base + i]
            operands.append((h_vtx.tensor, entries))
        pos = base + len(h_vtx.slots)
        for tv in t_list:
            entries = [None] * len(tv.slots)
            for i, axis in enumerate(tv.axis_of_slot):
                entries[axis] = label_of[pos + i]
            operands.append((tv.tensor, entries))
            pos += len(tv.slots)

        coeff = _crossing_sign(pairs) * factor * h_vtx.prefactor
        for tv in t_list:
            coeff *= tv.prefactor

        out_key, op_key, rel_sign = _canonical_form(out_name, out_entries, operands)
        if out_name in ANTISYM_OUTPUTS:
            coeff *= 0.25  # evaluate() antisymmetrizes these outputs at the end
        key = (out_name, out_key, op_key)
        raw[key] = raw.get(key, 0.0) + rel_sign * coeff


ANTISYM_OUTPUTS = ("r2_aa", "r2_bb")
_PAIR_SWAPS = ((0, 1, 2, 3), (1, 0, 2, 3), (0, 1, 3, 2), (1, 0, 3, 2))
_PAIR_SIGNS = (1, -1, -1, 1)


def _canonical_form(out_name, out_entries, operands):
    """Minimal signed representative under the antisymmetry group.

    Same-spin t2 operands may have their particle pair (axes 0,1) or hole
    pair (axes 2,3) swapped at the cost of a sign (exact on the antisymmetric
    amplitude domain); same-spin doubles outputs carry the matching output
    symmetry, realized by a final antisymmetrization in evaluate(). Folding
    both into a canonical representative merges the symmetry-equivalent
    contraction schemes, which quarters the heavy tensor work.
    """
    out_variants = [(out_entries, 1)]
    if out_name in ANTISYM_OUTPUTS:
        out_variants = [
            ([out_entries[p] for p in perm], sgn)
            for perm, sgn in zip(_PAIR_SWAPS, _PAIR_SIGNS)
        ]

    op_variant_lists = []
    for name, entries in operands:
        if name in ("t2_aa", "t2_bb"):
            op_variant_lists.append(
                [((name, tuple(entries[p] for p in perm)), sgn) for perm, sgn in zip(_PAIR_SWAPS, _PAIR_SIGNS)]
            )
        else:
            op_variant_lists.append([((name, tuple(entries)), 1)])

    best = None
    for out_ent, s_out in out_variants:
        for combo in itertools.product(*op_variant_lists):
            sign = s_out
            ops = []
            for op, s in combo:
                ops.append(op)
                sign *= s
            rename = {}

            def canon(e):
                if e is FIXED:
                    return FIXED
                if e not in rename:
                    rename[e] = len(rename)
                return rename[e]

            out_key = tuple(canon(e) for e in out_ent)
            op_key = tuple((name, tuple(canon(e) for e in ent)) for name, ent in ops)
            cand = (out_key, op_key, sign)
            if best is None or cand[:2] < best[:2]:
                best = cand
    return best


# ---------------------------------------------------------------------------
# numeric evaluation
# ---------------------------------------------------------------------------


def _tensor_env(h, pairing, amps):
    env = {}
    for s in SPINS:
        env[f"h_{s}"] = h[s]
        env[f"hc_{s}"] = -np.conj(h[s])
        env[f"A_{s}"] = pairing[s]
        env[f"t1_{s}"] = amps["t1"][s]
    t2 = amps.get("t2")
    if t2 is not None:
        for key in ("aa", "bb", "ab"):
            env[f"t2_{key}"] = t2[key]
    return env


def evaluate(program: ContractionProgram, h, pairing, amps, n_orb: int) -> dict:
    """Residual tensors for the current amplitudes and one-body channels.

    ``h`` and ``pairing`` map spin to (n_orb, n_orb) matrices; ``amps`` holds
    ``t1`` per spin and, for order 'sd', the three ``t2`` spin blocks.
    """
    env = _tensor_env(h, pairing, amps)
    out = {}
    for s in SPINS:
        out[f"r1_{s}"] = np.zeros((n_orb, n_orb), dtype=complex)
    if program.order == "sd":
        for key in ("aa", "bb", "ab"):
            out[f"r2_{key}"] = np.zeros((n_orb,) * 4, dtype=complex)

    for ins in program.instructions:
        views = []
        skip = False
        for name, entries in ins.operands:
            sel = tuple(0 if e == FIXED else slice(None) for e in entries)
            view = env[name][sel]
            if view.size > 1024 and not view.any():
                skip = True  # exact: a zero factor kills the contribution
                break
            views.append(view)
        if skip:
            continue
        target = out[ins.out]
        sel = tuple(0 if e == FIXED else slice(None) for e in ins.out_entries)
        if _matvec4_accumulate(ins, views, target, sel):
            continue
        if views:
            sub = ins.subscripts()
            if ins.path is None:
                ins.path = np.einsum_path(sub, *views, optimize="optimal")[0]
            val = np.einsum(sub, *views, optimize=ins.path)
        else:
            val = 1.0
        target[sel] += ins.coeff * val

    # instructions for the same-spin doubles are stored as antisymmetry-group
    # representatives; expand them back to the full residual
    for name in ANTISYM_OUTPUTS:
        if name in out:
            r = out[name]
            out[name] = (
                r
                - r.transpose(1, 0, 2, 3)
                - r.transpose(0, 1, 3, 2)
                + r.transpose(1, 0, 3, 2)
            )
    return out


def _matvec4_accumulate(ins, views, target, sel):
    """BLAS fast path for matrix x rank-4 single contractions.

    The residual equations are dominated by one-body channels contracted
    into one axis of a t2 block; routing these through a reshape + gemm is
    several times faster than the general einsum kernel.
    """
    if len(views) != 2 or views[0].ndim != 2 or views[1].ndim != 4:
        return False
    (m_name, m_ent), (t_name, t_ent) = ins.operands
    m_ent = [e for e in m_ent if e != FIXED]
    t_ent = [e for e in t_ent if e != FIXED]
    if len(m_ent) != 2 or len(t_ent) != 4:
        return False
    shared = set(m_ent) & set(t_ent)
    if len(shared) != 1:
        return False
    k = shared.pop()
    axis = t_ent.index(k)
    free_m = m_ent[0] if m_ent[1] == k else m_ent[1]
    if m_ent[0] == k:  # summed index on the matrix row: use transpose
        mat = views[0].T
    else:
        mat = views[0]
    t4 = views[1]
    n = t4.shape[0]
    if axis == 3:  # trailing-axis contraction: single gemm, no copies
        res = (t4.reshape(-1, n) @ mat.T).reshape(t4.shape)
        res_labels = [e for e in t_ent if e != k] + [free_m]
    else:
        left = int(np.prod(t4.shape[:axis], dtype=int))
        right = int(np.prod(t4.shape[axis + 1 :], dtype=int))
        # batched gemm over the leading axes avoids materializing a transpose
        res = np.matmul(mat, t4.reshape(left, n, right)).reshape(
            t4.shape[:axis] + (mat.shape[0],) + t4.shape[axis + 1 :]
        )
        res_labels = [e for e in t_ent[:axis]] + [free_m] + [e for e in t_ent[axis + 1 :]]
    out_labels = [e for e in ins.out_entries if e != FIXED]
    if sorted(res_labels) != sorted(out_labels):
        return False
    perm = tuple(res_labels.index(e) for e in out_labels)
    target[sel] += ins.coeff * res.transpose(perm)
    return True


def dump_equations(program: ContractionProgram) -> str:
    """Human-readable listing of the compiled residual equations."""
    letters = "abcdefghijklmnopqrstuvwxyz"

    def render(name, entries):
        idx = ",".join("0" if e == FIXED else letters[e] for e in entries)
        return f"{name}[{idx}]"

    lines = [
        f"cluster order: {program.order}",
        f"instructions: {len(program.instructions)}",
        "note: r2_aa/r2_bb lines are antisymmetry-group representatives;",
        "      the full residual is r - r(ba,cd) - r(ab,dc) + r(ba,dc)",
    ]
    for ins in program.instructions:
        rhs = " ".join(render(nm, en) for nm, en in ins.operands) or "1"
        c = ins.coeff
        cs = f"{c.real:+.6g}" if abs(c.imag) < 1e-14 else f"+({c:.6g})"
        lines.append(f"{render(ins.out, ins.out_entries)} += {cs} * {rhs}")
    return "\n".join(lines)
