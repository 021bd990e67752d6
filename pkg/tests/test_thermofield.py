import numpy as np
import pytest

from thermocc.model import (
    BathDiscretization,
    SiamConfig,
    build_bath,
    reference_occupations,
)
from thermocc.thermofield import (
    OperatorSymbol,
    OperatorTerm,
    build_super_hamiltonian,
    normal_order,
    number_expectation,
    tilde_conjugate,
    verify_trace_preservation,
)
from thermocc.oracle_dense import DoubledSpace, build_generator, super_hamiltonian_matrix


def _sym(kind, tilde, spin="a", index=0):
    return OperatorSymbol(kind=kind, tilde=tilde, spin=spin, index=index)


def _sh(n_bath=1, **kw):
    cfg = SiamConfig(n_bath=n_bath, **kw)
    if n_bath % 2 == 0:
        bath = build_bath(cfg)
    else:
        bath = BathDiscretization(energies=np.array([0.12]), couplings=np.array([cfg.V]))
    occ = reference_occupations(cfg, bath)
    return cfg, bath, build_super_hamiltonian(cfg, bath, occ)


def test_tilde_conjugation_is_an_involution_on_even_products():
    term = OperatorTerm(
        coeff=0.3 - 0.7j,
        symbols=(
            _sym("cre", False),
            _sym("cre", True, "b", 1),
            _sym("ann", True),
            _sym("ann", False, "b", 0),
        ),
    )
    back = tilde_conjugate(tilde_conjugate(term))
    assert back.symbols == term.symbols
    assert back.coeff == pytest.approx(term.coeff)
    # odd products pick up the fermionic double-tilde minus sign per symbol
    odd = OperatorTerm(coeff=1.0, symbols=(_sym("cre", True),))
    assert tilde_conjugate(tilde_conjugate(odd)).coeff == pytest.approx(-1.0)


def test_tilde_conjugation_sign_counts_existing_tildes():
    # one tilde'd symbol in the product: conjugate picks up (-1)^1
    term = OperatorTerm(coeff=2.0, symbols=(_sym("cre", False), _sym("ann", True)))
    conj = tilde_conjugate(term)
    assert conj.coeff == pytest.approx(-2.0)
    assert [s.tilde for s in conj.symbols] == [True, False]


def test_normal_order_anticommutation_sign():
    # b_0 b+_1 (different modes) -> -b+_1 b_0
    term = OperatorTerm(
        coeff=1.0, symbols=(_sym("ann", False, "a", 0), _sym("cre", False, "a", 1))
    )
    no = normal_order(term)
    assert no.coeff == pytest.approx(-1.0)
    assert no.symbols[0].kind == "cre"


def test_normal_order_rejects_contraction():
    term = OperatorTerm(
        coeff=1.0, symbols=(_sym("ann", False, "a", 0), _sym("cre", False, "a", 0))
    )
    with pytest.raises(ValueError):
        normal_order(term)


def test_super_hamiltonian_is_trace_preserving_structurally():
    for kw in ({}, {"gamma": 0.05}, {"U": 0.0}, {"init_imp_occ_alpha": 0.6, "init_imp_occ_beta": 0.6}):
        _, _, sh = _sh(n_bath=1, **kw)
        assert verify_trace_preservation(sh)


def test_interaction_monomial_count_and_tilde_antisymmetry():
    # generic occupations: the interaction expands into quartic monomials
    # that are antisymmetric under tilde conjugation as a whole
    _, _, sh = _sh(n_bath=1, init_imp_occ_alpha=0.8, init_imp_occ_beta=0.3, temperature=0.04)
    assert 0 < len(sh.interaction) <= 12
    for term in sh.interaction:
        assert len(term.symbols) == 4
        assert all(s.index == 0 for s in term.symbols)
    def canonical(term):
        # sort the creation and annihilation blocks separately (all modes
        # distinct within a block), tracking the fermionic swap parity
        syms = list(term.symbols)
        ncre = sum(1 for s in syms if s.kind == "cre")
        sign = 1
        for block in (slice(0, ncre), slice(ncre, None)):
            seg = syms[block]
            for i in range(len(seg)):
                for j in range(len(seg) - 1 - i):
                    if str(seg[j]) > str(seg[j + 1]):
                        seg[j], seg[j + 1] = seg[j + 1], seg[j]
                        sign = -sign
            syms[block] = seg
        return tuple(syms), sign * term.coeff

    # the interaction satisfies W' = -(W')~: tilde-conjugating every
    # monomial reproduces the negated operator, coefficient by coefficient
    total, conj_total = {}, {}
    for term in sh.interaction:
        key, coeff = canonical(term)
        total[key] = total.get(key, 0.0) + coeff
        ckey, ccoeff = canonical(tilde_conjugate(term))
        conj_total[ckey] = conj_total.get(ckey, 0.0) + ccoeff
    assert set(total) == set(conj_total)
    for key, coeff in total.items():
        assert conj_total[key] == pytest.approx(-coeff)


def test_pairing_vanishes_at_zero_and_unit_occupation_contrast():
    # pairing carries u_p v_q - u_q v_p: zero when all occupations equal
    _, _, sh = _sh(n_bath=1, temperature=0.0, init_imp_occ_alpha=1.0, init_imp_occ_beta=0.0)
    # only the impurity-bath block can be nonzero
    for s in ("a", "b"):
        A = sh.pairing[s]
        assert np.allclose(np.diag(A), 0.0)
        assert np.allclose(A, -A.T)


def test_transformed_generator_matches_dense_generator():
    # the Bogoliubov-transformed generator is the same operator: its dense
    # matrix must equal the directly assembled H - Htilde + D, including
    # interaction, dissipation, driving, and asymmetric occupations
    cfg, bath, sh = _sh(
        n_bath=1,
        U=0.1,
        temperature=0.04,
        gamma=0.05,
        delta_eps=0.08,
        omega=0.5,
        init_imp_occ_alpha=0.9,
        init_imp_occ_beta=0.2,
    )
    space = DoubledSpace(cfg.n_orb)
    for t in (0.0, 0.37):
        ref = build_generator(cfg, bath, t, space).toarray()
        mat = super_hamiltonian_matrix(sh, t, space).toarray()
        assert np.abs(ref - mat).max() < 1e-12


def test_time_dependence_enters_only_impurity_diagonal():
    cfg, _, sh = _sh(n_bath=1, delta_eps=0.08, omega=0.7)
    h0 = sh.h("a", 0.0)
    h1 = sh.h("a", 2.0)
    diff = h1 - h0
    assert diff[0, 0] != 0.0
    diff[0, 0] = 0.0
    assert np.abs(diff).max() == 0.0


def test_number_expectation_reference_and_t1_shift():
    cfg, bath, sh = _sh(n_bath=1, temperature=0.04)
    n = cfg.n_orb
    t1 = {s: np.zeros((n, n), dtype=complex) for s in ("a", "b")}
    nums = number_expectation(sh.occ, t1)
    assert np.allclose(nums["a"], sh.occ.v_alpha)
    t1["a"][0, 0] = 0.05
    nums = number_expectation(sh.occ, t1)
    assert np.isclose(nums["a"][0], sh.occ.v_alpha[0] + 0.05)
