import numpy as np
import pytest

from thermocc.model import BathDiscretization, SiamConfig, build_bath, reference_occupations
from thermocc.thermofield import SPINS, build_super_hamiltonian
from thermocc.oracle_dense import projection_oracle
from thermocc.wick import (
    dump_equations,
    evaluate,
    generate_eom,
    scalar_residual_instructions,
)

RNG = np.random.default_rng(7)


def _setup(n_bath, **kw):
    cfg = SiamConfig(n_bath=n_bath, **kw)
    if n_bath % 2 == 0:
        bath = build_bath(cfg)
    else:
        bath = BathDiscretization(
            energies=np.array([0.12]), couplings=np.array([cfg.V])
        )
    occ = reference_occupations(cfg, bath)
    return cfg, build_super_hamiltonian(cfg, bath, occ)


def _random_amps(n, order, scale=0.1):
    def c(*shape):
        return scale * (RNG.standard_normal(shape) + 1j * RNG.standard_normal(shape))

    amps = {"t1": {s: c(n, n) for s in SPINS}, "t2": None}
    if order == "sd":
        t2 = {key: c(n, n, n, n) for key in ("aa", "bb", "ab")}
        # the propagated same-spin doubles are antisymmetric in each index
        # pair; the compiled program assumes that symmetry of its inputs
        for key in ("aa", "bb"):
            x = t2[key]
            t2[key] = 0.25 * (
                x
                - x.transpose(1, 0, 2, 3)
                - x.transpose(0, 1, 3, 2)
                + x.transpose(1, 0, 3, 2)
            )
        amps["t2"] = t2
    return amps


@pytest.mark.parametrize("n_bath", [1, 2])
@pytest.mark.parametrize("order", ["s", "sd"])
def test_residuals_match_projection_oracle(n_bath, order):
    # the compiled contraction program must reproduce the literal
    # similarity-transform projections, including dissipation, interaction,
    # and spin-asymmetric reference occupations
    cfg, sh = _setup(
        n_bath,
        U=0.1,
        temperature=0.05,
        gamma=0.03,
        init_imp_occ_alpha=0.9,
        init_imp_occ_beta=0.2,
    )
    amps = _random_amps(cfg.n_orb, order)
    program = generate_eom(sh, order)
    h = {s: sh.h(s, 0.0) for s in SPINS}
    got = evaluate(program, h, sh.pairing, amps, cfg.n_orb)
    want = projection_oracle(sh, amps if order == "sd" else {"t1": amps["t1"]})
    assert set(want) <= set(got)
    for name, ref in want.items():
        assert np.max(np.abs(got[name] - ref)) < 1e-12, name


def test_driven_residuals_match_projection_oracle():
    cfg, sh = _setup(1, U=0.08, gamma=0.04, delta_eps=0.08, omega=0.5, temperature=0.04)
    amps = _random_amps(cfg.n_orb, "sd")
    program = generate_eom(sh, "sd")
    for t in (0.0, 1.7):
        h = {s: sh.h(s, t) for s in SPINS}
        got = evaluate(program, h, sh.pairing, amps, cfg.n_orb)
        want = projection_oracle(sh, amps, t=t)
        for name, ref in want.items():
            assert np.max(np.abs(got[name] - ref)) < 1e-12, (name, t)


@pytest.mark.parametrize("order", ["s", "sd"])
def test_scalar_residual_is_structurally_zero(order):
    # projecting the similarity-transformed generator on the reference gives
    # no instructions at all: trace preservation holds term by term, exactly
    _, sh = _setup(2, U=0.1, gamma=0.05, temperature=0.04)
    assert scalar_residual_instructions(sh, order) == []


def test_noninteracting_program_has_no_quartic_sources():
    # at U=0 no instruction references the interaction scalar, so zero t2
    # stays zero under the doubles residual
    cfg, sh = _setup(2, U=0.0, temperature=0.04)
    program = generate_eom(sh, "sd")
    amps = {"t1": {s: 0.1 * RNG.standard_normal((cfg.n_orb,) * 2) for s in SPINS}}
    amps["t2"] = {k: np.zeros((cfg.n_orb,) * 4, dtype=complex) for k in ("aa", "bb", "ab")}
    out = evaluate(program, {s: sh.h(s, 0.0) for s in SPINS}, sh.pairing, amps, cfg.n_orb)
    for key in ("aa", "bb", "ab"):
        assert np.max(np.abs(out[f"r2_{key}"])) == 0.0


def test_same_spin_residual_antisymmetry():
    cfg, sh = _setup(2, U=0.1, gamma=0.02, temperature=0.04)
    amps = _random_amps(cfg.n_orb, "sd")
    out = evaluate(
        generate_eom(sh, "sd"), {s: sh.h(s, 0.0) for s in SPINS}, sh.pairing, amps, cfg.n_orb
    )
    for key in ("aa", "bb"):
        r = out[f"r2_{key}"]
        assert np.max(np.abs(r + r.transpose(1, 0, 2, 3))) < 1e-13
        assert np.max(np.abs(r + r.transpose(0, 1, 3, 2))) < 1e-13


def test_dump_equations_lists_all_residual_blocks():
    _, sh = _setup(2, U=0.1, temperature=0.04)
    text = dump_equations(generate_eom(sh, "sd"))
    for name in ("r1_a", "r1_b", "r2_aa", "r2_bb", "r2_ab"):
        assert name in text
    assert "einsum" in text or "=" in text
