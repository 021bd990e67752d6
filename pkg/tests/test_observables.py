import numpy as np
import pytest

from thermocc.model import ConfigError, SiamConfig, occupation
from thermocc.observables import impurity_observables, quadratic_oracle, total_number
from thermocc.oracle_dense import propagate_dense


def test_impurity_observables_and_total_number():
    numbers = {"a": np.array([0.7, 0.1]), "b": np.array([0.2, 0.4])}
    n_tot, pol = impurity_observables(numbers)
    assert n_tot == pytest.approx(0.9)
    assert pol == pytest.approx(0.5)
    assert total_number(numbers) == pytest.approx(1.4)


def test_quadratic_oracle_requires_quadratic_model():
    for bad in (
        SiamConfig(n_bath=2, U=0.1),
        SiamConfig(n_bath=2, U=0.0, gamma=0.01),
        SiamConfig(n_bath=2, U=0.0, delta_eps=0.05),
    ):
        with pytest.raises(ConfigError):
            quadratic_oracle(bad)


def test_decoupled_levels_are_constant():
    cfg = SiamConfig(
        n_bath=4,
        V=0.0,
        U=0.0,
        temperature=0.05,
        init_imp_occ_alpha=occupation(-0.08, 0.05),
        init_imp_occ_beta=occupation(-0.08, 0.05),
        dt=0.1,
        t_final=10.0,
    )
    rec = quadratic_oracle(cfg)
    for col in ("n_imp_alpha", "n_imp_beta", "n_electrons"):
        vals = np.asarray(rec.column(col))
        assert np.max(np.abs(vals - vals[0])) < 1e-13


def test_quadratic_oracle_matches_dense():
    cfg = SiamConfig(
        n_bath=2,
        U=0.0,
        temperature=0.05,
        init_imp_occ_alpha=0.9,
        init_imp_occ_beta=0.1,
        dt=0.005,
        t_final=5.0,
        out_stride=100,
    )
    exact = quadratic_oracle(cfg)
    dense = propagate_dense(cfg)
    assert np.allclose(exact.times, dense.times)
    for col in ("n_imp_alpha", "n_imp_beta", "n_total", "n_electrons"):
        dev = np.max(
            np.abs(np.asarray(exact.column(col)) - np.asarray(dense.column(col)))
        )
        assert dev < 1e-8, (col, dev)


def test_number_conservation_in_quadratic_oracle():
    cfg = SiamConfig(n_bath=10, U=0.0, temperature=0.04, dt=0.05, t_final=50.0)
    rec = quadratic_oracle(cfg)
    n = np.asarray(rec.column("n_electrons"))
    assert np.max(np.abs(n - n[0])) < 1e-12
