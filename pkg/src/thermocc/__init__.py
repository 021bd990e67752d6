"""Real-time finite-temperature density-matrix coupled-cluster engine
for the single-impurity Anderson model, with dense Fock-space and
thermo-field TEBD reference propagators."""

from .model import (
    BathDiscretization,
    CapacityError,
    ConfigError,
    Occupations,
    SiamConfig,
    build_bath,
    impurity_level,
    occupation,
    reference_occupations,
)
from .dmcc import ClusterAmplitudes, hermiticity_deviation, run_quench
from .observables import impurity_observables, quadratic_oracle, total_number
from .oracle_dense import projection_oracle, propagate_dense
from .oracle_tebd import run_tebd
from .thermofield import SuperHamiltonian, build_super_hamiltonian
from .trajectory import TrajectoryRecord
from .wick import ContractionProgram, dump_equations, evaluate, generate_eom

__version__ = "0.1.0"
