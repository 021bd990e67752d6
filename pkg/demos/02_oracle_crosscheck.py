"""Cross-validate every propagator on a bath small enough for brute force.

With two bath levels the doubled Fock space has only 2^12 states, so the
generator can be exponentiated step by step. The coupled-cluster and
matrix-product propagators are then compared against that exact solution.

Run:  python3 demos/02_oracle_crosscheck.py
"""

import numpy as np

from thermocc import SiamConfig, propagate_dense, run_quench, run_tebd

cfg = SiamConfig(
    n_bath=2,
    U=0.1,
    temperature=0.05,
    gamma=0.02,
    dt=0.01,
    tebd_dt=0.01,
    t_final=20.0,
    out_stride=100,
)

dense = propagate_dense(cfg)
runs = {
    "dmcc_s": run_quench(cfg, "dmcc_s"),
    "dmcc_sd": run_quench(cfg, "dmcc_sd"),
    "tebd": run_tebd(cfg),
}

ref = np.asarray(dense.column("n_total"))
print("max |impurity population - exact| over t <= 20:")
for name, rec in runs.items():
    dev = np.max(np.abs(np.asarray(rec.column("n_total")) - ref))
    print(f"  {name:<8} {dev:.3e}")
print(
    "\nThe doubles truncation closes almost exactly on this small problem;\n"
    "the singles truncation carries a visible mean-field error."
)
