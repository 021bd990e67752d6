"""Quench an interacting impurity against a 30-level thermal bath.

At t = 0 the impurity holds one spin-up electron and is suddenly coupled to
a thermal bath. The spin polarization then relaxes toward zero as the bath
screens the impurity moment; the total population stays near one electron.

Run:  python3 demos/01_quench_basics.py   (about a minute)
"""

import numpy as np

from thermocc import SiamConfig, run_quench

cfg = SiamConfig(
    epsilon0=-0.08,
    V=0.04,
    U=0.1,
    temperature=0.04,
    n_bath=30,
    dt=0.1,
    t_final=60.0,
    out_stride=50,
)

marks = (0, 10, 20, 40, 60)
rec = run_quench(cfg, "dmcc_sd")
times = np.asarray(rec.times)
idx = [int(np.argmin(np.abs(times - t))) for t in marks]

print("time          " + "".join(f"{t:>9g}" for t in marks))
for col in ("n_total", "polarization", "n_electrons"):
    vals = np.asarray(rec.column(col))
    print(f"{col:<14}" + "".join(f"{vals[i]:>9.5f}" for i in idx))

print(
    "\nThe spin polarization decays as the bath screens the initial moment,"
    "\nwhile the total electron number is conserved to round-off."
)
