"""End-to-end command-line workflow: run, inspect, compare.

Writes a config file, runs two methods through the console entry point,
and compares the resulting trajectory CSVs column by column.

Run:  python3 demos/04_cli_workflow.py
"""

import tempfile
from pathlib import Path

from thermocc.cli import main

CONFIG = """\
# noninteracting quench: singles truncation is exact here
n_bath = 10
U = 0.0
temperature = 0.04
dt = 0.02
t_final = 20.0
out_stride = 50
"""

with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    cfg = tmp / "quench.cfg"
    cfg.write_text(CONFIG)
    a, b = tmp / "dmcc_s.csv", tmp / "exact.csv"

    for method, out in (("dmcc-s", a), ("quadratic", b)):
        code = main(["run", "--method", method, "--config", str(cfg), "--out", str(out)])
        assert code == 0, f"{method} exited {code}"

    print("\nper-column deviation dmcc-s vs exact quadratic solution:")
    assert main(["compare", str(a), str(b)]) == 0

    print("\ncompiled residual equations (first lines):")
    import contextlib, io

    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        main(["dump-equations", "--config", str(cfg), "--method", "dmcc-s"])
    print("\n".join(buf.getvalue().splitlines()[:12]))
