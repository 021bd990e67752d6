"""Command-line entry point: run simulations, compare CSVs, dump equations.

Exit codes: 0 success, 2 configuration error, 3 capacity refusal,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

import numpy as np

from .model import CapacityError, ConfigError, SiamConfig, build_bath, reference_occupations
from .trajectory import COLUMNS, TrajectoryRecord

__all__ = ["main", "parse_config", "run_method", "compare_records"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CAPACITY = 3
EXIT_NUMERICAL = 4

_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(SiamConfig)}
_INT_KEYS = {"n_bath", "max_bond", "out_stride"}

METHODS = ("dmcc-s", "dmcc-sd", "tebd", "dense", "quadratic")
# bath-size default depends on the method: the singles truncation is cheap
# enough for the full 100-level discretization, everything else defaults to
# the desk-scale 30-level bath
DEFAULT_N_BATH = {"dmcc-s": 100}


def parse_config(path: str, overrides: dict | None = None) -> tuple:
    """Read a key=value config file; returns (SiamConfig, set of keys set).

    Lines are `key = value`, blank, or `#` comments; unknown keys are
    rejected with their line number.
    """
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
            key, _, text = line.partition("=")
            key, text = key.strip(), text.strip()
            if key not in _FIELD_TYPES:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            if key in values:
                raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
            try:
                values[key] = int(text) if key in _INT_KEYS else float(text)
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: bad value for {key!r}: {text!r}") from exc
    if overrides:
        values.update(overrides)
    try:
        return SiamConfig(**values), set(values)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def run_method(method: str, config: SiamConfig, allow_large_t2: bool = False) -> TrajectoryRecord:
    if method == "dmcc-s":
        from .dmcc import run_quench

        return run_quench(config, "dmcc_s")
    if method == "dmcc-sd":
        from .dmcc import run_quench

        return run_quench(config, "dmcc_sd", allow_large_t2=allow_large_t2)
    if method == "tebd":
        from .oracle_tebd import run_tebd

        return run_tebd(config)
    if method == "dense":
        from .oracle_dense import propagate_dense

        return propagate_dense(config)
    if method == "quadratic":
        from .observables import quadratic_oracle

        return quadratic_oracle(config)
    raise ConfigError(f"unknown method {method!r}; expected one of {', '.join(METHODS)}")


def compare_records(a: TrajectoryRecord, b: TrajectoryRecord) -> str:
    ta, tb = np.asarray(a.times), np.asarray(b.times)
    if len(ta) != len(tb) or not np.allclose(ta, tb, rtol=0.0, atol=1e-9):
        raise ConfigError("time grids differ; interpolation is not supported")
    lines = []
    worst = (0.0, "none")
    for col in COLUMNS[1:]:
        va = np.asarray(a.column(col), dtype=float)
        vb = np.asarray(b.column(col), dtype=float)
        if np.isnan(va).all() or np.isnan(vb).all():
            continue
        diff = va - vb
        max_abs = float(np.nanmax(np.abs(diff)))
        mean_abs = float(np.nanmean(np.abs(diff)))
        mean_signed = float(np.nanmean(diff))
        lines.append(
            f"{col}: max_abs={max_abs:.6g} mean_abs={mean_abs:.6g} mean_signed={mean_signed:+.6g}"
        )
        if max_abs > worst[0]:
            worst = (max_abs, col)
    lines.append(f"compare-summary worst_column={worst[1]} max_abs_dev={worst[0]:.6g}")
    return "\n".join(lines)


def _build_parser():
    parser = argparse.ArgumentParser(prog="thermocc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one method and write a trajectory CSV")
    p_run.add_argument("--method", required=True, choices=METHODS)
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", required=True)
    p_run.add_argument(
        "--allow-large-t2",
        action="store_true",
        help="permit dmcc-sd beyond the default bath-size memory guard",
    )

    p_cmp = sub.add_parser("compare", help="report per-column deviations of two CSVs")
    p_cmp.add_argument("csv_a")
    p_cmp.add_argument("csv_b")

    p_dump = sub.add_parser("dump-equations", help="print the compiled residual equations")
    p_dump.add_argument("--config", required=True)
    p_dump.add_argument("--method", default="dmcc-sd", choices=("dmcc-s", "dmcc-sd"))
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            config, explicit = parse_config(args.config)
            if "n_bath" not in explicit and args.method in DEFAULT_N_BATH:
                config = dataclasses.replace(config, n_bath=DEFAULT_N_BATH[args.method])
            record = run_method(args.method, config, allow_large_t2=args.allow_large_t2)
            record.write_csv(args.out)
            print(f"wrote {args.out} ({len(record)} records)")
        elif args.command == "compare":
            a = TrajectoryRecord.read_csv(args.csv_a)
            b = TrajectoryRecord.read_csv(args.csv_b)
            print(compare_records(a, b))
        elif args.command == "dump-equations":
            from .thermofield import build_super_hamiltonian
            from .wick import dump_equations, generate_eom

            config, _ = parse_config(args.config)
            bath = build_bath(config)
            occ = reference_occupations(config, bath)
            sh = build_super_hamiltonian(config, bath, occ)
            order = "s" if args.method == "dmcc-s" else "sd"
            print(dump_equations(generate_eom(sh, order)))
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
