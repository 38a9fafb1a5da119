"""Command-line driver: ``ofsv convergence|run|verify``.

Exit codes: 0 success, 1 numerical failure, 2 configuration error.
Set ``OFSV_NUM_THREADS`` to cap the threads used by the BLAS backend;
it only takes effect when set before the package is first imported.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from . import io
from .analysis import convergence_study
from .config import ConfigError, build_simulation, load_config
from .physics import InvalidState
from .solver import Diagnostics

log = logging.getLogger("ofsv")

EXIT_OK, EXIT_NUMERICAL, EXIT_CONFIG = 0, 1, 2
NUMERICAL_ERRORS = (InvalidState, FloatingPointError, ArithmeticError)


def _floats(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text: str) -> List[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def cmd_convergence(args) -> int:
    cfg = load_config(args.config)
    rows = convergence_study(cfg, args.meshes, damping=False if args.no_damping else None)
    header = ["mesh", "e0", "e0_order", "ec", "ec_order", "en", "en_order"]
    table = [[r.mesh, r.e0, r.e0_order, r.ec, r.ec_order, r.en, r.en_order] for r in rows]
    if args.output:
        io.write_csv(args.output, header, table)
    else:
        print(",".join(header))
        for row in table:
            print(",".join(io.fmt(v) for v in row))
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    out_s = cfg.section("output")
    snaps = args.snapshots if args.snapshots is not None else list(out_s.get("snapshots", []))
    sim = build_simulation(cfg)
    t_final = sim.control.t_final
    snaps = sorted(s for s in snaps if 0.0 <= s <= t_final)
    outdir = Path(args.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    prefix = outdir / (args.prefix or out_s.get("prefix", "run"))
    written = []

    def dump(state):
        path = io.write_snapshot(prefix, state, sim.law, len(written))
        written.append((state.t, path))
        log.info("snapshot t=%.6g -> %s", state.t, path)

    diag = Diagnostics()
    state = sim.initial_state()
    last = [state]

    def keep(t, u):
        last[0] = state.copy(u, t)

    status = EXIT_OK
    try:
        final, _ = sim.run(state, snapshots=snaps, on_snapshot=dump, on_step=keep,
                           diagnostics=diag)
        if not written or written[-1][0] != final.t:
            dump(final)
    except NUMERICAL_ERRORS as exc:
        print(f"ofsv: numerical failure: {exc}", file=sys.stderr)
        # keep the last valid state next to the snapshots already written
        if not written or written[-1][0] != last[0].t:
            dump(last[0])
        status = EXIT_NUMERICAL
    finally:
        io.write_diagnostics(f"{prefix}_diagnostics.csv", diag, sim.law, sim.law.m)
    index = [[t, str(p)] for t, p in written]
    with open(f"{prefix}_snapshots.csv", "w") as fh:
        fh.write("t,file\n")
        fh.writelines(f"{io.fmt(t)},{p}\n" for t, p in index)
    return status


def cmd_verify(args) -> int:
    from .verify import run_checks
    checks = run_checks(args.only)
    ok = all(c.passed for c in checks)
    summary = {"passed": ok, "checks": [c.as_dict() for c in checks]}
    print(json.dumps(summary, indent=2))
    return EXIT_OK if ok else EXIT_NUMERICAL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ofsv", description="Oscillation-free spectral volume solver")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("convergence", help="error table over a list of meshes")
    c.add_argument("config", help="config file or preset name")
    c.add_argument("--meshes", type=_ints, default=[8, 16, 32, 64, 128])
    c.add_argument("--no-damping", action="store_true", help="plain SV scheme (sigma = 0)")
    c.add_argument("--output", help="CSV path (default: stdout)")
    c.set_defaults(func=cmd_convergence)

    r = sub.add_parser("run", help="run a configuration and write snapshots")
    r.add_argument("config", help="config file or preset name")
    r.add_argument("--snapshots", type=_floats, default=None, help="times t1,t2,...")
    r.add_argument("--output-dir", default=".")
    r.add_argument("--prefix", default=None)
    r.set_defaults(func=cmd_run)

    v = sub.add_parser("verify", help="run the self-check suite")
    v.add_argument("--only", nargs="*", default=None, help="subset of check groups")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"ofsv: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NUMERICAL_ERRORS as exc:
        print(f"ofsv: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
