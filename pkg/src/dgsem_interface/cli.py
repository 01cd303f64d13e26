"""Command line: ``dgsem-interface run <config> [overrides]``.

Exit codes: 0 success, 1 configuration error, 2 solver abort, 3 verification
failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig, parse_config
from .energy import CSV_FIELDS
from .experiments import (
    RunResult,
    build_problem,
    coupling_report,
    exact_energy_series,
    has_exact_energy,
    run_experiment_degree,
)
from .solver import SolverAbort

EXIT_OK, EXIT_CONFIG, EXIT_ABORT, EXIT_VERIFY = 0, 1, 2, 3

logger = logging.getLogger("dgsem_interface")


def fmt(v) -> str:
    return f"{float(v):.17g}"


def write_csv(path: Path, header, rows):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(v if isinstance(v, str) else fmt(v) for v in row) + "\n")


def write_energy(path: Path, result: RunResult):
    write_csv(path, CSV_FIELDS, (r.csv_row() for r in result.records))


def write_field(path: Path, prob, values):
    disc = prob.disc
    coords = [np.asarray(c).ravel() for c in disc.coords]
    if len(coords) == 1:
        coords.append(np.zeros_like(coords[0]))
    comps = [np.moveaxis(values, 1, -1).reshape(-1, disc.m)[:, i] for i in range(disc.m)]
    header = ["x", "y"] + [f"component_{i}" for i in range(disc.m)]
    write_csv(path, header, zip(*coords, *comps))


def exact_energy_table(cfg: RunConfig, times, path: Path | None = None) -> list[float]:
    """``(t, E_exact)`` at ``times``; optionally written to ``path``."""
    values = exact_energy_series(cfg, times)
    if path is not None:
        write_csv(path, ("t", "E_exact"), zip(times, values))
    return values


def run_experiment(cfg: RunConfig) -> int:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    multi = len(cfg.degrees) > 1
    error_rows = []
    failures = []
    for degree in cfg.degrees:
        target = out / f"N{degree}" if multi else out
        target.mkdir(parents=True, exist_ok=True)
        try:
            result = run_experiment_degree(cfg, degree)
        except SolverAbort as exc:
            logger.error("solver abort at N=%d: %s", degree, exc)
            return EXIT_ABORT
        write_energy(target / "energy.csv", result)
        if result.exact_energy is not None:
            write_csv(target / "exact_energy.csv", ("t", "E_exact"),
                      zip((r.t for r in result.records), result.exact_energy))
        if result.errors is not None:
            error_rows += [(str(degree), str(i), e) for i, e in enumerate(result.errors)]
        if cfg.dump_field:
            write_field(target / f"field_t{result.final.t:g}.csv", build_problem(cfg, degree),
                        result.final.values)
        if cfg.verify:
            prob = build_problem(cfg, degree)
            (target / "verify.txt").write_text(
                coupling_report(prob.disc) + "\n" + "\n".join(result.verify_failures) + "\n"
            )
            failures += result.verify_failures
        last = result.records[-1]
        logger.info("N=%d done: t=%.6g E_L2=%.10g max_RH=%.3e", degree, last.t, last.E_L2,
                    last.max_RH_violation)
    if error_rows:
        write_csv(out / "errors.csv", ("degree", "component", "l2_error"), error_rows)
    if failures:
        for msg in failures[:20]:
            logger.error("verification: %s", msg)
        return EXIT_VERIFY
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dgsem-interface",
                                 description="DGSEM solver for material-interface wave problems")
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run the experiment described by a config file")
    run.add_argument("config")
    run.add_argument("--degree", help="polynomial degree(s), e.g. 6 or 2,3,6")
    run.add_argument("--cfl", type=float)
    run.add_argument("--tend", type=float)
    run.add_argument("--out")
    run.add_argument("--threads", type=int)
    run.add_argument("--verify", action="store_true", default=None)
    run.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    overrides = {
        "degree": args.degree,
        "cfl": args.cfl,
        "t_end": args.tend,
        "out_dir": args.out,
        "threads": args.threads,
        "verify": args.verify,
    }
    try:
        cfg = parse_config(args.config, overrides)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if cfg.exact_energy and not has_exact_energy(cfg):
        logger.info("experiment %s has no closed-form energy; skipping exact_energy.csv",
                    cfg.experiment)
    return run_experiment(cfg)


if __name__ == "__main__":
    sys.exit(main())
