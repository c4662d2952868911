"""``mather-lp run CONFIG.json [--output-dir DIR] [--workers N] [--seed S]``.

Exit status: 0 success, 2 malformed configuration, 3 solver failure,
4 output directory not writable.
"""
from __future__ import annotations

import argparse
import datetime
import logging
import os
import sys
import time

import numpy as np

from .. import __version__
from ..errors import InvalidArgument, SolverError
from ..experiments import WORKERS_ENV, cohomology_sweep, epsilon_sweep, genericity_trial
from ..flow import bin_trajectory, energy, fourier_closedness, integrate_el
from ..holonomy import build_state_space, closedness_residual
from ..mather import alpha, beta, minimize_action
from .config import ConfigError, RunConfig, cohomology_list, load_config, potential_from
from .reports import write_curve, write_json, write_report

log = logging.getLogger("mather_lp")

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_OUTPUT = 0, 2, 3, 4


def _check_writable(directory):
    os.makedirs(directory, exist_ok=True)
    probe = os.path.join(directory, ".write-test")
    with open(probe, "w") as fh:
        fh.write("")
    os.remove(probe)


def _minimize(cfg, spec, grid, out):
    res = minimize_action(spec, grid, seed=cfg.seed)
    return write_report(res, out)


def _curve(cfg, spec, grid, out, which):
    points = cfg.experiment.c_values if which == "alpha" else cfg.experiment.rho_values
    fn = alpha if which == "alpha" else beta
    values = [fn(spec, p, grid) for p in points]
    label = "c" if which == "alpha" else "rho"
    data = {"function": which, "points": points, "values": values}
    return [
        write_json(data, os.path.join(out, "result.json")),
        write_curve(os.path.join(out, f"{which}.csv"), label, points, values),
    ]


def _flow(cfg, spec, grid, out):
    ex = cfg.experiment
    traj = integrate_el(spec, ex.x0, ex.v0, ex.h_ode, ex.T)
    space = build_state_space(grid)
    binned = bin_trajectory(traj, space)
    E = energy(spec, traj.x, traj.v)
    data = {
        "samples": len(traj),
        "energy_drift": float(np.max(np.abs(E - E[0]))),
        "closedness_residual": closedness_residual(binned.measure, space),
        "fourier_closedness": fourier_closedness(binned.measure, space),
        "clip_fraction": binned.clip_fraction,
        "final_winding": traj.winding[-1].tolist(),
    }
    path = os.path.join(out, "trajectory.csv")
    traj.write_csv(path)
    return [write_json(data, os.path.join(out, "result.json")), path]


def execute(cfg: RunConfig) -> list[str]:
    spec = cfg.lagrangian.build()
    grid = cfg.grid.build(spec.dim)
    ex = cfg.experiment
    out = cfg.output_dir
    if cfg.command == "minimize":
        return _minimize(cfg, spec, grid, out)
    if cfg.command == "alpha-curve":
        return _curve(cfg, spec, grid, out, "alpha")
    if cfg.command == "beta-curve":
        return _curve(cfg, spec, grid, out, "beta")
    if cfg.command == "validate-flow":
        return _flow(cfg, spec, grid, out)
    if cfg.command == "genericity":
        report = genericity_trial(spec, ex.n_modes, ex.amplitude, ex.n_samples, cfg.seed, grid, cfg.workers)
    elif cfg.command == "c-sweep":
        V = potential_from(ex.potential, spec.dim)
        report = cohomology_sweep(spec, V, cohomology_list(ex.c_values), grid)
    else:
        V = potential_from(ex.potential, spec.dim)
        report = epsilon_sweep(spec, V, ex.eps_values, cohomology_list(ex.c_values), grid, cfg.workers)
    return write_report(report, out)


def run_config(path, output_dir=None, workers=None, seed=None) -> int:
    """Execute one configuration file; returns the process exit status."""
    t0 = time.perf_counter()
    try:
        cfg = load_config(path, output_dir=output_dir, workers=workers, seed=seed)
    except ConfigError as err:
        log.error("invalid configuration: %s", err)
        return EXIT_CONFIG
    if cfg.workers is None:
        cfg = cfg.model_copy(update={"workers": int(os.environ.get(WORKERS_ENV, "1"))})
    try:
        _check_writable(cfg.output_dir)
    except OSError as err:
        log.error("output directory %s is not writable: %s", cfg.output_dir, err)
        return EXIT_OUTPUT
    try:
        files = execute(cfg)
    except InvalidArgument as err:
        log.error("invalid configuration: %s", err)
        return EXIT_CONFIG
    except SolverError as err:
        log.error("solver failure (%s): %s", err.status, err)
        return EXIT_SOLVER
    except OSError as err:
        log.error("%s", err)
        return EXIT_OUTPUT
    manifest = {
        "config": cfg.to_json_dict(),
        "seed": cfg.seed,
        "version": __version__,
        "wall_time": time.perf_counter() - t0,
        "created": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "files": sorted(os.path.basename(f) for f in files),
    }
    write_json(manifest, os.path.join(cfg.output_dir, "manifest.json"))
    log.info("wrote %s", ", ".join(manifest["files"] + ["manifest.json"]))
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="mather-lp", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="cmd", required=True)
    run = sub.add_parser("run", help="execute a JSON run configuration")
    run.add_argument("config")
    run.add_argument("--output-dir")
    run.add_argument("--workers", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("-v", "--verbose", action="store_true")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    return run_config(args.config, args.output_dir, args.workers, args.seed)


if __name__ == "__main__":
    sys.exit(main())
