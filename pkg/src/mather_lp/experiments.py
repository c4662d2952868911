"""Statistical multiplicity experiments on families of Lagrangians.

A trial records the face dimension (dimension of the set of position marginals
of minimizing measures) of one or more Lagrangians.  "More than one minimizing
measure" is read as face dimension >= 1.
"""
from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .domain import CohomologyClass, LagrangianSpec, PotentialSpec, perturb_by_potential, sample_random_potential, shift_by_cohomology
from .errors import InvalidArgument, MatherLPError
from .holonomy import GridConfig, build_state_space
from .mather import _check_commensurate, graph_property_check, minimize_action

WORKERS_ENV = "MATHER_LP_WORKERS"


@dataclass
class TrialRecord:
    index: int
    seed: int | None
    potential: dict
    face_dimensions: dict = field(default_factory=dict)
    max_face_dimension: int | None = None
    graph_check_pass: bool | None = None
    max_duality_gap: float = 0.0
    error: str | None = None
    label: str = ""

    def to_dict(self):
        return asdict(self)


@dataclass
class ExperimentReport:
    kind: str
    trials: list
    aggregate: dict

    def to_dict(self):
        return {"kind": self.kind, "trials": [t.to_dict() for t in self.trials], "aggregate": self.aggregate}


def compute_aggregate(trials) -> dict:
    ok = [t for t in trials if t.error is None]
    n = len(ok)
    top = max((t.max_face_dimension for t in ok), default=0)
    fractions = {
        str(k): (sum(t.max_face_dimension >= k for t in ok) / n if n else 0.0)
        for k in range(1, max(top, 1) + 1)
    }
    return {
        "n_trials": len(trials),
        "n_errors": len(trials) - n,
        "fraction_dim_ge": fractions,
        "graph_pass_fraction": (sum(bool(t.graph_check_pass) for t in ok) / n if n else 0.0),
        "max_face_dimension": top,
        "max_duality_gap": max((t.max_duality_gap for t in ok), default=0.0),
    }


def potential_summary(V: PotentialSpec) -> dict:
    coeffs = [abs(c) for m in V.modes for c in (m.cos, m.sin)]
    return {"n_modes": len(V.modes), "max_abs_coefficient": max(coeffs, default=0.0), **V.to_dict()}


def _c_key(c: CohomologyClass) -> str:
    return ",".join(repr(ci) for ci in c.c)


def _face_dims(spec, c_grid, config, record: TrialRecord):
    """Fill ``record`` with the face dimension of spec + c for each c."""
    graph_ok = True
    for c in c_grid:
        res = minimize_action(shift_by_cohomology(spec, c), config)
        record.face_dimensions[_c_key(c)] = res.face_dimension
        record.max_duality_gap = max(record.max_duality_gap, res.max_duality_gap)
        space = build_state_space(res.grid)
        graph_ok &= graph_property_check(res.measure, space).passed
    record.max_face_dimension = max(record.face_dimensions.values())
    record.graph_check_pass = bool(graph_ok)
    return record


def _run_trial(args):
    index, seed, base, V, eps, c_grid, config, label = args
    record = TrialRecord(index, seed, potential_summary(V), label=label)
    try:
        _face_dims(perturb_by_potential(base, V, eps), c_grid, config, record)
    except MatherLPError as exc:
        record.error = f"{type(exc).__name__}: {exc}"
        record.face_dimensions = {}
        record.max_face_dimension = None
        record.graph_check_pass = None
    return record


def default_workers() -> int:
    return int(os.environ.get(WORKERS_ENV, "1"))


def _map_trials(jobs, workers):
    if workers is None:
        workers = default_workers()
    if workers <= 1 or len(jobs) <= 1:
        return [_run_trial(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map preserves submission order, so results are ordered by trial index
        return list(pool.map(_run_trial, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


def trial_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def _report(kind, trials, t0):
    aggregate = compute_aggregate(trials)
    aggregate["wall_time"] = time.perf_counter() - t0
    return ExperimentReport(kind, trials, aggregate)


def _as_classes(c_grid, dim):
    out = [c if isinstance(c, CohomologyClass) else CohomologyClass(c) for c in c_grid]
    if not out:
        raise InvalidArgument("cohomology grid is empty")
    if any(c.dim != dim for c in out):
        raise InvalidArgument("cohomology grid dimension does not match the torus")
    return out


def genericity_trial(
    base: LagrangianSpec,
    n_modes: int,
    amplitude: float,
    n_samples: int,
    seed: int,
    config: GridConfig,
    workers: int | None = None,
) -> ExperimentReport:
    """Face dimension of base - V at c = 0 for ``n_samples`` random potentials V."""
    if n_samples < 1:
        raise InvalidArgument("n_samples must be >= 1")
    t0 = time.perf_counter()
    zero = [CohomologyClass.zero(base.dim)]
    jobs = []
    for i in range(n_samples):
        s = trial_seed(seed, i)
        V = sample_random_potential(s, n_modes, amplitude, base.dim)
        jobs.append((i, s, base, V, 1.0, zero, config, ""))
    return _report("genericity", _map_trials(jobs, workers), t0)


def cohomology_sweep(base: LagrangianSpec, V: PotentialSpec, c_grid, config: GridConfig) -> ExperimentReport:
    """Face dimension of base - V + c over a grid of commensurate classes c."""
    t0 = time.perf_counter()
    c_grid = _as_classes(c_grid, base.dim)
    for c in c_grid:
        _check_commensurate(c.c, config, "cohomology class")
    trial = _run_trial((0, None, base, V, 1.0, c_grid, config, "c-sweep"))
    return _report("c-sweep", [trial], t0)


def epsilon_sweep(
    base: LagrangianSpec,
    V: PotentialSpec,
    eps_grid,
    c_grid,
    config: GridConfig,
    workers: int | None = None,
) -> ExperimentReport:
    """One trial per epsilon: face dimensions of base - eps V + c over ``c_grid``."""
    t0 = time.perf_counter()
    eps_grid = [float(e) for e in eps_grid]
    if not eps_grid or any(not e > 0 for e in eps_grid):
        raise InvalidArgument("epsilon grid must be nonempty and positive")
    c_grid = _as_classes(c_grid, base.dim)
    for c in c_grid:
        _check_commensurate(c.c, config, "cohomology class")
    jobs = [(i, None, base, V, e, c_grid, config, f"eps={e!r}") for i, e in enumerate(eps_grid)]
    return _report("eps-sweep", _map_trials(jobs, workers), t0)
