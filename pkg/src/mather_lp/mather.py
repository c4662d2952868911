"""Minimizing measures, alpha/beta functions and face dimensions on a grid.

Sign conventions: ``alpha(c) = -min_mu  sum (L + c.v) dmu`` over discrete closed
probability measures, so alpha is convex and ``alpha(0)`` is minus the minimal
action.  ``beta(rho)`` is the minimal action among closed measures with
rotation vector ``rho``.  With these conventions the Fenchel-Young inequality
reads ``beta(rho) + alpha(c) >= -c.rho``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import CohomologyClass, LagrangianSpec, PotentialSpec, perturb_by_potential, shift_by_cohomology
from .errors import InvalidArgument, RangeError, TruncationError
from .holonomy import (
    DiscreteMeasure,
    DiscreteStateSpace,
    GridConfig,
    build_closed_measure_constraints,
    build_state_space,
    cell_costs,
)
from .lp_core import INFEASIBLE, RANK_TOL, LinearProgram, probe_optimal_face, solve_lp

SUPPORT_TOL = 1e-9
MAX_DOUBLINGS = 2  # velocity cutoff may grow to 4x its initial value


@dataclass
class MatherResult:
    min_action: float
    measure: DiscreteMeasure
    face_dimension: int | None
    rotation_vector: np.ndarray
    support: list
    truncation_hit: bool
    grid: GridConfig
    max_duality_gap: float

    def to_dict(self):
        return {
            "min_action": self.min_action,
            "face_dimension": self.face_dimension,
            "rotation_vector": [float(r) for r in self.rotation_vector],
            "truncation_hit": self.truncation_hit,
            "grid": {"dim": self.grid.dim, "n_x": self.grid.n_x, "n_v": self.grid.n_v, "h": self.grid.h},
            "max_duality_gap": self.max_duality_gap,
            "support": [
                {"cell": c, "x_index": list(xi), "v_index": list(vi), "weight": w}
                for c, xi, vi, w in self.support
            ],
        }


@dataclass
class _ActionSolve:
    space: DiscreteStateSpace
    lp: LinearProgram
    solution: object
    truncation_hit: bool


def _solve_on(costs_of, config: GridConfig, extra_cost=None) -> _ActionSolve:
    """Solve the action LP, widening the velocity grid while the optimum touches the cutoff.

    ``costs_of(space)`` returns the per-cell objective.
    """
    base = config.half_width
    half = base
    for _ in range(MAX_DOUBLINGS + 1):
        cfg = config if half == base else config.widened(half)
        space = build_state_space(cfg)
        costs = costs_of(space)
        if extra_cost is not None:
            costs = costs + extra_cost(space)
        lp = LinearProgram(costs, build_closed_measure_constraints(space))
        sol = solve_lp(lp).require_optimal()
        hit = bool(np.any(space.boundary_cells[sol.x > SUPPORT_TOL]))
        if not hit:
            return _ActionSolve(space, lp, sol, hit)
        half = max(1, 2 * half)
    raise TruncationError(
        f"optimal measure still reaches |v| = {cfg.v_max:g} after widening the velocity "
        f"grid to n_v = {cfg.n_v}; the Lagrangian is too steep for this grid budget"
    )


def _result(run: _ActionSolve, face_dimension, gap):
    space, sol = run.space, run.solution
    measure = DiscreteMeasure(sol.x)
    support = [
        (int(c), space.x_index(c), space.v_index(c), float(sol.x[c]))
        for c in measure.support(SUPPORT_TOL)
    ]
    return MatherResult(
        min_action=sol.value,
        measure=measure,
        face_dimension=face_dimension,
        rotation_vector=rotation_vector(measure, space),
        support=support,
        truncation_hit=run.truncation_hit,
        grid=space.config,
        max_duality_gap=max(gap, sol.duality_gap),
    )


def _face(run: _ActionSolve, n_probes, rank_tol, seed):
    probe = probe_optimal_face(
        run.lp, run.space.position_marginal_matrix(), n_probes, rank_tol, run.solution, seed
    )
    return probe.dimension, probe.max_gap


def minimize_action(
    spec: LagrangianSpec,
    config: GridConfig,
    *,
    face: bool = True,
    n_probes: int | None = None,
    rank_tol: float = RANK_TOL,
    seed: int = 0,
    extra_cost=None,
) -> MatherResult:
    """Minimal discrete action over closed probability measures and an extremal minimizer.

    ``face_dimension`` is the affine dimension of the set of position marginals
    of all minimizers (``None`` when ``face=False``).  ``extra_cost(space)`` may
    add a per-cell term to the objective.
    """
    if spec.dim != config.dim:
        raise InvalidArgument("Lagrangian and grid dimension differ")
    run = _solve_on(lambda space: cell_costs(spec, space), config, extra_cost)
    dim, gap = _face(run, n_probes, rank_tol, seed) if face else (None, 0.0)
    return _result(run, dim, gap)


def rotation_vector(measure: DiscreteMeasure, space: DiscreteStateSpace) -> np.ndarray:
    if len(measure) != space.n_cells:
        raise InvalidArgument("measure and state space disagree on the number of cells")
    return measure.weights @ space.v


def _check_commensurate(values, config: GridConfig, what):
    for ci in np.atleast_1d(values):
        if config.velocity_index(ci) is None:
            raise InvalidArgument(
                f"{what} component {ci!r} is not a multiple of the velocity step {config.dv!r}"
            )


def alpha(spec: LagrangianSpec, c, config: GridConfig) -> float:
    c = c if isinstance(c, CohomologyClass) else CohomologyClass(c)
    return -minimize_action(shift_by_cohomology(spec, c), config, face=False).min_action


def beta(spec: LagrangianSpec, rho, config: GridConfig) -> float:
    """Minimal action among discrete closed measures with rotation vector ``rho``.

    The velocity grid is used as given (no widening): ``rho`` must lie in the
    hull of the grid velocities.
    """
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    if rho.size != spec.dim or spec.dim != config.dim:
        raise InvalidArgument("rotation vector dimension does not match the torus")
    if np.any(np.abs(rho) > config.v_max + 1e-12):
        raise RangeError(f"rotation vector {rho.tolist()} outside the velocity cutoff {config.v_max:g}")
    space = build_state_space(config)
    constraints = build_closed_measure_constraints(space).with_rows(space.v.T, rho)
    sol = solve_lp(LinearProgram(cell_costs(spec, space), constraints))
    if sol.status == INFEASIBLE:
        raise RangeError(f"no closed measure on this grid has rotation vector {rho.tolist()}")
    return sol.require_optimal().value


def subdifferential_dimension(
    spec: LagrangianSpec,
    f: PotentialSpec,
    config: GridConfig,
    *,
    n_probes: int | None = None,
    rank_tol: float = RANK_TOL,
    seed: int = 0,
) -> int:
    """Dimension of the subdifferential of f -> sup_mu int (f - L) dmu, in position marginals.

    The supremum is a maximisation LP whose gains are ``f - L`` per cell;
    it is solved as minimisation of the negated gains.  Subgradients are the
    position marginals of the maximisers.
    """
    perturbed = perturb_by_potential(spec, f, 1.0)

    def negated_gains(space):
        gains = -cell_costs(perturbed, space)
        return -gains

    run = _solve_on(negated_gains, config)
    return _face(run, n_probes, rank_tol, seed)[0]


@dataclass
class GraphReport:
    max_velocities_per_position: int
    offending_positions: list

    @property
    def passed(self):
        return self.max_velocities_per_position <= 1


def _clusters(indices: np.ndarray, radius: int) -> int:
    """Connected components of velocity index tuples under sup-distance <= radius."""
    n = len(indices)
    label = list(range(n))

    def find(i):
        while label[i] != i:
            label[i] = label[label[i]]
            i = label[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if np.max(np.abs(indices[i] - indices[j])) <= radius:
                label[find(i)] = find(j)
    return len({find(i) for i in range(n)})


def graph_property_check(
    measure: DiscreteMeasure, space: DiscreteStateSpace, tol: float = SUPPORT_TOL, merge_radius: int = 1
) -> GraphReport:
    """Count distinct occupied velocities per position.

    Occupied velocity cells within ``merge_radius`` grid steps of each other are
    counted once, which tolerates smearing across adjacent cells.
    """
    if len(measure) != space.n_cells:
        raise InvalidArgument("measure and state space disagree on the number of cells")
    occupied = np.flatnonzero(measure.weights > tol)
    by_pos: dict[int, list] = {}
    for c in occupied:
        by_pos.setdefault(int(space.cell_pos[c]), []).append(space.velocities[space.cell_vel[c]])
    counts = {p: _clusters(np.array(vs), merge_radius) for p, vs in by_pos.items()}
    worst = max(counts.values(), default=0)
    offending = sorted(tuple(int(i) for i in space.positions[p]) for p, k in counts.items() if k > 1)
    return GraphReport(worst, offending)
