import numpy as np
import pytest
import scipy.sparse as sp

from mather_lp.domain import LagrangianSpec, PotentialSpec
from mather_lp.errors import InstanceTooLarge, InvalidArgument
from mather_lp.holonomy import ConstraintSystem, GridConfig, build_closed_measure_constraints, build_state_space, cell_costs
from mather_lp.lp_core import (
    INFEASIBLE,
    OPTIMAL,
    UNBOUNDED,
    LinearProgram,
    enumerate_vertices_bruteforce,
    numerical_rank,
    optimal_face_dimension,
    probe_optimal_face,
    record_solves,
    solve_lp,
)

from oracles import bruteforce_face_dimension, bruteforce_optimum


def system(A, b):
    return ConstraintSystem(sp.csc_matrix(np.asarray(A, dtype=float)), np.asarray(b, dtype=float), 0)


def test_two_variable_lp():
    sol = solve_lp(LinearProgram([1.0, 0.0], system([[1, 1]], [1])))
    assert sol.status == OPTIMAL
    assert sol.value == 0.0
    assert np.array_equal(sol.x, [0.0, 1.0])


def test_infeasible_and_unbounded_are_statuses():
    assert solve_lp(LinearProgram([1.0, 1.0], system([[1, 1]], [-1]))).status == INFEASIBLE
    assert solve_lp(LinearProgram([-1.0, 0.0], system([[1, -1]], [0]))).status == UNBOUNDED


def test_beale_cycling_example():
    # Classic LP on which Dantzig's rule with naive tie-breaking cycles forever.
    A = [
        [1, 0, 0, 0.25, -8, -1, 9],
        [0, 1, 0, 0.5, -12, -0.5, 3],
        [0, 0, 1, 0, 0, 1, 0],
    ]
    c = np.array([0, 0, 0, -0.75, 20, -0.5, 6])
    cs = system(A, [0, 0, 1])
    sol = solve_lp(LinearProgram(c, cs))
    expected, _ = bruteforce_optimum(c, cs)
    assert sol.status == OPTIMAL
    assert sol.value == pytest.approx(-1.25, abs=1e-12)
    assert sol.value == pytest.approx(expected, abs=1e-12)


def test_pendulum_rest_point():
    cfg = GridConfig(1, 32, 9, 1 / 8)
    s = build_state_space(cfg)
    pend = LagrangianSpec.mechanical(PotentialSpec.cosine(1))
    sol = solve_lp(LinearProgram(cell_costs(pend, s), build_closed_measure_constraints(s)))
    assert abs(sol.value + 1.0) <= 0.02
    near = [c for c in range(s.n_cells) if min(s.cell_pos[c], 32 - s.cell_pos[c]) <= 1 and s.v_index(c) == (0,)]
    assert sol.x[near].sum() >= 0.99


def test_random_objectives_match_bruteforce(tiny_constraints):
    rng = np.random.default_rng(7)
    for _ in range(20):
        c = rng.normal(size=12)
        sol = solve_lp(LinearProgram(c, tiny_constraints))
        best, _ = bruteforce_optimum(c, tiny_constraints)
        assert abs(sol.value - best) <= 1e-10
        assert sol.duality_gap <= 1e-9
        assert sol.primal_residual <= 1e-10
        assert sol.dual_infeasibility <= 1e-9


def test_solution_invariants(space, pendulum):
    C = build_closed_measure_constraints(space)
    lp = LinearProgram(cell_costs(pendulum, space), C)
    a, b = solve_lp(lp), solve_lp(lp)
    assert np.array_equal(a.x, b.x) and a.value == b.value and np.array_equal(a.duals, b.duals)
    rank = np.linalg.matrix_rank(C.A.toarray())
    assert np.count_nonzero(a.x) <= rank
    assert abs(a.value - (a.duals @ C.b)) <= 1e-9


def test_warm_start_reproduces_optimum(space, pendulum):
    lp = LinearProgram(cell_costs(pendulum, space), build_closed_measure_constraints(space))
    cold = solve_lp(lp)
    warm = solve_lp(lp, basis=cold.basis, rows=cold.rows)
    assert warm.iterations == 0
    assert warm.value == pytest.approx(cold.value, abs=1e-12)


def test_objective_length_checked(tiny_constraints):
    with pytest.raises(InvalidArgument):
        LinearProgram(np.zeros(3), tiny_constraints)


def test_recorder_collects_certificates(tiny_constraints):
    with record_solves() as log:
        for seed in range(3):
            solve_lp(LinearProgram(np.random.default_rng(seed).normal(size=12), tiny_constraints))
    assert log.n_solves == 3 and log.max_gap <= 1e-9


def test_enumeration_examples():
    verts = enumerate_vertices_bruteforce(system([[1, 1]], [1]))
    assert sorted(tuple(v.weights) for v in verts) == [(0.0, 1.0), (1.0, 0.0)]
    s2 = build_state_space(GridConfig(1, 2, 3, 0.5))
    supports = [tuple(v.support()) for v in enumerate_vertices_bruteforce(build_closed_measure_constraints(s2))]
    assert (s2.cell_of(0, 0),) in supports and (s2.cell_of(1, 0),) in supports
    with pytest.raises(InstanceTooLarge):
        enumerate_vertices_bruteforce(build_closed_measure_constraints(build_state_space(GridConfig(1, 9, 3, 0.1))))


@pytest.mark.parametrize(
    "potential, expected",
    [(PotentialSpec.cosine(1), 0), (PotentialSpec.cosine(2), 1), (PotentialSpec.zero(), 3)],
)
def test_face_dimension_matches_oracle(tiny_space, tiny_constraints, potential, expected):
    c = cell_costs(LagrangianSpec.mechanical(potential), tiny_space)
    P = tiny_space.position_marginal_matrix()
    assert bruteforce_face_dimension(c, tiny_constraints, P.toarray()) == expected
    assert optimal_face_dimension(LinearProgram(c, tiny_constraints), P) == expected


def test_face_dimension_random_objectives_match_oracle(tiny_space, tiny_constraints):
    # integer objectives create ties, so faces of several dimensions occur
    rng = np.random.default_rng(3)
    P = tiny_space.position_marginal_matrix()
    for _ in range(15):
        c = rng.integers(0, 3, size=12).astype(float)
        expected = bruteforce_face_dimension(c, tiny_constraints, P.toarray())
        assert optimal_face_dimension(LinearProgram(c, tiny_constraints), P) == expected


def test_free_particle_face(space):
    lp = LinearProgram(cell_costs(LagrangianSpec(1), space), build_closed_measure_constraints(space))
    assert optimal_face_dimension(lp, space.position_marginal_matrix()) == 63


def test_face_dimension_monotone_in_probes(space):
    lp = LinearProgram(cell_costs(LagrangianSpec(1), space), build_closed_measure_constraints(space))
    P = space.position_marginal_matrix()
    dims = [optimal_face_dimension(lp, P, n_probes=k) for k in (0, 1, 2, 5, 10, 40, 65)]
    assert dims == sorted(dims)
    assert dims[0] == 0 and dims[-1] == 63


def test_probe_reports_points(space):
    lp = LinearProgram(cell_costs(LagrangianSpec.mechanical(PotentialSpec.cosine(2)), space), build_closed_measure_constraints(space))
    probe = probe_optimal_face(lp, space.position_marginal_matrix())
    assert probe.dimension == 1
    supports = {tuple(np.flatnonzero(p > 0.5)) for p in probe.points}
    assert supports == {(0,), (32,)}


def test_numerical_rank(rng):
    for r in range(0, 5):
        M = rng.normal(size=(6, r)) @ rng.normal(size=(r, 7))
        assert numerical_rank(M) == np.linalg.matrix_rank(M)
    assert numerical_rank(np.diag([1.0, 1e-9])) == 1


def test_lp_dump(tmp_path, tiny_constraints):
    path = tmp_path / "lp.txt"
    LinearProgram(np.arange(12.0), tiny_constraints).dump(path)
    lines = path.read_text().splitlines()
    assert sum(line.startswith("c ") for line in lines) == 12
