import numpy as np
import pytest

from mather_lp.domain import LagrangianSpec, PotentialSpec, perturb_by_potential, sample_random_potential, shift_by_cohomology
from mather_lp.errors import InvalidArgument, RangeError, TruncationError
from mather_lp.holonomy import DiscreteMeasure, GridConfig, build_state_space, discrete_action, exact_form_costs, closedness_residual
from mather_lp.mather import alpha, beta, graph_property_check, minimize_action, rotation_vector, subdifferential_dimension

FREE = LagrangianSpec(1)
SMALL = GridConfig(1, 16, 9, 1 / 4)  # dv = 0.25, v_max = 1


def test_pendulum_minimizer(grid, pendulum):
    res = minimize_action(pendulum, grid)
    assert -1.02 <= res.min_action <= -0.98
    space = build_state_space(res.grid)
    near = sum(w for _, xi, vi, w in res.support if vi == (0,) and min(xi[0], 64 - xi[0]) <= 1)
    assert near >= 0.99
    assert res.face_dimension == 0
    assert closedness_residual(res.measure, space) <= 1e-10
    assert abs(discrete_action(pendulum, res.measure, space) - res.min_action) <= 1e-9


def test_free_transport_minimizer():
    grid = GridConfig(1, 64, 9, 1 / 32)  # dv = 0.5: the optimal slice is a single cycle
    res = minimize_action(LagrangianSpec(1, cohomology=0.5), grid)
    assert res.min_action == pytest.approx(-0.125, abs=1e-12)
    assert len(res.support) == 64
    assert all(vi == (-1,) and w == pytest.approx(1 / 64) for _, _, vi, w in res.support)
    assert res.rotation_vector[0] == pytest.approx(-0.5, abs=1e-12)
    assert res.face_dimension == 0


def test_free_rest_face(grid):
    res = minimize_action(FREE, grid)
    assert res.min_action == pytest.approx(0.0, abs=1e-14)
    assert res.face_dimension == 63
    assert all(vi == (0,) for _, _, vi, _ in res.support)


def test_rotation_vector_examples(space):
    assert rotation_vector(space.dirac(3, 0), space)[0] == 0.0
    assert rotation_vector(space.velocity_slice((2,)), space)[0] == pytest.approx(0.5)
    mix = space.velocity_slice((2,)).mix(space.velocity_slice((-2,)))
    assert rotation_vector(mix, space)[0] == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(InvalidArgument):
        rotation_vector(DiscreteMeasure([1.0]), space)


def test_alpha_examples(grid, pendulum):
    assert alpha(pendulum, 0.0, grid) == pytest.approx(1.0, abs=0.02)
    for c in (0.25, -0.75, 1.5):
        # analytic: min_v (v^2/2 + c v) = -c^2/2 at v = -c, attained by a transport measure
        assert abs(alpha(FREE, c, grid) - 0.5 * c * c) <= 1e-8
    c1, c2 = -0.5, 1.0
    assert alpha(pendulum, 0.5 * (c1 + c2), grid) <= 0.5 * (alpha(pendulum, c1, grid) + alpha(pendulum, c2, grid)) + 1e-8


def test_beta_examples(grid, pendulum):
    assert beta(FREE, 0.0, grid) == pytest.approx(0.0, abs=1e-14)
    assert beta(FREE, 0.75, grid) == pytest.approx(0.5 * 0.75**2, abs=1e-10)
    for c in (0.25, -0.5, 1.0):
        rho = -c
        # Fenchel-Young with equality at the dual pair for the free particle
        assert abs(beta(FREE, rho, grid) + alpha(FREE, c, grid) + c * rho) <= 1e-8
    for c in (-1.0, -0.25, 0.5):
        for rho in (-0.5, 0.0, 0.3, 1.0):
            assert beta(pendulum, rho, grid) + alpha(pendulum, c, grid) >= -c * rho - 1e-8
    with pytest.raises(RangeError):
        beta(FREE, 3.0, grid)


def test_subdifferential_examples():
    cos1, cos2 = PotentialSpec.cosine(1), PotentialSpec.cosine(2)
    assert subdifferential_dimension(FREE, cos1, SMALL) == 0
    assert subdifferential_dimension(FREE, cos2, SMALL) >= 1
    assert subdifferential_dimension(FREE, PotentialSpec.zero(), SMALL) == 15


def test_graph_property_examples(space):
    assert graph_property_check(space.dirac(4, 0), space).passed
    w = np.zeros(space.n_cells)
    w[space.cell_of(4, 2)] = w[space.cell_of(4, -2)] = 0.5
    report = graph_property_check(DiscreteMeasure(w), space)
    assert report.max_velocities_per_position == 2 and not report.passed
    assert report.offending_positions == [(4,)]
    w = np.zeros(space.n_cells)
    w[space.cell_of(4, 1)] = w[space.cell_of(4, 2)] = 0.5
    assert graph_property_check(DiscreteMeasure(w), space).passed
    assert not graph_property_check(DiscreteMeasure(w), space, merge_radius=0).passed


def test_random_minimizers_are_graphs():
    for seed in range(5):
        res = minimize_action(LagrangianSpec(1, sample_random_potential(seed, 5, 1.0), 0.25), SMALL)
        assert graph_property_check(res.measure, build_state_space(res.grid)).passed


def test_exact_form_invariance(pendulum):
    rng = np.random.default_rng(0)
    base = minimize_action(pendulum, SMALL, face=False).min_action
    for _ in range(5):
        g = rng.normal(size=16)
        res = minimize_action(pendulum, SMALL, face=False, extra_cost=lambda s: exact_form_costs(g, s))
        assert abs(res.min_action - base) <= 1e-9


def test_constant_shift_covariance():
    spec = LagrangianSpec(1, sample_random_potential(11, 3, 1.0))
    a = minimize_action(spec, SMALL)
    b = minimize_action(perturb_by_potential(spec, PotentialSpec.constant(2.5), 1.0), SMALL)
    assert b.min_action == pytest.approx(a.min_action - 2.5, abs=1e-12)
    assert np.array_equal(a.measure.support(), b.measure.support())
    assert a.face_dimension == b.face_dimension


def test_cohomology_pairing(space, pendulum):
    mu = space.velocity_slice((3,)).mix(space.dirac(7, 0), 0.3)
    rho = rotation_vector(mu, space)
    shifted = discrete_action(shift_by_cohomology(pendulum, 0.4), mu, space)
    assert shifted - discrete_action(pendulum, mu, space) == pytest.approx(0.4 * rho[0], abs=1e-14)


def test_subdifferential_matches_face_dimension():
    for seed in range(4):
        f = sample_random_potential(100 + seed, 3, 1.0)
        assert subdifferential_dimension(FREE, f, SMALL) == minimize_action(perturb_by_potential(FREE, f, 1.0), SMALL).face_dimension


def test_truncation_escalation():
    res = minimize_action(LagrangianSpec(1, cohomology=1.5), SMALL)
    assert res.grid.n_v == 17 and not res.truncation_hit
    assert res.min_action == pytest.approx(-1.125, abs=1e-12)
    with pytest.raises(TruncationError):
        minimize_action(LagrangianSpec(1, cohomology=5.0), SMALL)


def test_two_dimensional_pendulum():
    V = PotentialSpec(2, (((1, 0), 1.0, 0.0), ((0, 1), 1.0, 0.0)))
    res = minimize_action(LagrangianSpec(2, V), GridConfig(2, 8, 3, 0.25))
    assert res.min_action == pytest.approx(-2.0, abs=1e-12)
    assert res.face_dimension == 0
    assert res.support[0][1:3] == ((0, 0), (0, 0))


def test_dimension_mismatch(grid):
    with pytest.raises(InvalidArgument):
        minimize_action(LagrangianSpec(2), grid)
