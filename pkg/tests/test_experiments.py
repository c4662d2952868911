import pytest

from mather_lp.domain import LagrangianSpec, PotentialSpec
from mather_lp.errors import InvalidArgument
from mather_lp.experiments import compute_aggregate, cohomology_sweep, epsilon_sweep, genericity_trial
from mather_lp.holonomy import GridConfig

FREE = LagrangianSpec(1)
SMALL = GridConfig(1, 16, 9, 1 / 4)
TINY = GridConfig(1, 4, 9, 1 / 4)  # dv = 1


def strip_time(report):
    d = report.to_dict()
    d["aggregate"].pop("wall_time")
    return d


def test_degenerate_sample():
    rep = genericity_trial(FREE, 5, 0.0, 1, 0, SMALL)
    assert rep.trials[0].max_face_dimension == 15
    assert rep.aggregate["fraction_dim_ge"]["1"] == 1.0


def test_genericity_is_reproducible():
    a = genericity_trial(FREE, 5, 1.0, 12, 42, SMALL)
    b = genericity_trial(FREE, 5, 1.0, 12, 42, SMALL, workers=2)
    assert strip_time(a) == strip_time(b)
    assert [t.index for t in b.trials] == list(range(12))
    assert a.aggregate["n_errors"] == 0
    assert a.aggregate["fraction_dim_ge"]["1"] == 0.0


def test_aggregate_recomputes(grid):
    rep = genericity_trial(FREE, 3, 1.0, 6, 1, SMALL)
    stored = dict(rep.aggregate)
    stored.pop("wall_time")
    assert compute_aggregate(rep.trials) == stored


def test_free_cohomology_sweep():
    # On n_x = 4 the slice v = -c shifts by -c cells; faces are unions of gcd(shift, 4) cycles.
    c_grid = [-2.0, -1.0, 0.0, 1.0, 2.0]
    rep = cohomology_sweep(FREE, PotentialSpec.zero(), [[c] for c in c_grid], TINY)
    dims = rep.trials[0].face_dimensions
    assert dims == {"-2.0": 1, "-1.0": 0, "0.0": 3, "1.0": 0, "2.0": 1}
    assert rep.trials[0].max_face_dimension == 3


def test_sweep_examples(grid):
    rep = cohomology_sweep(FREE, PotentialSpec.cosine(1), [[0.0]], grid)
    assert rep.trials[0].face_dimensions["0.0"] == 0
    rep = cohomology_sweep(FREE, PotentialSpec.cosine(2), [[0.0]], grid)
    assert rep.trials[0].max_face_dimension >= 1


def test_sweep_rejects_incommensurate(grid):
    with pytest.raises(InvalidArgument):
        cohomology_sweep(FREE, PotentialSpec.cosine(1), [[0.1]], grid)
    with pytest.raises(InvalidArgument):
        cohomology_sweep(FREE, PotentialSpec.cosine(1), [], grid)


def test_epsilon_sweep(grid):
    eps = [0.1, 0.5, 1.0, 2.0]
    rep = epsilon_sweep(FREE, PotentialSpec.cosine(1), eps, [[0.0]], grid)
    assert [t.max_face_dimension for t in rep.trials] == [0, 0, 0, 0]
    rep = epsilon_sweep(FREE, PotentialSpec.cosine(2), eps, [[0.0]], grid)
    assert all(t.max_face_dimension >= 1 for t in rep.trials)
    with pytest.raises(InvalidArgument):
        epsilon_sweep(FREE, PotentialSpec.cosine(1), [0.0], [[0.0]], grid)


def test_single_epsilon_matches_cohomology_sweep(grid):
    V = PotentialSpec(1, (((1,), 0.4, -0.2), ((3,), 0.1, 0.3)))
    c_grid = [[0.0], [0.25], [-0.5]]
    a = epsilon_sweep(FREE, V, [1.0], c_grid, grid).trials[0]
    b = cohomology_sweep(FREE, V, c_grid, grid).trials[0]
    assert a.face_dimensions == b.face_dimensions


def test_scaling_argmax_invariance():
    rep = genericity_trial(FREE, 5, 1.0, 5, 9, SMALL)
    for t in rep.trials:
        V = PotentialSpec.from_dict(t.potential)
        dims = {x.max_face_dimension for x in epsilon_sweep(FREE, V, [0.3, 1.0, 3.0], [[0.0]], SMALL).trials}
        if t.max_face_dimension == 0:
            assert dims == {0}
