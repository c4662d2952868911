"""Discretised phase space and the polytope of discrete closed probability measures.

Positions live on the uniform grid {i / n_x} of the torus and velocities on
{j * dv : |j| <= (n_v - 1) / 2} with ``dv = dx / h``.  Because every velocity is
an integer multiple of ``dx / h`` the transport ``x -> x + h v`` maps grid
points to grid points, so a cell ``(i, j)`` has successor position ``i + j``
(mod n_x) exactly.

A measure on cells is closed when, at every position, the outgoing mass
equals the incoming mass.  These balance rows together with the
normalisation row form the :class:`ConstraintSystem`.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .domain import LagrangianSpec, eval_lagrangian
from .errors import InvalidArgument

WEIGHT_FLOOR = -1e-12
MASS_TOL = 1e-10


@dataclass(frozen=True)
class GridConfig:
    dim: int = 1
    n_x: int = 64
    n_v: int = 17
    h: float = 1.0 / 16.0

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise InvalidArgument(f"dim must be 1 or 2, got {self.dim}")
        if int(self.n_x) != self.n_x or self.n_x < 2:
            raise InvalidArgument(f"n_x must be an integer >= 2, got {self.n_x}")
        if int(self.n_v) != self.n_v or self.n_v < 1 or self.n_v % 2 == 0:
            raise InvalidArgument(f"n_v must be an odd integer >= 1, got {self.n_v}")
        if not self.h > 0:
            raise InvalidArgument(f"time step h must be positive, got {self.h}")

    @property
    def dx(self):
        return 1.0 / self.n_x

    @property
    def dv(self):
        return self.dx / self.h

    @property
    def half_width(self):
        return (self.n_v - 1) // 2

    @property
    def v_max(self):
        return self.half_width * self.dv

    def velocity_index(self, v, tol=1e-9):
        """Signed grid index of a commensurate velocity component, else ``None``."""
        j = v / self.dv
        r = round(j)
        return int(r) if abs(j - r) <= tol * max(1.0, abs(j)) else None

    def widened(self, half_width):
        return GridConfig(self.dim, self.n_x, 2 * half_width + 1, self.h)


class DiscreteStateSpace:
    """Cells ``(position index tuple, signed velocity index tuple)``.

    Cell ``c`` has position ``c // n_vel`` and velocity ``c % n_vel`` where the
    flat indices ravel the tuples in C order.
    """

    def __init__(self, config: GridConfig):
        self.config = config
        d, n_x, n_v = config.dim, config.n_x, config.n_v
        hw = config.half_width
        self.positions = np.array(list(itertools.product(range(n_x), repeat=d)), dtype=np.int64)
        self.velocities = np.array(
            list(itertools.product(range(-hw, hw + 1), repeat=d)), dtype=np.int64
        )
        self.n_pos = len(self.positions)
        self.n_vel = len(self.velocities)
        cells = np.arange(self.n_pos * self.n_vel)
        self.cell_pos = cells // self.n_vel
        self.cell_vel = cells % self.n_vel
        target = (self.positions[self.cell_pos] + self.velocities[self.cell_vel]) % n_x
        self.successor = np.ravel_multi_index(tuple(target.T), (n_x,) * d)

    @property
    def n_cells(self):
        return self.n_pos * self.n_vel

    @cached_property
    def x(self):
        """Cell positions in [0, 1)^d, shape (n_cells, d)."""
        return self.positions[self.cell_pos] * self.config.dx

    @cached_property
    def v(self):
        return self.velocities[self.cell_vel] * self.config.dv

    def x_index(self, cell):
        return tuple(int(i) for i in self.positions[self.cell_pos[cell]])

    def v_index(self, cell):
        return tuple(int(j) for j in self.velocities[self.cell_vel[cell]])

    def cell_of(self, x_index, v_index):
        d, n_x, hw = self.config.dim, self.config.n_x, self.config.half_width
        x_index = tuple(np.atleast_1d(x_index))
        v_index = tuple(np.atleast_1d(v_index))
        if len(x_index) != d or len(v_index) != d:
            raise InvalidArgument("index tuple does not match the torus dimension")
        if any(abs(j) > hw for j in v_index):
            raise InvalidArgument(f"velocity index {v_index} outside +-{hw}")
        pos = np.ravel_multi_index(tuple(i % n_x for i in x_index), (n_x,) * d)
        vel = np.ravel_multi_index(tuple(j + hw for j in v_index), (self.config.n_v,) * d)
        return int(pos * self.n_vel + vel)

    @cached_property
    def boundary_cells(self):
        """Mask of cells whose velocity touches the truncation |v_i| = v_max."""
        hw = self.config.half_width
        return np.any(np.abs(self.velocities[self.cell_vel]) == hw, axis=1)

    def position_marginal_matrix(self):
        return sp.csr_matrix(
            (np.ones(self.n_cells), (self.cell_pos, np.arange(self.n_cells))),
            shape=(self.n_pos, self.n_cells),
        )

    def velocity_slice(self, v_index):
        """Uniform measure on all cells with the given velocity index."""
        w = np.zeros(self.n_cells)
        for pos in range(self.n_pos):
            w[self.cell_of(self.positions[pos], v_index)] = 1.0 / self.n_pos
        return DiscreteMeasure(w)

    def dirac(self, x_index, v_index):
        w = np.zeros(self.n_cells)
        w[self.cell_of(x_index, v_index)] = 1.0
        return DiscreteMeasure(w)


def build_state_space(config: GridConfig) -> DiscreteStateSpace:
    return DiscreteStateSpace(config)


class DiscreteMeasure:
    """Probability weights on the cells of a state space."""

    def __init__(self, weights):
        w = np.array(weights, dtype=float).reshape(-1)
        if w.size == 0:
            raise InvalidArgument("empty measure")
        if np.any(w < WEIGHT_FLOOR):
            raise InvalidArgument(f"negative weight {w.min():.3e}")
        total = w.sum()
        if abs(total - 1.0) > MASS_TOL:
            raise InvalidArgument(f"weights sum to {total!r}, not 1")
        w[w < 0] = 0.0
        w.setflags(write=False)
        self.weights = w

    def __len__(self):
        return self.weights.size

    def mix(self, other, t=0.5):
        return DiscreteMeasure((1 - t) * self.weights + t * other.weights)

    def support(self, tol=1e-9):
        return np.flatnonzero(self.weights > tol)


@dataclass(frozen=True)
class ConstraintSystem:
    """``A w = b, w >= 0``.  Rows ``0..n_balance-1`` are per-position mass balance."""

    A: sp.csc_matrix
    b: np.ndarray
    n_balance: int

    @property
    def n_rows(self):
        return self.A.shape[0]

    @property
    def n_vars(self):
        return self.A.shape[1]

    def with_rows(self, rows, rhs):
        """Append extra equality rows (dense ``rows`` of shape (k, n_vars))."""
        A = sp.vstack([self.A, sp.csr_matrix(np.atleast_2d(rows))]).tocsc()
        return ConstraintSystem(A, np.concatenate([self.b, np.atleast_1d(rhs)]), self.n_balance)

    def write_triplets(self, path):
        """Plain-text sparse dump: a header line, then ``row col value`` per nonzero."""
        coo = self.A.tocoo()
        order = np.lexsort((coo.col, coo.row))
        with open(path, "w", encoding="ascii") as fh:
            fh.write(f"# rows={self.n_rows} cols={self.n_vars} nnz={coo.nnz}\n")
            for k in order:
                fh.write(f"{coo.row[k]} {coo.col[k]} {float(coo.data[k])!r}\n")
            for i, bi in enumerate(self.b):
                fh.write(f"b {i} {float(bi)!r}\n")


def build_closed_measure_constraints(space: DiscreteStateSpace) -> ConstraintSystem:
    n, m = space.n_cells, space.n_pos
    cols = np.arange(n)
    rows = np.concatenate([space.cell_pos, space.successor, np.full(n, m)])
    data = np.concatenate([np.ones(n), -np.ones(n), np.ones(n)])
    A = sp.csc_matrix((data, (rows, np.tile(cols, 3))), shape=(m + 1, n))
    A.sum_duplicates()
    A.eliminate_zeros()
    b = np.zeros(m + 1)
    b[m] = 1.0
    return ConstraintSystem(A, b, m)


def _check(measure: DiscreteMeasure, space: DiscreteStateSpace):
    if len(measure) != space.n_cells:
        raise InvalidArgument(
            f"measure has {len(measure)} weights but the state space has {space.n_cells} cells"
        )
    return measure.weights


def balance(weights, space: DiscreteStateSpace):
    """Outflow minus inflow at every position."""
    out = np.bincount(space.cell_pos, weights=weights, minlength=space.n_pos)
    inflow = np.bincount(space.successor, weights=weights, minlength=space.n_pos)
    return out - inflow


def closedness_residual(measure: DiscreteMeasure, space: DiscreteStateSpace) -> float:
    w = _check(measure, space)
    return float(np.max(np.abs(balance(w, space))) + abs(w.sum() - 1.0))


def cell_costs(spec: LagrangianSpec, space: DiscreteStateSpace):
    """L evaluated at every cell, the objective vector of the action LP."""
    if spec.dim != space.config.dim:
        raise InvalidArgument("Lagrangian and grid live on tori of different dimension")
    return eval_lagrangian(spec, space.x, space.v)


def discrete_action(spec: LagrangianSpec, measure: DiscreteMeasure, space: DiscreteStateSpace) -> float:
    w = _check(measure, space)
    return float(cell_costs(spec, space) @ w)


def exact_form_costs(g, space: DiscreteStateSpace):
    """Cell values of g(successor) - g(position) for a function on positions."""
    g = np.asarray(g, dtype=float).reshape(-1)
    if g.size != space.n_pos:
        raise InvalidArgument(f"position function needs {space.n_pos} values")
    return g[space.successor] - g[space.cell_pos]
