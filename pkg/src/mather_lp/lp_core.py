"""Linear programming over closed-measure polytopes.

``solve_lp`` is a dense revised simplex method for problems in standard form

    minimize c.x  subject to  A x = b,  x >= 0

with the basis inverse refactored from an LU decomposition every
``REFACTOR_EVERY`` pivots and updated by elementary row operations in
between.  Pricing is Dantzig's rule; after ``STALL_LIMIT`` pivots without a
strict decrease of the objective it falls back to Bland's smallest-index
rule, which cannot cycle.  Redundant equality rows (the balance rows of a
closed-measure polytope always sum to zero) are detected at the end of phase
one and dropped.

``optimal_face_dimension`` measures the affine dimension of the image of the
optimal face under a linear map, by re-solving with random secondary
objectives restricted to that face.
"""
from __future__ import annotations

import contextlib
import contextvars
import itertools
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp

from .errors import InstanceTooLarge, InvalidArgument, SolverError
from .holonomy import ConstraintSystem, DiscreteMeasure

FEAS_TOL = 1e-10
OPT_TOL = 1e-10
PIVOT_TOL = 1e-9
GAP_TOL = 1e-9
RANK_TOL = 1e-7
FACE_ZERO_TOL = 1e-9
REFACTOR_EVERY = 64
STALL_LIMIT = 50

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
ITERATION_LIMIT = "iteration_limit"


@dataclass(frozen=True)
class LinearProgram:
    c: np.ndarray
    constraints: ConstraintSystem

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).reshape(-1)
        if c.size != self.constraints.n_vars:
            raise InvalidArgument(
                f"objective has {c.size} entries for {self.constraints.n_vars} variables"
            )
        object.__setattr__(self, "c", c)

    def dump(self, path):
        """Plain-text dump: ``c j value`` lines, then the constraint triplets."""
        self.constraints.write_triplets(path)
        with open(path, "a", encoding="ascii") as fh:
            for j, cj in enumerate(self.c):
                fh.write(f"c {j} {float(cj)!r}\n")


@dataclass
class OptimalSolution:
    status: str
    value: float = float("nan")
    x: np.ndarray | None = None
    duals: np.ndarray | None = None
    reduced_costs: np.ndarray | None = None
    basis: np.ndarray | None = None
    rows: np.ndarray | None = None
    iterations: int = 0
    primal_residual: float = float("nan")
    duality_gap: float = float("nan")
    dual_infeasibility: float = float("nan")

    @property
    def vertex(self) -> DiscreteMeasure:
        return DiscreteMeasure(self.x)

    @property
    def dual_value(self):
        return self.value - self.duality_gap

    def require_optimal(self):
        if self.status != OPTIMAL:
            raise SolverError(self.status)
        return self


# Solve certificates (duality gap etc.) collected while a recorder is active.
_recorder: contextvars.ContextVar[list | None] = contextvars.ContextVar("_recorder", default=None)


@dataclass
class SolveLog:
    gaps: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    dual_infeasibilities: list = field(default_factory=list)

    @property
    def n_solves(self):
        return len(self.gaps)

    @property
    def max_gap(self):
        return max(self.gaps, default=0.0)


@contextlib.contextmanager
def record_solves():
    """Collect the certificate of every optimal ``solve_lp`` call in this context."""
    log = SolveLog()
    token = _recorder.set(log)
    try:
        yield log
    finally:
        _recorder.reset(token)


class _Simplex:
    """Working state of one revised-simplex run.  Single-threaded, throwaway."""

    def __init__(self, A: sp.csc_matrix, b, c, rows):
        self.A_full = A
        self.b_full = b
        self.c = c
        self.n = A.shape[1]
        self.set_rows(rows)
        self.iterations = 0

    def set_rows(self, rows):
        self.rows = np.asarray(rows, dtype=np.int64)
        A = self.A_full[self.rows].tocsc()
        A.sort_indices()
        self.A = A
        self.b = self.b_full[self.rows]
        self.m = len(self.rows)

    def column(self, j):
        col = np.zeros(self.m)
        if j >= self.n:
            col[j - self.n] = 1.0
        else:
            lo, hi = self.A.indptr[j], self.A.indptr[j + 1]
            col[self.A.indices[lo:hi]] = self.A.data[lo:hi]
        return col

    def refactor(self):
        B = np.zeros((self.m, self.m))
        for p, j in enumerate(self.basis):
            B[:, p] = self.column(j)
        lu = la.lu_factor(B, check_finite=False)
        self.Binv = la.lu_solve(lu, np.eye(self.m), check_finite=False)
        xb = la.lu_solve(lu, self.b, check_finite=False)
        xb[(xb < 0) & (xb > -FEAS_TOL)] = 0.0
        self.xb = xb
        self.since_refactor = 0

    def alpha(self, j):
        if j >= self.n:
            return self.Binv[:, j - self.n].copy()
        lo, hi = self.A.indptr[j], self.A.indptr[j + 1]
        return self.Binv[:, self.A.indices[lo:hi]] @ self.A.data[lo:hi]

    def pivot(self, r, j, alpha):
        theta = self.xb[r] / alpha[r]
        self.xb -= theta * alpha
        self.xb[r] = theta
        self.xb[(self.xb < 0) & (self.xb > -FEAS_TOL)] = 0.0
        pivot_row = self.Binv[r] / alpha[r]
        self.Binv -= np.outer(alpha, pivot_row)
        self.Binv[r] = pivot_row
        self.basis[r] = j
        self.since_refactor += 1
        self.iterations += 1

    def run(self, cost, allow_artificial, max_iter):
        """Iterate to optimality for ``cost`` over columns ``0..n-1`` (+ artificials)."""
        bland = False
        stall = 0
        best = np.inf
        while True:
            if self.since_refactor >= REFACTOR_EVERY:
                self.refactor()
            cost_b = self._basic_costs(cost, allow_artificial)
            y = cost_b @ self.Binv
            d = cost - self.A.T @ y
            d[self.basis[self.basis < self.n]] = 0.0
            if bland:
                candidates = np.flatnonzero(d < -OPT_TOL)
                j = int(candidates[0]) if candidates.size else -1
            else:
                j = int(np.argmin(d))
                if d[j] >= -OPT_TOL:
                    j = -1
            if j < 0:
                if self.since_refactor == 0:
                    return OPTIMAL
                self.refactor()
                continue
            if self.iterations >= max_iter:
                return ITERATION_LIMIT
            alpha = self.alpha(j)
            pos = np.flatnonzero(alpha > PIVOT_TOL)
            if pos.size == 0:
                return UNBOUNDED
            ratios = self.xb[pos] / alpha[pos]
            tmin = ratios.min()
            ties = pos[ratios <= tmin + 1e-12]
            if bland or ties.size == 1:
                r = int(ties[np.argmin(self.basis[ties])])
            else:
                r = int(ties[np.argmax(alpha[ties])])
            self.pivot(r, j, alpha)
            value = self.objective(cost, allow_artificial)
            if value < best - 1e-12 * (1.0 + abs(best if np.isfinite(best) else 0.0)):
                best = value
                stall = 0
                bland = False
            else:
                stall += 1
                if stall >= STALL_LIMIT:
                    bland = True

    def _basic_costs(self, cost, allow_artificial):
        cb = np.empty(self.m)
        art = self.basis >= self.n
        cb[~art] = cost[self.basis[~art]]
        cb[art] = 1.0 if allow_artificial else 0.0
        return cb

    def objective(self, cost, allow_artificial):
        return float(self._basic_costs(cost, allow_artificial) @ self.xb)


def _phase_one(s: _Simplex, max_iter):
    s.basis = np.arange(s.n, s.n + s.m)
    s.refactor()
    zero = np.zeros(s.n)
    status = s.run(zero, True, max_iter)
    if status != OPTIMAL:
        return status
    if s.objective(zero, True) > FEAS_TOL * max(1.0, np.abs(s.b).max()):
        return INFEASIBLE
    # Drive zero-level artificials out of the basis; rows where that is
    # impossible are linear combinations of the others and get dropped.
    redundant = []
    for p in range(s.m):
        if s.basis[p] < s.n:
            continue
        row = s.A.T @ s.Binv[p]
        row[s.basis[s.basis < s.n]] = 0.0
        j = int(np.argmax(np.abs(row)))
        if abs(row[j]) > PIVOT_TOL:
            s.pivot(p, j, s.alpha(j))
        else:
            redundant.append(p)
    if redundant:
        keep_pos = np.setdiff1d(np.arange(s.m), redundant)
        drop_rows = {int(s.basis[p]) - s.n for p in redundant}
        basis = s.basis[keep_pos]
        s.set_rows([r for i, r in enumerate(s.rows) if i not in drop_rows])
        s.basis = basis
    s.refactor()
    return OPTIMAL


def solve_lp(lp: LinearProgram, basis=None, rows=None, max_iter=None) -> OptimalSolution:
    """Solve ``min c.x, A x = b, x >= 0``.

    ``basis``/``rows`` optionally warm-start from a known feasible basis (the
    ``basis`` and ``rows`` of an earlier :class:`OptimalSolution` over the same
    constraint rows).  Non-optimal outcomes are reported through ``status``.
    """
    cs = lp.constraints
    A = cs.A.tocsc()
    b = np.asarray(cs.b, dtype=float)
    sign = np.where(b < 0, -1.0, 1.0)
    if np.any(sign < 0):
        A = sp.diags(sign) @ A
        A = A.tocsc()
        b = b * sign
    m_total, n = A.shape
    if max_iter is None:
        max_iter = 50 * (m_total + n) + 1000
    s = _Simplex(A, b, lp.c, np.arange(m_total) if rows is None else rows)

    warm = False
    if basis is not None:
        s.basis = np.array(basis, dtype=np.int64)
        if len(s.basis) == s.m:
            try:
                s.refactor()
                warm = bool(np.all(s.xb >= -FEAS_TOL)) and np.all(np.isfinite(s.Binv))
            except (la.LinAlgError, ValueError):
                warm = False
    if not warm:
        s.set_rows(np.arange(m_total))
        status = _phase_one(s, max_iter)
        if status != OPTIMAL:
            return OptimalSolution(status, iterations=s.iterations)

    status = s.run(lp.c, False, max_iter)
    if status != OPTIMAL:
        return OptimalSolution(status, iterations=s.iterations)

    x = np.zeros(n)
    x[s.basis] = s.xb
    x[(x < 0) & (x > -FEAS_TOL)] = 0.0
    y_kept = lp.c[s.basis] @ s.Binv
    d = lp.c - s.A.T @ y_kept
    d[s.basis] = 0.0
    duals = np.zeros(m_total)
    duals[s.rows] = y_kept * sign[s.rows]
    value = float(lp.c @ x)
    dual_obj = float(y_kept @ s.b)
    sol = OptimalSolution(
        OPTIMAL,
        value=value,
        x=x,
        duals=duals,
        reduced_costs=d,
        basis=s.basis.copy(),
        rows=s.rows.copy(),
        iterations=s.iterations,
        primal_residual=float(np.max(np.abs(cs.A @ x - cs.b))),
        duality_gap=abs(value - dual_obj),
        dual_infeasibility=float(max(0.0, -d.min())),
    )
    log = _recorder.get()
    if log is not None:
        log.gaps.append(sol.duality_gap)
        log.residuals.append(sol.primal_residual)
        log.dual_infeasibilities.append(sol.dual_infeasibility)
    return sol


def numerical_rank(M, tol=RANK_TOL) -> int:
    """Rank by Gaussian elimination with complete pivoting, pivots below ``tol`` count as zero."""
    M = np.array(M, dtype=float, copy=True)
    if M.size == 0:
        return 0
    rank = 0
    rows, cols = M.shape
    for k in range(min(rows, cols)):
        sub = np.abs(M[k:, k:])
        i, j = np.unravel_index(np.argmax(sub), sub.shape)
        if sub[i, j] <= tol:
            break
        i += k
        j += k
        M[[k, i]] = M[[i, k]]
        M[:, [k, j]] = M[:, [j, k]]
        M[k + 1:] -= np.outer(M[k + 1:, k] / M[k, k], M[k])
        rank += 1
    return rank


@dataclass
class FaceProbe:
    dimension: int
    points: np.ndarray
    probes_used: int
    max_gap: float


def probe_optimal_face(
    lp: LinearProgram,
    projection,
    n_probes: int | None = None,
    tol: float = RANK_TOL,
    solution: OptimalSolution | None = None,
    seed: int = 0,
) -> FaceProbe:
    """Affine dimension of ``projection`` applied to the optimal face of ``lp``.

    The optimal face is the set of feasible points supported on columns of zero
    reduced cost, which pins the objective to its optimum within
    ``FACE_ZERO_TOL`` per unit mass.  Each probe draws a random direction ``r``
    orthogonal to everything learned so far and minimises and maximises
    ``r . (P x)`` over that face: either the two values differ (a new direction
    of the projected face) or ``r`` is certified normal to it.  The probe
    sequence depends only on ``seed``, so more probes never lower the result.
    """
    P = projection.toarray() if sp.issparse(projection) else np.asarray(projection, dtype=float)
    if P.shape[1] != lp.constraints.n_vars:
        raise InvalidArgument("projection does not act on the LP variables")
    D = P.shape[0]
    if n_probes is None:
        n_probes = D + 1
    sol = solution if solution is not None else solve_lp(lp)
    sol.require_optimal()
    gaps = [sol.duality_gap]

    Z = np.flatnonzero(sol.reduced_costs <= FACE_ZERO_TOL)
    p0 = P @ sol.x
    points = [p0]
    A_Z = lp.constraints.A[sol.rows][:, Z].toarray()
    P_Z = P[:, Z]
    null = la.null_space(A_Z) if A_Z.shape[1] else np.zeros((0, 0))
    if null.size == 0:
        return FaceProbe(0, np.array(points), 0, max(gaps))
    W = P_Z @ null
    U = la.orth(W, rcond=None) if np.abs(W).max() > tol else np.zeros((D, 0))
    U = U[:, : numerical_rank(W, tol)] if U.shape[1] else U
    k = U.shape[1]
    if k == 0:
        return FaceProbe(0, np.array(points), 0, max(gaps))

    face = ConstraintSystem(lp.constraints.A[:, Z].tocsc(), lp.constraints.b, lp.constraints.n_balance)
    where = {int(j): i for i, j in enumerate(Z)}
    warm = np.array([where[int(j)] for j in sol.basis])
    rng = np.random.default_rng(seed)
    learned = []  # orthonormal directions: hull directions and certified normals
    used = 0
    for _ in range(n_probes):
        if len(learned) >= k:
            break
        r = U @ rng.standard_normal(k)
        for _pass in range(2):
            for q in learned:
                r -= (q @ r) * q
        norm = np.linalg.norm(r)
        used += 1
        if norm < 1e-12:
            continue
        r /= norm
        cost = P_Z.T @ r
        lo = solve_lp(LinearProgram(cost, face), basis=warm, rows=sol.rows).require_optimal()
        hi = solve_lp(LinearProgram(-cost, face), basis=warm, rows=sol.rows).require_optimal()
        gaps += [lo.duality_gap, hi.duality_gap]
        p_lo, p_hi = P_Z @ lo.x, P_Z @ hi.x
        points += [p_lo, p_hi]
        if r @ (p_hi - p_lo) > tol:
            for p in (p_lo, p_hi):
                e = p - p0
                for _pass in range(2):
                    for q in learned:
                        e -= (q @ e) * q
                if np.linalg.norm(e) > tol / 2:
                    learned.append(e / np.linalg.norm(e))
        else:
            learned.append(r)
    pts = np.array(points)
    return FaceProbe(numerical_rank(pts[1:] - p0, tol), pts, used, max(gaps))


def optimal_face_dimension(lp, projection, n_probes=None, tol=RANK_TOL, solution=None, seed=0) -> int:
    return probe_optimal_face(lp, projection, n_probes, tol, solution, seed).dimension


MAX_BRUTEFORCE_VARS = 24


def enumerate_vertices_bruteforce(constraints: ConstraintSystem, dedupe_tol=1e-9, as_measures=True) -> list:
    """Every basic feasible solution, by trying all column subsets of size rank(A).

    Exponential; meant as an independent test oracle on tiny instances.  With
    ``as_measures=False`` plain arrays are returned, for polytopes whose
    points are not probability vectors.
    """
    n = constraints.n_vars
    if n > MAX_BRUTEFORCE_VARS:
        raise InstanceTooLarge(
            f"{n} variables exceeds the brute-force limit of {MAX_BRUTEFORCE_VARS}"
        )
    A = constraints.A.toarray()
    b = np.asarray(constraints.b, dtype=float)
    r = np.linalg.matrix_rank(A)
    found: list[np.ndarray] = []
    for cols in itertools.combinations(range(n), r):
        A_S = A[:, cols]
        if np.linalg.matrix_rank(A_S) < r:
            continue
        x_S, *_ = np.linalg.lstsq(A_S, b, rcond=None)
        if np.max(np.abs(A_S @ x_S - b)) > 1e-9 or np.any(x_S < -1e-9):
            continue
        x = np.zeros(n)
        x[list(cols)] = np.clip(x_S, 0.0, None)
        if not any(np.max(np.abs(x - y)) <= dedupe_tol for y in found):
            found.append(x)
    return [DiscreteMeasure(x) for x in found] if as_measures else found
