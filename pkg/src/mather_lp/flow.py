"""Euler-Lagrange flow of mechanical Lagrangians and empirical occupation measures.

For L = 0.5|v|^2 - eps V(x) + c.v the Euler-Lagrange equation is Newton's
equation x'' = -eps grad V(x); the one-form c.v does not change the flow.
Energy 0.5|v|^2 + eps V(x) is conserved.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from .domain import LagrangianSpec
from .errors import InvalidArgument, UnsupportedSpec
from .holonomy import DiscreteMeasure, DiscreteStateSpace


@dataclass(frozen=True)
class Trajectory:
    """Samples of the flow.  ``x`` is unwrapped (winding = floor(x))."""

    t: np.ndarray
    x: np.ndarray
    v: np.ndarray
    step: float
    duration: float

    def __len__(self):
        return len(self.t)

    @property
    def wrapped(self):
        return np.mod(self.x, 1.0)

    @property
    def winding(self):
        return np.floor(self.x).astype(np.int64)

    def write_csv(self, path):
        d = self.x.shape[1]
        header = ["t"] + [f"x{i}" for i in range(d)] + [f"v{i}" for i in range(d)]
        with open(path, "w", newline="", encoding="ascii") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in np.column_stack([self.t, self.x, self.v]):
                w.writerow([repr(float(a)) for a in row])


def _acceleration(spec: LagrangianSpec):
    eps, V = spec.epsilon, spec.potential
    if eps == 0 or not V.modes:
        zero = np.zeros(spec.dim)
        return lambda x: zero
    K, a, b = V._wave_matrix()
    scale = -eps * 2.0 * np.pi

    def acc(x):
        phase = 2.0 * np.pi * (K @ x)
        return scale * ((np.cos(phase) * b - np.sin(phase) * a) @ K)

    return acc


def energy(spec: LagrangianSpec, x, v):
    x = np.atleast_2d(x)
    v = np.atleast_2d(v)
    return 0.5 * np.sum(v * v, axis=-1) + spec.epsilon * spec.potential(x)


def integrate_el(spec: LagrangianSpec, x0, v0, h_ode: float, T: float) -> Trajectory:
    """Classical RK4 for x'' = -eps grad V(x) with fixed step ``h_ode`` up to time ``T``."""
    if not isinstance(spec, LagrangianSpec):
        raise UnsupportedSpec("only mechanical Lagrangians 0.5|v|^2 - eps V + c.v are supported")
    if not h_ode > 0 or T < h_ode:
        raise InvalidArgument("need h_ode > 0 and T >= h_ode")
    x = np.atleast_1d(np.asarray(x0, dtype=float)).copy()
    v = np.atleast_1d(np.asarray(v0, dtype=float)).copy()
    if x.size != spec.dim or v.size != spec.dim:
        raise InvalidArgument("initial condition dimension does not match the torus")
    n = int(np.floor(T / h_ode + 1e-9))
    acc = _acceleration(spec)
    xs = np.empty((n + 1, spec.dim))
    vs = np.empty((n + 1, spec.dim))
    xs[0], vs[0] = x, v
    h = h_ode
    for i in range(n):
        k1x, k1v = v, acc(x)
        k2x, k2v = v + 0.5 * h * k1v, acc(x + 0.5 * h * k1x)
        k3x, k3v = v + 0.5 * h * k2v, acc(x + 0.5 * h * k2x)
        k4x, k4v = v + h * k3v, acc(x + h * k3x)
        x = x + (h / 6.0) * (k1x + 2 * k2x + 2 * k3x + k4x)
        v = v + (h / 6.0) * (k1v + 2 * k2v + 2 * k3v + k4v)
        xs[i + 1], vs[i + 1] = x, v
    return Trajectory(np.arange(n + 1) * h, xs, vs, h, float(T))


@dataclass(frozen=True)
class Binned:
    measure: DiscreteMeasure
    clip_fraction: float


def bin_trajectory(traj: Trajectory, space: DiscreteStateSpace) -> Binned:
    """Nearest-cell histogram of the samples, each with weight 1/len(traj).

    Velocities beyond the cutoff are clipped to the boundary cell; the share of
    such samples is reported as ``clip_fraction``.
    """
    cfg = space.config
    if traj.x.shape[1] != cfg.dim:
        raise InvalidArgument("trajectory and grid dimension differ")
    ix = np.rint(np.mod(traj.x, 1.0) / cfg.dx).astype(np.int64) % cfg.n_x
    jv = np.rint(traj.v / cfg.dv).astype(np.int64)
    hw = cfg.half_width
    clipped = np.any(np.abs(jv) > hw, axis=1)
    jv = np.clip(jv, -hw, hw)
    shape = (cfg.n_x,) * cfg.dim
    pos = np.ravel_multi_index(tuple(ix.T), shape)
    vel = np.ravel_multi_index(tuple((jv + hw).T), (cfg.n_v,) * cfg.dim)
    counts = np.bincount(pos * space.n_vel + vel, minlength=space.n_cells)
    return Binned(DiscreteMeasure(counts / counts.sum()), float(clipped.mean()))


def empirical_measure(traj: Trajectory, space: DiscreteStateSpace) -> DiscreteMeasure:
    return bin_trajectory(traj, space).measure


def fourier_closedness(measure: DiscreteMeasure, space: DiscreteStateSpace, max_mode: int = 4) -> float:
    """max_k |int grad f_k . v dmu| over f_k = exp(2 pi i k.x), 0 < |k|_inf <= max_mode.

    A continuous-test-function view of closedness, insensitive to the binning
    artefacts that affect the per-cell balance.
    """
    d = space.config.dim
    ks = np.array(
        [k for k in np.ndindex(*(2 * max_mode + 1,) * d)], dtype=float
    ) - max_mode
    ks = ks[np.any(ks != 0, axis=1)]
    w = measure.weights
    phase = np.exp(2j * np.pi * space.x @ ks.T)
    flux = (space.v @ ks.T) * phase
    return float(np.max(np.abs(2 * np.pi * (w @ flux))))


def path_action(spec: LagrangianSpec, traj: Trajectory) -> float:
    """(1/T) int_0^T L(x, x') dt by the trapezoid rule."""
    vals = spec(np.mod(traj.x, 1.0), traj.v)
    return float(trapezoid(vals, traj.t) / (traj.t[-1] - traj.t[0]))
