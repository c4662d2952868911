"""Lagrangians, Fourier potentials and cohomology classes on the flat torus T^d.

Every Lagrangian handled here has the mechanical-plus-one-form shape

    L(x, v) = 0.5 * |v|^2 - epsilon * V(x) + c . v

with ``V`` a finite Fourier sum and ``c`` a constant one-form.  All evaluation
functions are vectorised: ``x`` and ``v`` may carry arbitrary leading batch
axes as long as the trailing axis has length ``dim``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidArgument

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class Mode:
    k: tuple[int, ...]
    cos: float = 0.0
    sin: float = 0.0


@dataclass(frozen=True)
class PotentialSpec:
    """V(x) = sum_k cos_k * cos(2 pi k.x) + sin_k * sin(2 pi k.x)."""

    dim: int
    modes: tuple[Mode, ...] = ()

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise InvalidArgument(f"torus dimension must be 1 or 2, got {self.dim}")
        modes = tuple(
            m if isinstance(m, Mode) else Mode(tuple(m[0]), float(m[1]), float(m[2]))
            for m in self.modes
        )
        seen = set()
        for m in modes:
            if len(m.k) != self.dim:
                raise InvalidArgument(f"wave-vector {m.k} does not have {self.dim} components")
            if m.k in seen:
                raise InvalidArgument(f"duplicate wave-vector {m.k}")
            seen.add(m.k)
        object.__setattr__(self, "modes", modes)

    @classmethod
    def zero(cls, dim=1):
        return cls(dim, ())

    @classmethod
    def cosine(cls, k, amplitude=1.0):
        """Single cosine mode, e.g. ``PotentialSpec.cosine(2)`` is cos(4 pi x)."""
        k = (k,) if np.isscalar(k) else tuple(k)
        return cls(len(k), (Mode(tuple(int(i) for i in k), float(amplitude), 0.0),))

    @classmethod
    def constant(cls, value, dim=1):
        return cls(dim, (Mode((0,) * dim, float(value), 0.0),))

    def _wave_matrix(self):
        if not self.modes:
            return np.zeros((0, self.dim)), np.zeros(0), np.zeros(0)
        K = np.array([m.k for m in self.modes], dtype=float)
        a = np.array([m.cos for m in self.modes])
        b = np.array([m.sin for m in self.modes])
        return K, a, b

    def __call__(self, x):
        x = _as_points(x, self.dim, "x")
        K, a, b = self._wave_matrix()
        phase = TWO_PI * (x @ K.T)
        return np.cos(phase) @ a + np.sin(phase) @ b

    def gradient(self, x):
        x = _as_points(x, self.dim, "x")
        K, a, b = self._wave_matrix()
        phase = TWO_PI * (x @ K.T)
        weights = -np.sin(phase) * a + np.cos(phase) * b
        return TWO_PI * (weights @ K)

    def scaled(self, factor):
        return PotentialSpec(
            self.dim, tuple(Mode(m.k, factor * m.cos, factor * m.sin) for m in self.modes)
        )

    def __add__(self, other):
        if not isinstance(other, PotentialSpec):
            return NotImplemented
        if other.dim != self.dim:
            raise InvalidArgument("cannot add potentials on tori of different dimension")
        merged = {m.k: [m.cos, m.sin] for m in self.modes}
        for m in other.modes:
            if m.k in merged:
                merged[m.k][0] += m.cos
                merged[m.k][1] += m.sin
            else:
                merged[m.k] = [m.cos, m.sin]
        return PotentialSpec(self.dim, tuple(Mode(k, a, b) for k, (a, b) in merged.items()))

    def to_dict(self):
        return {
            "dim": self.dim,
            "modes": [{"k": list(m.k), "cos": m.cos, "sin": m.sin} for m in self.modes],
        }

    @classmethod
    def from_dict(cls, data):
        modes = tuple(
            Mode(tuple(int(i) for i in m["k"]), float(m.get("cos", 0.0)), float(m.get("sin", 0.0)))
            for m in data["modes"]
        )
        return cls(int(data["dim"]), modes)


@dataclass(frozen=True)
class CohomologyClass:
    c: tuple[float, ...]

    def __post_init__(self):
        c = (float(self.c),) if np.isscalar(self.c) else tuple(float(ci) for ci in self.c)
        if len(c) not in (1, 2):
            raise InvalidArgument(f"cohomology class must have 1 or 2 components, got {len(c)}")
        object.__setattr__(self, "c", c)

    @property
    def dim(self):
        return len(self.c)

    @classmethod
    def zero(cls, dim=1):
        return cls((0.0,) * dim)

    def as_array(self):
        return np.array(self.c)

    def __add__(self, other):
        if other.dim != self.dim:
            raise InvalidArgument("cohomology classes of different dimension")
        return CohomologyClass(tuple(a + b for a, b in zip(self.c, other.c)))

    def __neg__(self):
        return CohomologyClass(tuple(-a for a in self.c))


@dataclass(frozen=True)
class LagrangianSpec:
    dim: int = 1
    potential: PotentialSpec = None
    cohomology: CohomologyClass = None
    epsilon: float = 1.0

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise InvalidArgument(f"torus dimension must be 1 or 2, got {self.dim}")
        if self.potential is None:
            object.__setattr__(self, "potential", PotentialSpec.zero(self.dim))
        if self.cohomology is None:
            object.__setattr__(self, "cohomology", CohomologyClass.zero(self.dim))
        c = self.cohomology
        if not isinstance(c, CohomologyClass):
            c = CohomologyClass(c)
            object.__setattr__(self, "cohomology", c)
        if self.potential.dim != self.dim or c.dim != self.dim:
            raise InvalidArgument("potential / cohomology dimension does not match the torus")
        object.__setattr__(self, "epsilon", float(self.epsilon))

    @classmethod
    def mechanical(cls, potential, c=None, epsilon=1.0):
        return cls(potential.dim, potential, c, epsilon)

    def __call__(self, x, v):
        return eval_lagrangian(self, x, v)


def _as_points(arr, dim, name):
    arr = np.asarray(arr, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.shape[-1] != dim:
        if dim == 1:
            arr = arr[..., None]
        else:
            raise InvalidArgument(f"{name} must have {dim} coordinates, got shape {arr.shape}")
    return arr


def eval_lagrangian(spec: LagrangianSpec, x, v):
    """0.5 |v|^2 - epsilon V(x) + c.v, vectorised over leading axes.

    For ``dim == 1`` bare scalars and 1-d arrays of samples are accepted.
    """
    x_arr = _as_points(x, spec.dim, "x")
    v_arr = _as_points(v, spec.dim, "v")
    if spec.dim == 2 and (np.ndim(x) == 0 or np.ndim(v) == 0):
        raise InvalidArgument("points on T^2 need two coordinates")
    if not np.all(np.isfinite(v_arr)):
        raise InvalidArgument("velocity must be finite")
    kinetic = 0.5 * np.sum(v_arr * v_arr, axis=-1)
    value = kinetic - spec.epsilon * spec.potential(x_arr) + v_arr @ spec.cohomology.as_array()
    if np.ndim(x) <= (0 if spec.dim == 1 else 1) and np.ndim(v) <= (0 if spec.dim == 1 else 1):
        return float(value.reshape(-1)[0])
    return value


def shift_by_cohomology(spec: LagrangianSpec, c) -> LagrangianSpec:
    if not isinstance(c, CohomologyClass):
        c = CohomologyClass(c)
    if c.dim != spec.dim:
        raise InvalidArgument(f"class of dimension {c.dim} on a {spec.dim}-torus")
    return replace(spec, cohomology=spec.cohomology + c)


def perturb_by_potential(spec: LagrangianSpec, V: PotentialSpec, epsilon: float) -> LagrangianSpec:
    """Return the spec of L - epsilon * V.

    The existing potential term is folded into a single Fourier sum so the
    result is again of the form 0.5|v|^2 - V' + c.v (with ``epsilon = 1``).
    """
    if V.dim != spec.dim:
        raise InvalidArgument(f"potential of dimension {V.dim} on a {spec.dim}-torus")
    merged = spec.potential.scaled(spec.epsilon) + V.scaled(float(epsilon))
    return replace(spec, potential=merged, epsilon=1.0)


def wave_vectors(dim: int, max_norm: int) -> list[tuple[int, ...]]:
    """Nonzero integer wave-vectors with |k| <= max_norm, one per +-k pair."""
    if dim == 1:
        return [(k,) for k in range(1, max_norm + 1)]
    out = []
    for k1, k2 in itertools.product(range(0, max_norm + 1), range(-max_norm, max_norm + 1)):
        if (k1 > 0 or k2 > 0) and k1 * k1 + k2 * k2 <= max_norm * max_norm:
            out.append((k1, k2))
    return out


def sample_random_potential(seed: int, n_modes: int, amplitude: float, dim: int = 1) -> PotentialSpec:
    """Random trigonometric polynomial with i.i.d. U[-amplitude, amplitude] coefficients."""
    if n_modes < 1:
        raise InvalidArgument("n_modes must be >= 1")
    if amplitude < 0:
        raise InvalidArgument("amplitude must be nonnegative")
    rng = np.random.default_rng(seed)
    ks = wave_vectors(dim, n_modes)
    coeffs = rng.uniform(-1.0, 1.0, size=(len(ks), 2)) * amplitude
    return PotentialSpec(dim, tuple(Mode(k, float(a), float(b)) for k, (a, b) in zip(ks, coeffs)))
