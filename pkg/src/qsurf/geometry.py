"""Points, unit directions, direction grids, half-spaces and bands.

Half-spaces are stored observer-free as {x : <x,u> <= c}; anchoring a
half-space at an observer O at signed distance y along u canonicalizes to
c = <O,u> + y, so the same geometric object always has the same (u, c).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DomainError

UNIT_TOL = 1e-12

SCHEME_PAIR_1D = "pair-1d"
SCHEME_UNIFORM_2D = "uniform-angle-2d"
SCHEME_FIBONACCI_3D = "fibonacci-sphere-3d"
SCHEME_EXPLICIT = "explicit"

_DEFAULT_SCHEMES = {1: SCHEME_PAIR_1D, 2: SCHEME_UNIFORM_2D, 3: SCHEME_FIBONACCI_3D}


def as_point(x, d: int | None = None) -> np.ndarray:
    """Validate and return a finite 1-D coordinate vector."""
    p = np.asarray(x, dtype=float).reshape(-1)
    if p.size < 1:
        raise DomainError("point must have dimension >= 1")
    if not np.all(np.isfinite(p)):
        raise DomainError("point has non-finite coordinates")
    if d is not None and p.size != d:
        raise DomainError(f"point has dimension {p.size}, expected {d}")
    return p


def as_direction(u, d: int | None = None) -> np.ndarray:
    """Validate a unit vector (norm within UNIT_TOL of 1)."""
    v = as_point(u, d)
    nrm = float(np.linalg.norm(v))
    if abs(nrm - 1.0) > UNIT_TOL:
        raise DomainError(f"direction norm {nrm} is not 1 within {UNIT_TOL}")
    return v


@dataclass(frozen=True, eq=False)
class HalfSpace:
    """{x : <x,u> <= c} in canonical observer-free form."""

    u: np.ndarray
    c: float

    def __post_init__(self):
        object.__setattr__(self, "u", as_direction(self.u))
        if not math.isfinite(self.c):
            raise DomainError("half-space offset must be finite")

    @property
    def dims(self) -> int:
        return self.u.size

    def contains(self, x) -> bool:
        return float(np.dot(as_point(x, self.dims), self.u)) <= self.c


@dataclass(frozen=True, eq=False)
class Band:
    """Slab {x : lo < <x,u> <= hi} between two parallel half-space boundaries."""

    u: np.ndarray
    lo: float
    hi: float

    def __post_init__(self):
        object.__setattr__(self, "u", as_direction(self.u))
        if not (self.lo < self.hi):
            raise DomainError(f"band requires lo < hi, got [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, x) -> bool:
        t = float(np.dot(as_point(x, self.u.size), self.u))
        return self.lo < t <= self.hi


def halfspace_at(O, u, y: float) -> HalfSpace:
    """Half-space at signed distance y from observer O along direction u."""
    O = as_point(O)
    u = as_direction(u, O.size)
    if not math.isfinite(y):
        raise DomainError("distance y must be finite")
    return HalfSpace(u, float(np.dot(O, u)) + y)


@dataclass(frozen=True, eq=False)
class DirectionGrid:
    """Ordered unit directions on the sphere with an antipode index map.

    antipode[i] is the index of -directions[i]; exact for the 1-D pair and
    for even-k 2-D grids (second half stored as the elementwise negation of
    the first half), nearest-neighbor otherwise.
    """

    dims: int
    directions: np.ndarray  # (k, dims), rows unit within UNIT_TOL
    scheme: str
    antipode: np.ndarray = field(repr=False)  # (k,) int
    antipode_exact: bool = False

    def __post_init__(self):
        U = np.array(self.directions, dtype=float)
        if U.ndim != 2 or U.shape[1] != self.dims or U.shape[0] < 1:
            raise ConfigurationError("directions must be a nonempty (k, dims) array")
        nrm = np.linalg.norm(U, axis=1)
        if np.any(np.abs(nrm - 1.0) > UNIT_TOL):
            raise ConfigurationError("all grid directions must be unit vectors")
        object.__setattr__(self, "directions", U)
        object.__setattr__(self, "antipode", np.asarray(self.antipode, dtype=int))
        U.setflags(write=False)
        self.antipode.setflags(write=False)

    def __len__(self) -> int:
        return self.directions.shape[0]

    @property
    def k(self) -> int:
        return self.directions.shape[0]


def _nearest_antipode_map(U: np.ndarray) -> np.ndarray:
    # index of the direction closest to -u, by inner product
    return np.argmax(-U @ U.T, axis=1)


def _antipodes_are_exact(U: np.ndarray, anti: np.ndarray) -> bool:
    return bool(np.array_equal(U[anti], -U))


def _pair_grid() -> DirectionGrid:
    U = np.array([[1.0], [-1.0]])
    return DirectionGrid(1, U, SCHEME_PAIR_1D, np.array([1, 0]), antipode_exact=True)


def _uniform_angle_grid(k: int) -> DirectionGrid:
    if k % 2 == 0:
        # build half, negate exactly so antipodal projections negate exactly too
        ang = 2.0 * np.pi * np.arange(k // 2) / k
        half = np.stack([np.cos(ang), np.sin(ang)], axis=1)
        U = np.vstack([half, -half])
        anti = (np.arange(k) + k // 2) % k
        exact = True
    else:
        ang = 2.0 * np.pi * np.arange(k) / k
        U = np.stack([np.cos(ang), np.sin(ang)], axis=1)
        anti = _nearest_antipode_map(U)
        exact = False
    return DirectionGrid(2, U, SCHEME_UNIFORM_2D, anti, antipode_exact=exact)


def _fibonacci_sphere_grid(k: int) -> DirectionGrid:
    i = np.arange(k)
    z = 1.0 - 2.0 * (i + 0.5) / k
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    golden = np.pi * (3.0 - np.sqrt(5.0))
    theta = golden * i
    U = np.stack([r * np.cos(theta), r * np.sin(theta), z], axis=1)
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    return DirectionGrid(3, U, SCHEME_FIBONACCI_3D, _nearest_antipode_map(U))


def explicit_grid(directions, normalize: bool = True) -> DirectionGrid:
    """Grid from a user-supplied list of directions (any dimension)."""
    U = np.asarray(directions, dtype=float)
    if U.ndim != 2 or U.shape[0] < 1:
        raise ConfigurationError("explicit grid needs a nonempty (k, d) array")
    if normalize:
        nrm = np.linalg.norm(U, axis=1, keepdims=True)
        if np.any(nrm == 0.0) or not np.all(np.isfinite(nrm)):
            raise ConfigurationError("explicit directions must be nonzero and finite")
        U = U / nrm
    if U.shape[0] != np.unique(U, axis=0).shape[0]:
        raise ConfigurationError("grid directions must be pairwise distinct")
    anti = _nearest_antipode_map(U)
    return DirectionGrid(U.shape[1], U, SCHEME_EXPLICIT, anti,
                         antipode_exact=_antipodes_are_exact(U, anti))


def make_direction_grid(d: int, k: int, scheme: str | None = None) -> DirectionGrid:
    """Built-in direction grids: 1-D pair, 2-D uniform angles, 3-D Fibonacci sphere."""
    if scheme is None:
        scheme = _DEFAULT_SCHEMES.get(d)
        if scheme is None:
            raise ConfigurationError(
                f"no built-in grid for d={d}; use explicit_grid for higher dimensions"
            )
    if k < 2:
        raise ConfigurationError("grid needs k >= 2 directions")
    if scheme == SCHEME_PAIR_1D:
        if d != 1 or k != 2:
            raise ConfigurationError("the 1-D grid is exactly the pair {+1, -1} (k=2)")
        return _pair_grid()
    if scheme == SCHEME_UNIFORM_2D:
        if d != 2:
            raise ConfigurationError(f"scheme {scheme!r} requires d=2, got d={d}")
        return _uniform_angle_grid(k)
    if scheme == SCHEME_FIBONACCI_3D:
        if d != 3:
            raise ConfigurationError(f"scheme {scheme!r} requires d=3, got d={d}")
        return _fibonacci_sphere_grid(k)
    raise ConfigurationError(f"unknown grid scheme {scheme!r}")
