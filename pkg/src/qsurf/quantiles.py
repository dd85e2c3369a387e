"""Directional quantiles seen from any observer, surface extraction and
transfer, minimal band mass, 2-D Tukey regions, Hausdorff comparison.

Everything here reads the projection cache; the observer enters only
through inner products, so the error of an empirical surface against a
population one is the same for every observer.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NoAdmissibleBandError
from .geometry import DirectionGrid, as_point
from .samples import (
    ProjectionCache,
    empirical_cdf,
    empirical_quantile,
    empirical_quantile_all,
    order_stat_index,
)


@dataclass(frozen=True, eq=False)
class DeltaRange:
    """Compact level range [alpha_minus, alpha_plus] inside [1/2, 1)."""

    alpha_minus: float
    alpha_plus: float

    def __post_init__(self):
        if not (0.5 <= self.alpha_minus <= self.alpha_plus < 1.0):
            raise DomainError(
                f"need 1/2 <= alpha_minus <= alpha_plus < 1, got "
                f"[{self.alpha_minus}, {self.alpha_plus}]"
            )

    def grid(self, steps: int) -> np.ndarray:
        if steps < 1:
            raise DomainError("need at least one level grid point")
        if steps == 1:
            return np.array([0.5 * (self.alpha_minus + self.alpha_plus)])
        return np.linspace(self.alpha_minus, self.alpha_plus, steps)


@dataclass(frozen=True, eq=False)
class QuantileSurface:
    """Discretized quantile surface: per grid direction the range y and the
    surface point q = O + y*u (held exactly by construction)."""

    O: np.ndarray
    alpha: float
    grid: DirectionGrid
    y: np.ndarray
    q: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        O = as_point(self.O, self.grid.dims)
        y = np.asarray(self.y, dtype=float)
        if y.shape != (self.grid.k,):
            raise DomainError("surface needs one range value per grid direction")
        q = O[None, :] + y[:, None] * self.grid.directions
        object.__setattr__(self, "O", O)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "q", q)
        for a in (O, y, q):
            a.setflags(write=False)

    @property
    def dims(self) -> int:
        return self.grid.dims

    def to_document(self) -> dict:
        return {
            "o": self.O.tolist(),
            "alpha": self.alpha,
            "grid": {
                "scheme": self.grid.scheme,
                "dims": self.grid.dims,
                "count": self.grid.k,
            },
            "entries": [
                {"u": u.tolist(), "y": float(y), "q": q.tolist()}
                for u, y, q in zip(self.grid.directions, self.y, self.q)
            ],
        }


def surface_from_document(doc: dict) -> QuantileSurface:
    """Rebuild a surface from its serialized document."""
    g = doc["grid"]
    U = np.array([e["u"] for e in doc["entries"]], dtype=float)
    anti = np.argmax(-U @ U.T, axis=1)
    grid = DirectionGrid(int(g["dims"]), U, str(g["scheme"]), anti)
    y = np.array([e["y"] for e in doc["entries"]], dtype=float)
    return QuantileSurface(np.array(doc["o"], dtype=float), float(doc["alpha"]), grid, y)


@dataclass(frozen=True, eq=False)
class TukeyRegion2D:
    """Intersection of the 2-D quantile half-planes; possibly empty."""

    alpha: float
    vertices: np.ndarray  # (m, 2) counterclockwise, empty allowed

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float).reshape(-1, 2)
        object.__setattr__(self, "vertices", v)
        v.setflags(write=False)

    @property
    def is_empty(self) -> bool:
        return self.vertices.shape[0] == 0


def _check_alpha_level(alpha: float):
    if not (0.5 <= alpha < 1.0):
        raise DomainError(f"surface level must be in [1/2, 1), got {alpha}")


def directional_quantile(cache: ProjectionCache, O, u_index: int, alpha: float) -> float:
    """Signed distance from O to the alpha-th quantile half-space along u."""
    O = as_point(O, cache.grid.dims)
    q = empirical_quantile(cache, u_index, alpha)
    return q - float(np.dot(O, cache.grid.directions[u_index]))


def quantile_surface(cache: ProjectionCache, O, alpha: float) -> QuantileSurface:
    """One directional quantile per grid direction, seen from O."""
    _check_alpha_level(alpha)
    O = as_point(O, cache.grid.dims)
    y = empirical_quantile_all(cache, alpha) - cache.grid.directions @ O
    return QuantileSurface(O, alpha, cache.grid, y)


def transfer_surface(s: QuantileSurface, O_new) -> QuantileSurface:
    """Move a surface to a new observer without touching the data.

    y'(u) = y(u) - <O'-O, u>; the surface points transform accordingly.
    """
    O_new = as_point(O_new, s.dims)
    shift = s.grid.directions @ (O_new - s.O)
    return QuantileSurface(O_new, s.alpha, s.grid, s.y - shift)


def quantile_halfspace_mass(cache: ProjectionCache, O, u_index: int, alpha: float) -> float:
    """Empirical mass of the alpha-th quantile half-space (observer-free)."""
    as_point(O, cache.grid.dims)
    c = empirical_quantile(cache, u_index, alpha)
    return empirical_cdf(cache, u_index, c)


def psi_hat(cache: ProjectionCache, O, eps: float, delta: DeltaRange) -> float:
    """Minimal empirical mass over admissible bands of width eps.

    For each direction the band start runs over [q(alpha-), q(alpha+)-eps]
    in canonical offsets; the infimum of a sliding-window count is attained
    with the window start at the left endpoint or at a data point, so only
    those candidates are scanned. Raises when no direction admits a band.
    """
    as_point(O, cache.grid.dims)
    if not (eps > 0.0):
        raise DomainError(f"band width must be positive, got {eps}")
    n = cache.n
    i_lo = order_stat_index(n, delta.alpha_minus)
    i_hi = order_stat_index(n, delta.alpha_plus)
    best = None
    for j in range(cache.grid.k):
        col = cache.column(j)
        lo, hi = float(col[i_lo]), float(col[i_hi])
        b = hi - eps
        if b < lo:
            continue  # no admissible band in this direction
        start = int(np.searchsorted(col, lo, side="right"))
        end = int(np.searchsorted(col, b, side="right"))
        cands = np.concatenate([[lo], col[start:end]])
        counts = np.searchsorted(col, cands + eps, side="right") - np.searchsorted(
            col, cands, side="right"
        )
        m = int(counts.min())
        if best is None or m < best:
            best = m
            if best == 0:
                break
    if best is None:
        raise NoAdmissibleBandError(
            f"no admissible band of width {eps} inside the "
            f"[{delta.alpha_minus}, {delta.alpha_plus}] quantile range of any direction"
        )
    return best / n


def _clip_halfplane(poly: np.ndarray, u: np.ndarray, c: float) -> np.ndarray:
    """One Sutherland-Hodgman pass against {x : <x,u> <= c}."""
    m = poly.shape[0]
    if m == 0:
        return poly
    s = poly @ u - c
    out = []
    for i in range(m):
        j = (i + 1) % m
        a_in, b_in = s[i] <= 0.0, s[j] <= 0.0
        if a_in:
            out.append(poly[i])
        if a_in != b_in:
            t = s[i] / (s[i] - s[j])
            out.append(poly[i] + t * (poly[j] - poly[i]))
    if len(out) < 3:
        return np.empty((0, 2))
    return np.array(out)


def tukey_region_2d(cache: ProjectionCache, alpha: float) -> TukeyRegion2D:
    """Intersect all empirical quantile half-planes (d=2). Emptiness is a value."""
    _check_alpha_level(alpha)
    if cache.grid.dims != 2:
        raise DomainError("tukey_region_2d requires a 2-D cache")
    c = empirical_quantile_all(cache, alpha)
    # bounding box comfortably beyond every constraint and the data extent
    r = float(max(np.max(np.abs(cache.proj)), np.max(np.abs(c)))) * 2.0 + 1.0
    poly = np.array([[r, r], [-r, r], [-r, -r], [r, -r]])
    for j in range(cache.grid.k):
        poly = _clip_halfplane(poly, cache.grid.directions[j], c[j])
        if poly.shape[0] == 0:
            break
    return TukeyRegion2D(alpha, poly)


def hausdorff_distance(a: QuantileSurface, b: QuantileSurface) -> float:
    """Hausdorff distance between the two discrete surface point sets."""
    if a.dims != b.dims:
        raise DomainError("surfaces live in different dimensions")
    diff = a.q[:, None, :] - b.q[None, :, :]
    dist = np.sqrt(np.sum(diff * diff, axis=2))
    return float(max(dist.min(axis=1).max(), dist.min(axis=0).max()))


def median_antipodal_gap(cache: ProjectionCache, O) -> float:
    """max_u |Y_n(O,u,1/2) + Y_n(O,-u,1/2)|: how far the empirical median
    surface is from being a double surface. Needs exact antipodes."""
    if not cache.grid.antipode_exact:
        raise DomainError("median gap needs a grid with exact antipodes")
    O = as_point(O, cache.grid.dims)
    y = empirical_quantile_all(cache, 0.5) - cache.grid.directions @ O
    return float(np.max(np.abs(y + y[cache.grid.antipode])))
