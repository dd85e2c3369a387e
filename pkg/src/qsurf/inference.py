"""Density-quantile estimation, the empirical process at true quantiles,
Bahadur-Kiefer residuals, limiting covariance assembly, Gaussian field
sampling, and joint confidence bands.

The band recipe: estimate h per direction, count pairwise half-space
memberships on the sample, assemble the covariance of the limiting field,
draw the field, and take the level-quantile of its sup-norm; the band
half-width is that quantile divided by sqrt(n).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, EstimationError, NumericalError
from .geometry import as_point
from .models import Model
from .quantiles import DeltaRange, QuantileSurface, quantile_surface
from .samples import ProjectionCache, empirical_cdf, order_stat_index, project_columns
from .seeding import make_rng

H_WIDEN_LIMIT = 4  # tie-widening attempts before giving up
JITTER_SCALE = 1e-10
ORIGIN_ALPHA = 0.5  # placeholder level for pure-direction points


def default_bandwidth(n: int, alpha: float) -> float:
    """n^(-1/3) clamped to [2/n, min(alpha, 1-alpha)/2]."""
    hi = min(alpha, 1.0 - alpha) / 2.0
    if hi <= 0:
        raise DomainError(f"no usable bandwidth for alpha={alpha}")
    return min(max(n ** (-1.0 / 3.0), 2.0 / n), hi)


def estimate_h(
    cache: ProjectionCache, u_index: int, alpha: float, bandwidth: float | None = None
) -> float:
    """Reciprocal difference quotient 2b / (Fn^-1(a+b) - Fn^-1(a-b)).

    A zero denominator (ties) doubles b up to H_WIDEN_LIMIT times while
    [a-b, a+b] stays inside (0,1); degenerate projections then error out.
    """
    n = cache.n
    b = default_bandwidth(n, alpha) if bandwidth is None else float(bandwidth)
    if b <= 0:
        raise DomainError("bandwidth must be positive")
    if not (0.0 < alpha - b and alpha + b < 1.0):
        raise DomainError(
            f"alpha={alpha} too near 0/1 for bandwidth {b}: need [a-b, a+b] in (0,1)"
        )
    col = cache.column(u_index)
    for _ in range(H_WIDEN_LIMIT + 1):
        width = float(col[order_stat_index(n, alpha + b)]) - float(
            col[order_stat_index(n, alpha - b)]
        )
        if width > 0.0:
            return 2.0 * b / width
        b *= 2.0
        if alpha - b <= 0.0 or alpha + b >= 1.0:
            raise EstimationError(
                "projections degenerate: inter-quantile width stayed 0 before "
                "the widened bandwidth left (0,1)"
            )
    raise EstimationError(
        f"projections degenerate around alpha={alpha}: zero width after "
        f"{H_WIDEN_LIMIT} bandwidth doublings"
    )


@dataclass(frozen=True, eq=False)
class HEstimate:
    """Density-quantile estimates on a set of (direction index, level) points."""

    points: tuple[tuple[int, float], ...]
    values: np.ndarray
    bandwidths: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        b = np.asarray(self.bandwidths, dtype=float)
        if np.any(~np.isfinite(v)) or np.any(v <= 0):
            raise EstimationError("h estimates must be finite and positive")
        if np.any(b <= 0):
            raise EstimationError("recorded bandwidths must be positive")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "bandwidths", b)


def estimate_h_grid(
    cache: ProjectionCache, alpha: float, bandwidth: float | None = None
) -> HEstimate:
    """h estimate for every grid direction at one level."""
    b = default_bandwidth(cache.n, alpha) if bandwidth is None else float(bandwidth)
    vals = np.array(
        [estimate_h(cache, j, alpha, b) for j in range(cache.grid.k)], dtype=float
    )
    pts = tuple((j, alpha) for j in range(cache.grid.k))
    return HEstimate(pts, vals, np.full(cache.grid.k, b))


def empirical_process_at_quantile(
    cache: ProjectionCache, model: Model, u_index: int, alpha: float
) -> float:
    """sqrt(n) * (P_n(H(u,alpha)) - alpha) with H at the TRUE quantile."""
    u = cache.grid.directions[u_index]
    c = model.project(u).invert(alpha)  # canonical offset, observer-free
    return math.sqrt(cache.n) * (empirical_cdf(cache, u_index, c) - alpha)


def bahadur_kiefer_rate(n: int) -> float:
    """b_n = n^(-1/4) (log n)^(1/2) (loglog n)^(1/4)."""
    if n < 3:
        raise DomainError("rate needs n >= 3 so loglog n is defined")
    return n ** (-0.25) * math.log(n) ** 0.5 * math.log(math.log(n)) ** 0.25


@dataclass(frozen=True, eq=False)
class BKResidualReport:
    n: int
    sup_residual: float
    b_n: float
    ratio: float


def bk_residual(
    cache: ProjectionCache,
    model: Model,
    grid=None,
    delta: DeltaRange | None = None,
    alpha_steps: int = 9,
) -> BKResidualReport:
    """sup over the (u, alpha) grid of |sqrt(n)(Y_n - Y) + E_n / h| using the
    model's true h; reported against b_n."""
    if grid is not None and grid is not cache.grid:
        if grid.dims != cache.grid.dims or grid.k != cache.grid.k:
            raise DomainError("grid does not match the cache's grid")
    if delta is None:
        delta = DeltaRange(0.6, 0.9)
    n = cache.n
    b_n = bahadur_kiefer_rate(n)
    alphas = delta.grid(alpha_steps)
    idx = [order_stat_index(n, float(a)) for a in alphas]
    sqrt_n = math.sqrt(n)
    worst = 0.0
    for j, u in enumerate(cache.grid.directions):
        law = model.project(u)
        col = cache.column(j)
        for a, i in zip(alphas, idx):
            y_true = law.invert(float(a))
            h = float(law.pdf(np.asarray(y_true)))
            e_n = sqrt_n * (np.searchsorted(col, y_true, side="right") / n - a)
            res = abs(sqrt_n * (float(col[i]) - y_true) + e_n / h)
            worst = max(worst, res)
    return BKResidualReport(n, worst, b_n, worst / b_n)


@dataclass(frozen=True, eq=False)
class CovarianceMatrix:
    """Limiting-field covariance at chosen (direction, level) grid points."""

    gridpoints: tuple[tuple[int, float], ...]
    matrix: np.ndarray
    jitter_applied: float = 0.0

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DomainError("covariance must be square")
        if not np.allclose(m, m.T, atol=1e-12):
            raise DomainError("covariance must be symmetric within 1e-12")
        object.__setattr__(self, "matrix", m)
        m.setflags(write=False)

    @property
    def k(self) -> int:
        return self.matrix.shape[0]


def build_covariance(points, probs, h) -> CovarianceMatrix:
    """Sigma_ij = (P(H_i and H_j) - a_i a_j) / (h_i h_j), symmetrized, with a
    relative ridge when rounding pushes the smallest eigenvalue below zero."""
    pts = tuple((int(j), float(a)) for j, a in points)
    probs = np.asarray(probs, dtype=float)
    h = np.asarray(h, dtype=float)
    k = len(pts)
    if probs.shape != (k, k):
        raise DomainError("probs must be k x k for k grid points")
    if np.any(probs < -1e-12) or np.any(probs > 1.0 + 1e-12):
        raise DomainError("pair probabilities must lie in [0,1]")
    if not np.allclose(probs, probs.T, atol=1e-9):
        raise DomainError("pair probabilities must be symmetric")
    if h.shape != (k,) or np.any(h <= 0):
        raise DomainError("h must be positive, one entry per grid point")
    alphas = np.array([a for _, a in pts])
    sigma = (probs - np.outer(alphas, alphas)) / np.outer(h, h)
    sigma = 0.5 * (sigma + sigma.T)
    lam_min = float(np.linalg.eigvalsh(sigma)[0])
    jitter = 0.0
    if lam_min < 0.0:
        jitter = JITTER_SCALE * (1.0 + abs(lam_min))
        sigma = sigma + jitter * np.eye(k)
    return CovarianceMatrix(pts, sigma, jitter)


def _psd_factor(sigma: np.ndarray) -> np.ndarray:
    """L with L L^T = sigma; Cholesky when definite, eigenfactor otherwise."""
    try:
        return np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError:
        pass
    lam, vec = np.linalg.eigh(sigma)
    scale = max(float(lam[-1]), 1.0)
    if float(lam[0]) < -1e-8 * scale:
        raise NumericalError(
            f"covariance not PSD after jitter: lambda_min = {float(lam[0])!r}"
        )
    return vec * np.sqrt(np.clip(lam, 0.0, None))


def sample_gaussian_field(cov: CovarianceMatrix, draws: int, seed: int) -> np.ndarray:
    """draws x k matrix of centered Gaussian field samples with covariance cov."""
    if draws < 1:
        raise DomainError("need draws >= 1")
    L = _psd_factor(cov.matrix)
    z = make_rng(seed).standard_normal((draws, cov.k))
    return z @ L.T


@dataclass(frozen=True, eq=False)
class ConfidenceBand:
    """Joint band around an empirical surface: y(u) +/- halfwidth(u)."""

    surface: QuantileSurface
    level: float
    halfwidth: np.ndarray
    draws: int
    seed: int
    bandwidth: float
    jitter_applied: float = 0.0
    c_star: float = 0.0
    studentized: bool = False

    def __post_init__(self):
        hw = np.asarray(self.halfwidth, dtype=float)
        if hw.shape != (self.surface.grid.k,) or np.any(hw < 0):
            raise DomainError("halfwidth must be nonnegative, one per direction")
        object.__setattr__(self, "halfwidth", hw)
        hw.setflags(write=False)

    def contains_values(self, y_other: np.ndarray) -> bool:
        """True when a per-direction range vector sits inside the band."""
        return bool(np.all(np.abs(np.asarray(y_other) - self.surface.y) <= self.halfwidth))

    def to_document(self) -> dict:
        doc = self.surface.to_document()
        doc.update(
            {
                "level": self.level,
                "halfwidth": self.halfwidth.tolist(),
                "draws": self.draws,
                "seed": self.seed,
                "bandwidth": self.bandwidth,
                "jitter_applied": self.jitter_applied,
                "c_star": self.c_star,
                "studentized": self.studentized,
            }
        )
        return doc


def pairwise_halfspace_probs(cache: ProjectionCache, alpha: float) -> np.ndarray:
    """Empirical pair matrix for the level-alpha quantile half-spaces,
    recentred so the covariance numerator is the indicator covariance.

    Raw counts give P_n(H_i and H_j); subtracting the empirical marginal
    product and adding back alpha^2 keeps build_covariance's numerator equal
    to Cov_n(1_Hi, 1_Hj), which is PSD up to rounding, while the boundary
    overshoot of P_n at the quantile (at most d/n) cancels.
    """
    n = cache.n
    c = cache.proj[order_stat_index(n, alpha), :]
    A = (project_columns(cache.dataset.points, cache.grid.directions) <= c).astype(float)
    pair = (A.T @ A) / n
    marg = A.mean(axis=0)
    return pair - np.outer(marg, marg) + alpha * alpha


def confidence_band(
    cache: ProjectionCache,
    O,
    alpha: float,
    level: float,
    draws: int = 500,
    seed: int = 0,
    bandwidth: float | None = None,
    studentized: bool = False,
) -> ConfidenceBand:
    """Joint confidence band for the level-alpha surface seen from O."""
    if not (0.0 <= level < 1.0):
        raise DomainError(f"band level must be in [0, 1), got {level}")
    if draws < 100:
        raise DomainError("need draws >= 100 for a stable sup-quantile")
    O = as_point(O, cache.grid.dims)
    n = cache.n
    b = default_bandwidth(n, alpha) if bandwidth is None else float(bandwidth)
    hest = estimate_h_grid(cache, alpha, b)
    probs = pairwise_halfspace_probs(cache, alpha)
    cov = build_covariance(hest.points, probs, hest.values)
    surf = quantile_surface(cache, O, alpha)
    if level == 0.0:
        hw = np.zeros(cache.grid.k)
        return ConfidenceBand(surf, level, hw, draws, seed, b, cov.jitter_applied, 0.0,
                              studentized)
    G = sample_gaussian_field(cov, draws, seed)
    if studentized:
        sd = np.sqrt(np.diag(cov.matrix))
        sd = np.where(sd > 0, sd, 1.0)
        stats = np.max(np.abs(G) / sd, axis=1)
        c_star = float(np.sort(stats)[order_stat_index(draws, level)])
        hw = c_star * sd / math.sqrt(n)
    else:
        stats = np.max(np.abs(G), axis=1)
        c_star = float(np.sort(stats)[order_stat_index(draws, level)])
        hw = np.full(cache.grid.k, c_star / math.sqrt(n))
    return ConfidenceBand(surf, level, hw, draws, seed, b, cov.jitter_applied, c_star,
                          studentized)
