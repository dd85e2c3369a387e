"""Analytic distributions with sampling and population oracles.

Each model samples deterministically from a seed and, where the projected
law <X,u> has a tractable closed form, exposes its cdf/pdf so that true
directional quantiles, the density-quantile function h, and the local cdf
expansion defect rho(gamma) can be evaluated to high precision. The spiral
is sample-only: it exists to exercise singular-support behavior, not rate
studies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import CapabilityError, ConfigurationError, DomainError
from .geometry import DirectionGrid, HalfSpace, as_direction, as_point
from .samples import Dataset
from .seeding import make_rng

_SQRT2PI = math.sqrt(2.0 * math.pi)

CDF_TOL = 1e-12  # residual target for quantile root-finding
BRACKET_SIGMAS = 12.0  # quantile bracket half-width in max projected sigmas


@dataclass(frozen=True, eq=False)
class ProjectedLaw:
    """The 1-D law of <X,u>: evaluable cdf/pdf plus a quantile bracket."""

    cdf: Callable[[np.ndarray], np.ndarray]
    pdf: Callable[[np.ndarray], np.ndarray]
    bracket: tuple[float, float]
    quantile: Callable[[float], float] | None = None  # closed form when available

    def invert(self, alpha: float) -> float:
        """alpha-th quantile by closed form or bisection to residual CDF_TOL."""
        if not (0.0 < alpha < 1.0):
            raise DomainError(f"alpha must be in (0,1), got {alpha}")
        if self.quantile is not None:
            return self.quantile(alpha)
        lo, hi = self.bracket
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            f = float(self.cdf(np.asarray(mid)))
            if abs(f - alpha) <= CDF_TOL:
                return mid
            if f < alpha:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)


class Model:
    """Base for sampleable models; subclasses set kind/dims and analytic."""

    kind: str = ""
    analytic: bool = False
    dims: int = 0

    def sample_with(self, n: int, rng: np.random.Generator) -> Dataset:
        raise NotImplementedError

    def project(self, u) -> ProjectedLaw:
        raise CapabilityError(
            f"model kind {self.kind!r} has no analytic projected law"
        )

    def to_config(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class Gaussian(Model):
    mean: np.ndarray
    cov: np.ndarray

    kind = "gaussian"
    analytic = True

    def __post_init__(self):
        mean = as_point(self.mean)
        cov = np.asarray(self.cov, dtype=float)
        if cov.shape != (mean.size, mean.size):
            raise DomainError("covariance shape does not match the mean")
        if not np.allclose(cov, cov.T, atol=1e-12):
            raise DomainError("covariance must be symmetric")
        try:
            chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError:
            raise DomainError("covariance must be positive definite") from None
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "_chol", chol)

    @property
    def dims(self) -> int:
        return self.mean.size

    def sample_with(self, n: int, rng: np.random.Generator) -> Dataset:
        z = rng.standard_normal((n, self.dims))
        return Dataset(z @ self._chol.T + self.mean, label=self.kind)

    def project(self, u) -> ProjectedLaw:
        u = as_direction(u, self.dims)
        mu = float(self.mean @ u)
        sigma = math.sqrt(float(u @ self.cov @ u))
        cdf = lambda t: ndtr((np.asarray(t, dtype=float) - mu) / sigma)
        pdf = lambda t: np.exp(
            -0.5 * ((np.asarray(t, dtype=float) - mu) / sigma) ** 2
        ) / (sigma * _SQRT2PI)
        quantile = lambda a: mu + sigma * float(ndtri(a))
        br = (mu - BRACKET_SIGMAS * sigma, mu + BRACKET_SIGMAS * sigma)
        return ProjectedLaw(cdf, pdf, br, quantile)

    def to_config(self) -> dict:
        return {
            "kind": self.kind,
            "dims": self.dims,
            "mean": self.mean.tolist(),
            "cov": self.cov.tolist(),
        }


@dataclass(frozen=True, eq=False)
class GaussianMixture(Model):
    components: tuple[Gaussian, ...]
    weights: np.ndarray

    kind = "gaussian-mixture"
    analytic = True

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise DomainError("mixture needs at least one component")
        d = comps[0].dims
        if any(c.dims != d for c in comps):
            raise DomainError("mixture components must share a dimension")
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (len(comps),) or np.any(w < 0):
            raise DomainError("weights must be a nonnegative vector, one per component")
        if abs(float(w.sum()) - 1.0) > 1e-12:
            raise DomainError(f"weights must sum to 1 within 1e-12, got {w.sum()!r}")
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "weights", w)

    @property
    def dims(self) -> int:
        return self.components[0].dims

    def sample_with(self, n: int, rng: np.random.Generator) -> Dataset:
        labels = np.searchsorted(np.cumsum(self.weights), rng.random(n), side="right")
        labels = np.minimum(labels, len(self.components) - 1)
        out = np.empty((n, self.dims))
        for c, comp in enumerate(self.components):
            idx = np.flatnonzero(labels == c)
            if idx.size:
                out[idx] = comp.sample_with(idx.size, rng).points
        return Dataset(out, label=self.kind)

    def project(self, u) -> ProjectedLaw:
        laws = [c.project(u) for c in self.components]
        w = self.weights
        cdf = lambda t: sum(wi * law.cdf(t) for wi, law in zip(w, laws))
        pdf = lambda t: sum(wi * law.pdf(t) for wi, law in zip(w, laws))
        lo = min(law.bracket[0] for law in laws)
        hi = max(law.bracket[1] for law in laws)
        return ProjectedLaw(cdf, pdf, (lo, hi))

    def to_config(self) -> dict:
        return {
            "kind": self.kind,
            "dims": self.dims,
            "components": [c.to_config() for c in self.components],
            "weights": self.weights.tolist(),
        }


@dataclass(frozen=True, eq=False)
class UniformDisk(Model):
    center: np.ndarray
    radius: float

    kind = "uniform-disk"
    analytic = True

    def __post_init__(self):
        center = as_point(self.center, 2)
        if not (self.radius > 0):
            raise DomainError("disk radius must be positive")
        object.__setattr__(self, "center", center)

    @property
    def dims(self) -> int:
        return 2

    def sample_with(self, n: int, rng: np.random.Generator) -> Dataset:
        r = self.radius * np.sqrt(rng.random(n))
        th = 2.0 * np.pi * rng.random(n)
        pts = np.stack([r * np.cos(th), r * np.sin(th)], axis=1) + self.center
        return Dataset(pts, label=self.kind)

    def project(self, u) -> ProjectedLaw:
        # projection of the uniform disk is the semicircle law on [mu-R, mu+R]
        u = as_direction(u, 2)
        mu = float(self.center @ u)
        R = self.radius

        def cdf(t):
            s = np.clip((np.asarray(t, dtype=float) - mu) / R, -1.0, 1.0)
            return 0.5 + (s * np.sqrt(1.0 - s * s) + np.arcsin(s)) / np.pi

        def pdf(t):
            s = (np.asarray(t, dtype=float) - mu) / R
            inside = np.abs(s) <= 1.0
            out = np.zeros_like(s, dtype=float)
            out[inside] = 2.0 * np.sqrt(1.0 - s[inside] ** 2) / (np.pi * R)
            return out

        return ProjectedLaw(cdf, pdf, (mu - R, mu + R))

    def to_config(self) -> dict:
        return {
            "kind": self.kind,
            "dims": 2,
            "center": self.center.tolist(),
            "radius": self.radius,
        }


@dataclass(frozen=True, eq=False)
class UniformSpiral(Model):
    """Uniform law on an Archimedean spiral arc with a small radial thickness.

    Arc-length-uniform parameter, radial jitter; no analytic projected law
    (Lebesgue-null support when thickness = 0).
    """

    turns: float = 2.0
    thickness: float = 0.0
    max_radius: float = 3.0

    kind = "uniform-spiral"
    analytic = False

    def __post_init__(self):
        if not (self.turns > 0):
            raise DomainError("spiral needs a positive number of turns")
        if self.thickness < 0:
            raise DomainError("spiral thickness must be nonnegative")

    @property
    def dims(self) -> int:
        return 2

    def _theta_range(self) -> tuple[float, float, float]:
        th0 = 2.0 * np.pi
        th1 = 2.0 * np.pi * (1.0 + self.turns)
        scale = self.max_radius / th1  # r = scale * theta
        return th0, th1, scale

    def sample_with(self, n: int, rng: np.random.Generator) -> Dataset:
        th0, th1, scale = self._theta_range()
        # cumulative arc length of r = c*theta: (c/2)(th*sqrt(1+th^2)+asinh th)
        grid = np.linspace(th0, th1, 4096)
        arc = 0.5 * scale * (grid * np.sqrt(1.0 + grid**2) + np.arcsinh(grid))
        arc -= arc[0]
        s = rng.random(n) * arc[-1]
        theta = np.interp(s, arc, grid)
        r = scale * theta
        if self.thickness > 0:
            r = r + self.thickness * (rng.random(n) - 0.5)
        pts = np.stack([r * np.cos(theta), r * np.sin(theta)], axis=1)
        return Dataset(pts, label=self.kind)

    def to_config(self) -> dict:
        return {
            "kind": self.kind,
            "dims": 2,
            "turns": self.turns,
            "thickness": self.thickness,
            "max_radius": self.max_radius,
        }


def model_from_config(cfg: dict) -> Model:
    """Build a model from its config document (see to_config)."""
    kind = cfg.get("kind")
    if kind == "gaussian":
        return Gaussian(np.array(cfg["mean"], dtype=float), np.array(cfg["cov"], dtype=float))
    if kind == "gaussian-mixture":
        comps = tuple(model_from_config(c) for c in cfg["components"])
        if any(not isinstance(c, Gaussian) for c in comps):
            raise ConfigurationError("mixture components must be gaussian")
        return GaussianMixture(comps, np.array(cfg["weights"], dtype=float))
    if kind == "uniform-disk":
        return UniformDisk(np.array(cfg["center"], dtype=float), float(cfg["radius"]))
    if kind == "uniform-spiral":
        return UniformSpiral(
            float(cfg.get("turns", 2.0)),
            float(cfg.get("thickness", 0.0)),
            float(cfg.get("max_radius", 3.0)),
        )
    raise ConfigurationError(f"unknown model kind {kind!r}")


def paper_mixture() -> GaussianMixture:
    """The two-component reference mixture: N((-2,0),I) w.p. 1/4 and
    N((2,0),3I) w.p. 3/4."""
    eye = np.eye(2)
    return GaussianMixture(
        (Gaussian(np.array([-2.0, 0.0]), eye), Gaussian(np.array([2.0, 0.0]), 3.0 * eye)),
        np.array([0.25, 0.75]),
    )


def sample(model: Model, n: int, seed: int) -> Dataset:
    """Deterministic i.i.d. sample of size n."""
    if n < 1:
        raise DomainError("need n >= 1")
    return model.sample_with(n, make_rng(seed))


def true_directional_quantile(model: Model, O, u, alpha: float) -> float:
    """Population directional quantile Y(O,u,alpha) for analytic models."""
    law = model.project(u)
    O = as_point(O, model.dims)
    u = as_direction(u, model.dims)
    return law.invert(alpha) - float(O @ u)


def true_h(model: Model, u, alpha: float) -> float:
    """Density-quantile h(u,alpha): projected pdf at the projected quantile."""
    law = model.project(u)
    return float(law.pdf(np.asarray(law.invert(alpha))))


def intersection_prob(
    model: Model, H1: HalfSpace, H2: HalfSpace, mc_n: int = 1_000_000, seed: int = 0
) -> float:
    """Monte-Carlo estimate of P(H1 and H2); standard error <= 1/(2*sqrt(mc_n))."""
    if mc_n < 10_000:
        raise DomainError("need mc_n >= 10000 for a usable estimate")
    pts = model.sample_with(mc_n, make_rng(seed)).points
    hit = ((pts @ H1.u) <= H1.c) & ((pts @ H2.u) <= H2.c)
    return float(hit.mean())


def rho_gamma(
    model: Model,
    gamma: float,
    grid: DirectionGrid,
    delta,
    alpha_steps: int,
    eps_steps: int = 201,
    gamma0: float = 1.0,
) -> float:
    """Worst local expansion defect sup |F(Y+e) - alpha - h(u,alpha)*e| over
    the direction grid, a level grid on delta, and |e| < gamma."""
    if not (0.0 < gamma < gamma0):
        raise DomainError(f"gamma must be in (0, {gamma0}), got {gamma}")
    if grid.dims != model.dims:
        raise DomainError("grid dimension does not match the model")
    alphas = delta.grid(alpha_steps)
    eps = np.linspace(-gamma, gamma, eps_steps + 2)[1:-1]
    worst = 0.0
    for u in grid.directions:
        law = model.project(u)
        for a in alphas:
            y = law.invert(float(a))
            h = float(law.pdf(np.asarray(y)))
            defect = np.abs(law.cdf(y + eps) - a - h * eps)
            worst = max(worst, float(defect.max()))
    return worst
