import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.optimize import brentq
from scipy.stats import norm

from qsurf import (
    CapabilityError,
    DeltaRange,
    DomainError,
    Gaussian,
    GaussianMixture,
    UniformDisk,
    UniformSpiral,
    build_projection_cache,
    empirical_cdf,
    halfspace_at,
    intersection_prob,
    make_direction_grid,
    make_rng,
    model_from_config,
    paper_mixture,
    rho_gamma,
    sample,
    true_directional_quantile,
    true_h,
)

STD2 = Gaussian(np.zeros(2), np.eye(2))


def _hp_normal_quantile(alpha):
    # independent high-precision oracle via mpmath's inverse error function
    import mpmath

    mpmath.mp.dps = 40
    return float(mpmath.sqrt(2) * mpmath.erfinv(2 * mpmath.mpf(alpha) - 1))


def test_sampling_determinism():
    for model in (STD2, paper_mixture(), UniformDisk([0.0, 0.0], 2.0), UniformSpiral()):
        a = sample(model, 500, seed=9).points
        b = sample(model, 500, seed=9).points
        assert np.array_equal(a, b)
        c = sample(model, 500, seed=10).points
        assert not np.array_equal(a, c)


def test_gaussian_mean_concentration():
    pts = sample(STD2, 1_000_000, seed=4).points
    assert np.all(np.abs(pts.mean(axis=0)) < 0.005)


def test_mixture_component_fractions():
    # same weight machinery as the reference mixture, but with components far
    # apart so the draws are attributable by position
    far = GaussianMixture(
        (
            Gaussian(np.array([-100.0, 0.0]), np.eye(2) * 1e-4),
            Gaussian(np.array([100.0, 0.0]), np.eye(2) * 1e-4),
        ),
        np.array([0.25, 0.75]),
    )
    pts = sample(far, 1_000_000, seed=5).points
    frac = float(np.mean(pts[:, 0] < 0))
    assert abs(frac - 0.25) < 0.002


def test_non_spd_covariance_rejected():
    with pytest.raises(DomainError):
        Gaussian(np.zeros(2), np.array([[1.0, 2.0], [2.0, 1.0]]))
    with pytest.raises(DomainError):
        Gaussian(np.zeros(2), np.array([[1.0, 0.5], [0.4, 1.0]]))


def test_weights_must_be_simplex():
    with pytest.raises(DomainError):
        GaussianMixture((STD2, STD2), np.array([0.5, 0.6]))


def test_true_quantile_gaussian_values():
    u = np.array([1.0, 0.0])
    assert true_directional_quantile(STD2, [0.0, 0.0], u, 0.5) == 0.0
    z90 = _hp_normal_quantile(0.9)
    assert true_directional_quantile(STD2, [0.0, 0.0], u, 0.9) == pytest.approx(
        z90, abs=1e-12
    )
    # observer shifts subtract exactly
    got = true_directional_quantile(STD2, [2.0, 0.0], u, 0.9)
    assert got == pytest.approx(z90 - 2.0, abs=1e-12)


def test_paper_mixture_median_matches_brentq():
    mix = paper_mixture()
    u = np.array([1.0, 0.0])

    def f(y):
        return 0.25 * norm.cdf(y + 2.0) + 0.75 * norm.cdf((y - 2.0) / math.sqrt(3.0)) - 0.5

    root = brentq(f, -10.0, 10.0, xtol=1e-14)
    got = true_directional_quantile(mix, [0.0, 0.0], u, 0.5)
    assert got == pytest.approx(root, abs=1e-10)
    law = mix.project(u)
    assert abs(float(law.cdf(np.asarray(got))) - 0.5) <= 1e-12


def test_true_h_values():
    u = np.array([0.0, 1.0])
    assert true_h(STD2, u, 0.5) == pytest.approx(1.0 / math.sqrt(2 * math.pi), abs=1e-14)
    z90 = _hp_normal_quantile(0.9)
    phi = math.exp(-0.5 * z90 * z90) / math.sqrt(2 * math.pi)
    assert true_h(STD2, u, 0.9) == pytest.approx(phi, abs=1e-12)


def test_true_h_scaling():
    wide = Gaussian(np.zeros(2), 4.0 * np.eye(2))
    for ang in (0.1, 1.0, 2.5):
        u = np.array([math.cos(ang), math.sin(ang)])
        for a in (0.55, 0.7, 0.9):
            assert true_h(wide, u, a) == pytest.approx(true_h(STD2, u, a) / 2.0, rel=1e-12)


def test_spiral_has_no_oracle_but_samples():
    sp = UniformSpiral(turns=2.0, thickness=0.1)
    with pytest.raises(CapabilityError):
        true_directional_quantile(sp, [0.0, 0.0], [1.0, 0.0], 0.7)
    pts = sample(sp, 2000, seed=0).points
    radii = np.linalg.norm(pts, axis=1)
    assert radii.max() <= sp.max_radius + sp.thickness
    assert radii.min() >= 0.3


def test_disk_cdf_matches_pdf_quadrature():
    disk = UniformDisk([0.5, -1.0], 1.5)
    u = np.array([0.6, 0.8])
    law = disk.project(u)
    mu = float(disk.center @ u)
    for t in (mu - 1.0, mu - 0.2, mu + 0.4, mu + 1.4):
        integral, err = quad(lambda s: float(law.pdf(np.asarray(s))), mu - 1.5, t)
        assert float(law.cdf(np.asarray(t))) == pytest.approx(integral, abs=1e-9)


def test_quantile_residual_invariant_all_analytic_models():
    grid = make_direction_grid(2, 12)
    models = [STD2, paper_mixture(), UniformDisk([0.2, 0.1], 2.0),
              Gaussian(np.array([1.0, -2.0]), np.array([[2.0, 0.7], [0.7, 1.5]]))]
    for model in models:
        for u in grid.directions:
            law = model.project(u)
            for a in (0.5, 0.6, 0.75, 0.9):
                y = law.invert(a)
                assert abs(float(law.cdf(np.asarray(y))) - a) <= 1e-10


def test_h_bounds_positive_on_delta():
    grid = make_direction_grid(2, 24)
    delta = DeltaRange(0.6, 0.9)
    for model in (STD2, paper_mixture(), UniformDisk([0.0, 0.0], 1.0)):
        hs = [true_h(model, u, a) for u in grid.directions for a in delta.grid(5)]
        assert min(hs) > 0 and math.isfinite(max(hs))


def test_sampling_consistency_against_cdf():
    model = paper_mixture()
    data = sample(model, 1_000_000, seed=17)
    grid = make_direction_grid(2, 20)
    cache = build_projection_cache(data, grid)
    rng = make_rng(18)
    n = data.n
    for _ in range(20):
        j = int(rng.integers(grid.k))
        law = model.project(grid.directions[j])
        c = float(rng.uniform(-4.0, 4.0))
        F = float(law.cdf(np.asarray(c)))
        se = math.sqrt(max(F * (1 - F), 1e-12) / n)
        assert abs(empirical_cdf(cache, j, c) - F) <= 3 * se + 1e-9


def test_intersection_prob_idempotent():
    a = 0.7
    c = float(norm.ppf(a))
    H = halfspace_at([0.0, 0.0], [1.0, 0.0], c)
    p = intersection_prob(STD2, H, H, mc_n=400_000, seed=1)
    assert abs(p - a) < 4 * 0.5 / math.sqrt(400_000)


def test_intersection_prob_complementary_null():
    c = float(norm.ppf(0.6))
    H1 = halfspace_at([0.0, 0.0], [1.0, 0.0], c)
    H2 = halfspace_at([0.0, 0.0], [-1.0, 0.0], -c)
    p = intersection_prob(STD2, H1, H2, mc_n=400_000, seed=2)
    assert p == 0.0  # boundary carries no mass for a continuous law


def test_intersection_prob_orthogonal_product():
    a = 0.7
    c = float(norm.ppf(a))
    H1 = halfspace_at([0.0, 0.0], [1.0, 0.0], c)
    H2 = halfspace_at([0.0, 0.0], [0.0, 1.0], c)
    p = intersection_prob(STD2, H1, H2, mc_n=1_000_000, seed=3)
    assert abs(p - a * a) < 4 * 0.5 / math.sqrt(1_000_000)


def test_intersection_prob_validates_mc_n():
    H = halfspace_at([0.0, 0.0], [1.0, 0.0], 0.0)
    with pytest.raises(DomainError):
        intersection_prob(STD2, H, H, mc_n=100, seed=0)


def test_rho_gamma_second_order_and_monotone():
    grid = make_direction_grid(2, 8)
    delta = DeltaRange(0.6, 0.9)
    rhos = {g: rho_gamma(STD2, g, grid, delta, 5) for g in (1e-1, 1e-2, 1e-3)}
    ratios = [rhos[g] / g**2 for g in (1e-1, 1e-2, 1e-3)]
    assert max(ratios) / min(ratios) < 2.0  # second-order Taylor scale
    assert rhos[1e-3] < rhos[1e-2] < rhos[1e-1]  # sup over nested sets
    assert rhos[1e-3] < 1e-5  # differentiability: rho(gamma) -> 0
    with pytest.raises(DomainError):
        rho_gamma(STD2, 2.0, grid, delta, 5)


def test_model_config_round_trip():
    for model in (STD2, paper_mixture(), UniformDisk([1.0, 2.0], 0.5),
                  UniformSpiral(1.5, 0.2)):
        back = model_from_config(model.to_config())
        assert back.to_config() == model.to_config()
        a = sample(model, 50, seed=3).points
        b = sample(back, 50, seed=3).points
        assert np.array_equal(a, b)


def test_univariate_gaussian_model():
    m1 = Gaussian(np.array([0.5]), np.array([[4.0]]))
    u = np.array([1.0])
    assert true_directional_quantile(m1, [0.0], u, 0.9) == pytest.approx(
        0.5 + 2.0 * _hp_normal_quantile(0.9), abs=1e-12
    )
    data = sample(m1, 1000, seed=0)
    assert data.dims == 1
