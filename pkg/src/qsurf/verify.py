"""Replication-driven studies checking the limit theorems at desk scale.

One replication engine feeds all grid-based studies: sample, project onto
the direction grid, sort, and read off the quantile grid, the empirical
process at the true quantiles, and surface distances. Replications are
independent tasks keyed by (seed, replication index) and reduced in index
order, so parallel runs are byte-identical to serial ones.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.stats import kurtosis, skew

from .errors import CapabilityError, ConfigurationError, DomainError, NoAdmissibleBandError
from .geometry import make_direction_grid
from .inference import bahadur_kiefer_rate, confidence_band
from .models import Model, intersection_prob, model_from_config, rho_gamma
from .quantiles import DeltaRange, psi_hat
from .samples import build_projection_cache, order_stat_index, project_columns
from .seeding import make_rng

REPORT_COLUMNS = ("study", "n", "rep", "stat", "value", "reference", "seed", "config_hash")
STUDIES = ("consistency", "lil", "clt", "bk", "psi", "coverage")

THREADS_ENV = "QSURF_THREADS"


def default_threads() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def lil_rate(n: int) -> float:
    """sqrt(loglog n / n), defined for n >= 3."""
    if n < 3:
        raise DomainError("rate needs n >= 3 so loglog n is defined")
    return math.sqrt(math.log(math.log(n)) / n)


def strong_approx_rate(n: int, d: int) -> float:
    """Reference coupling rate n^(-v_d) (log n)^(w_d); reported, never fitted."""
    v_d = 1.0 / (2.0 + 10.0 * d)
    w_d = (4.0 + 10.0 * d) / (4.0 + 20.0 * d)
    return n ** (-v_d) * math.log(n) ** w_d


@dataclass(frozen=True, eq=False)
class StudyConfig:
    study: str
    model: Model
    n_grid: tuple[int, ...]
    replications: int
    directions: int = 200
    delta: DeltaRange = field(default_factory=lambda: DeltaRange(0.6, 0.9))
    alpha_steps: int = 9
    seed: int = 0
    # study-specific knobs
    points: tuple[tuple[int, float], ...] | None = None  # clt grid points
    level: float = 0.95  # coverage band level
    draws: int = 500  # coverage field draws
    bandwidth: float | None = None  # coverage h bandwidth (None = default)
    eps_values: tuple[float, ...] = (0.01, 0.02, 0.05)  # psi band widths
    mc_n: int = 4_000_000  # oracle intersection-probability sample size
    threads: int | None = None
    # acceptance envelopes
    lil_slack: float = 1.5
    bk_slack: float = 1.3
    coverage_bounds: tuple[float, float] = (0.90, 0.99)
    clt_diag_rtol: float = 0.15
    clt_offdiag_sigmas: float = 3.0
    psi_ratio_slack: float = 2.0

    def __post_init__(self):
        if self.study not in STUDIES:
            raise ConfigurationError(f"unknown study {self.study!r}; choose from {STUDIES}")
        if self.replications < 1:
            raise ConfigurationError("need at least one replication")
        ns = tuple(int(n) for n in self.n_grid)
        if not ns or any(b <= a for a, b in zip(ns, ns[1:])):
            raise ConfigurationError("n_grid must be nonempty and strictly ascending")
        object.__setattr__(self, "n_grid", ns)
        if self.points is not None:
            object.__setattr__(
                self, "points", tuple((int(j), float(a)) for j, a in self.points)
            )

    def to_config(self) -> dict:
        return {
            "study": self.study,
            "model": self.model.to_config(),
            "n_grid": list(self.n_grid),
            "replications": self.replications,
            "directions": self.directions,
            "delta": [self.delta.alpha_minus, self.delta.alpha_plus],
            "alpha_steps": self.alpha_steps,
            "seed": self.seed,
            "points": [list(p) for p in self.points] if self.points else None,
            "level": self.level,
            "draws": self.draws,
            "bandwidth": self.bandwidth,
            "eps_values": list(self.eps_values),
            "mc_n": self.mc_n,
            "lil_slack": self.lil_slack,
            "bk_slack": self.bk_slack,
            "coverage_bounds": list(self.coverage_bounds),
            "clt_diag_rtol": self.clt_diag_rtol,
            "clt_offdiag_sigmas": self.clt_offdiag_sigmas,
            "psi_ratio_slack": self.psi_ratio_slack,
        }

    @property
    def config_hash(self) -> str:
        blob = json.dumps(self.to_config(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]


def study_config_from_config(cfg: dict) -> StudyConfig:
    delta = cfg.get("delta", [0.6, 0.9])
    kwargs = dict(
        study=cfg["study"],
        model=model_from_config(cfg["model"]),
        n_grid=tuple(cfg["n_grid"]),
        replications=int(cfg["replications"]),
        delta=DeltaRange(float(delta[0]), float(delta[1])),
    )
    for key in (
        "directions", "alpha_steps", "seed", "level", "draws", "bandwidth",
        "mc_n", "lil_slack", "bk_slack", "clt_diag_rtol", "clt_offdiag_sigmas",
        "psi_ratio_slack", "threads",
    ):
        if cfg.get(key) is not None:
            kwargs[key] = cfg[key]
    if cfg.get("points"):
        kwargs["points"] = tuple((int(j), float(a)) for j, a in cfg["points"])
    if cfg.get("eps_values"):
        kwargs["eps_values"] = tuple(float(e) for e in cfg["eps_values"])
    if cfg.get("coverage_bounds"):
        b = cfg["coverage_bounds"]
        kwargs["coverage_bounds"] = (float(b[0]), float(b[1]))
    return StudyConfig(**kwargs)


@dataclass
class StudyReport:
    study: str
    config_hash: str
    seed: int
    rows: list[dict]
    passed: bool
    notes: list[str] = field(default_factory=list)

    def add(self, n: int, rep: int, stat: str, value: float, reference: float = 0.0):
        self.rows.append(
            {
                "study": self.study,
                "n": int(n),
                "rep": int(rep),
                "stat": stat,
                "value": float(value),
                "reference": float(reference),
                "seed": self.seed,
                "config_hash": self.config_hash,
            }
        )

    def values(self, stat: str, n: int | None = None) -> np.ndarray:
        out = [
            r["value"]
            for r in self.rows
            if r["stat"] == stat and r["rep"] >= 0 and (n is None or r["n"] == n)
        ]
        return np.array(out, dtype=float)

    def aggregate(self, stat: str, n: int | None = None) -> float:
        for r in self.rows:
            if r["stat"] == stat and r["rep"] == -1 and (n is None or r["n"] == n):
                return r["value"]
        raise KeyError(f"no aggregate row {stat!r} for n={n}")


def emit_report(report: StudyReport, path, format: str = "csv") -> None:
    """Write the report with a stable column order; re-emits are byte-identical."""
    path = Path(path)
    if format == "csv":
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(REPORT_COLUMNS)
            for r in report.rows:
                w.writerow([repr(r[c]) if isinstance(r[c], float) else r[c]
                            for c in REPORT_COLUMNS])
    elif format in ("json", "structured-text"):
        doc = {
            "study": report.study,
            "config_hash": report.config_hash,
            "seed": report.seed,
            "passed": report.passed,
            "notes": report.notes,
            "columns": list(REPORT_COLUMNS),
            "rows": [[r[c] for c in REPORT_COLUMNS] for r in report.rows],
        }
        path.write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")
    else:
        raise ConfigurationError(f"unknown report format {format!r}")


def load_report_csv(path) -> list[dict]:
    rows = []
    with Path(path).open(newline="", encoding="utf-8") as fh:
        for raw in csv.DictReader(fh):
            rows.append(
                {
                    "study": raw["study"],
                    "n": int(raw["n"]),
                    "rep": int(raw["rep"]),
                    "stat": raw["stat"],
                    "value": float(raw["value"]),
                    "reference": float(raw["reference"]),
                    "seed": int(raw["seed"]),
                    "config_hash": raw["config_hash"],
                }
            )
    return rows


# ---------------------------------------------------------------------------
# replication engine
# ---------------------------------------------------------------------------


def _oracle_grids(model: Model, U: np.ndarray, alphas: np.ndarray):
    """True canonical quantile offsets and h on the (direction, level) grid."""
    if not model.analytic:
        raise CapabilityError(
            f"study needs analytic oracles; model {model.kind!r} has none"
        )
    k, A = U.shape[0], alphas.size
    ytrue = np.empty((k, A))
    h = np.empty((k, A))
    for j in range(k):
        law = model.project(U[j])
        for a in range(A):
            ytrue[j, a] = law.invert(float(alphas[a]))
            h[j, a] = float(law.pdf(np.asarray(ytrue[j, a])))
    return ytrue, h


def _sorted_projections(model_cfg: dict, n: int, U: np.ndarray, seed: int, rep: int):
    model = model_from_config(model_cfg)
    pts = model.sample_with(n, make_rng(seed, rep)).points
    proj = project_columns(pts, U)
    proj.sort(axis=0)
    return proj


def _rep_grid_task(args) -> tuple[int, int, dict]:
    (model_cfg, n, U, alphas, ytrue, h, seed, rep, want_bk, hd_cols) = args
    proj = _sorted_projections(model_cfg, n, U, seed, rep)
    idx = [order_stat_index(n, float(a)) for a in alphas]
    yn = proj[idx, :].T  # (k, A)
    err = yn - ytrue
    stats: dict[str, float] = {"sup_abs_err": float(np.max(np.abs(err)))}
    if want_bk:
        k = U.shape[0]
        en = np.empty_like(ytrue)
        for j in range(k):
            en[j, :] = np.searchsorted(proj[:, j], ytrue[j, :], side="right")
        en = math.sqrt(n) * (en / n - alphas[None, :])
        stats["bk_sup_residual"] = float(
            np.max(np.abs(math.sqrt(n) * err + en / h))
        )
    for col in hd_cols:
        qn = yn[:, col][:, None] * U
        qt = ytrue[:, col][:, None] * U
        diff = qn[:, None, :] - qt[None, :, :]
        dmat = np.sqrt(np.sum(diff * diff, axis=2))
        stats[f"hausdorff_a{alphas[col]:.6g}"] = float(
            max(dmat.min(axis=1).max(), dmat.min(axis=0).max())
        )
    return n, rep, stats


def _rep_clt_task(args) -> tuple[int, int, dict]:
    (model_cfg, n, U_pts, alphas_pts, ytrue_pts, seed, rep) = args
    model = model_from_config(model_cfg)
    pts = model.sample_with(n, make_rng(seed, rep)).points
    proj = np.sort(pts @ U_pts.T, axis=0)
    stats = {}
    for p, a in enumerate(alphas_pts):
        yn = float(proj[order_stat_index(n, float(a)), p])
        stats[f"dn_p{p}"] = math.sqrt(n) * (yn - float(ytrue_pts[p]))
    return n, rep, stats


def _rep_coverage_task(args) -> tuple[int, int, dict]:
    (model_cfg, n, k, alpha, level, draws, bandwidth, ytrue_vec, seed, rep) = args
    model = model_from_config(model_cfg)
    data = model.sample_with(n, make_rng(seed, rep))
    grid = make_direction_grid(model.dims, k)
    cache = build_projection_cache(data, grid)
    field_seed = int(np.random.SeedSequence([seed, rep, 7]).generate_state(1)[0])
    band = confidence_band(
        cache, np.zeros(model.dims), alpha, level, draws, field_seed, bandwidth
    )
    covered = bool(np.all(np.abs(ytrue_vec - band.surface.y) <= band.halfwidth))
    return n, rep, {
        "covered": float(covered),
        "mean_halfwidth": float(band.halfwidth.mean()),
        "jitter_applied": band.jitter_applied,
    }


def _rep_psi_task(args) -> tuple[int, int, dict]:
    (model_cfg, n, k, dminus, dplus, eps_values, seed, rep) = args
    model = model_from_config(model_cfg)
    data = model.sample_with(n, make_rng(seed, rep))
    grid = make_direction_grid(model.dims, k)
    cache = build_projection_cache(data, grid)
    delta = DeltaRange(dminus, dplus)
    stats = {}
    origin = np.zeros(model.dims)
    for eps in eps_values:
        try:
            v = psi_hat(cache, origin, float(eps), delta)
        except NoAdmissibleBandError:
            v = math.nan
        stats[f"psi_eps{eps:g}"] = v
        stats[f"psi_ratio_eps{eps:g}"] = v / eps
    return n, rep, stats


def _run_tasks(task_fn, tasks, threads: int):
    """Run tasks (already ordered) and return results sorted back to that order."""
    if threads <= 1 or len(tasks) <= 1:
        results = [task_fn(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(task_fn, tasks, chunksize=1))
    return sorted(results, key=lambda r: (r[0], r[1]))


def _new_report(cfg: StudyConfig) -> StudyReport:
    return StudyReport(cfg.study, cfg.config_hash, cfg.seed, [], passed=False)


def _add_rate_rows(report: StudyReport, cfg: StudyConfig):
    d = cfg.model.dims
    for n in cfg.n_grid:
        report.add(n, -1, "rate_sqrt_loglog_over_n", lil_rate(n), lil_rate(n))
        report.add(n, -1, "rate_bk", bahadur_kiefer_rate(n), bahadur_kiefer_rate(n))
        report.add(n, -1, "rate_strong_approx", strong_approx_rate(n, d),
                   strong_approx_rate(n, d))


def _add_h_bounds(report: StudyReport, h: np.ndarray):
    report.add(0, -1, "h_min", float(h.min()))
    report.add(0, -1, "h_max", float(h.max()))


def _grid_study_inputs(cfg: StudyConfig):
    grid = make_direction_grid(cfg.model.dims, cfg.directions)
    alphas = cfg.delta.grid(cfg.alpha_steps)
    ytrue, h = _oracle_grids(cfg.model, grid.directions, alphas)
    return grid, alphas, ytrue, h


def run_consistency_study(cfg: StudyConfig) -> StudyReport:
    """sup |Y_n - Y| over the grid plus Hausdorff distances at three levels;
    medians must be non-increasing in n."""
    grid, alphas, ytrue, h = _grid_study_inputs(cfg)
    hd_cols = sorted({0, alphas.size // 2, alphas.size - 1})
    model_cfg = cfg.model.to_config()
    tasks = [
        (model_cfg, n, grid.directions, alphas, ytrue, h, cfg.seed, rep, False, hd_cols)
        for n in cfg.n_grid
        for rep in range(cfg.replications)
    ]
    results = _run_tasks(_rep_grid_task, tasks, cfg.threads or default_threads())
    report = _new_report(cfg)
    for n, rep, stats in results:
        for stat, v in stats.items():
            report.add(n, rep, stat, v, lil_rate(n))
    medians = []
    for n in cfg.n_grid:
        med = float(np.median(report.values("sup_abs_err", n)))
        report.add(n, -1, "median_sup_abs_err", med, lil_rate(n))
        medians.append(med)
    report.passed = all(b <= a for a, b in zip(medians, medians[1:]))
    if not report.passed:
        report.notes.append(f"median sup errors not non-increasing: {medians}")
    _add_h_bounds(report, h)
    _add_rate_rows(report, cfg)
    return report


def run_lil_study(cfg: StudyConfig) -> StudyReport:
    """sup |Y_n - Y| / sqrt(loglog n / n): the upper quartile must stay within
    a slack factor across the n grid."""
    if any(n < 3 for n in cfg.n_grid):
        raise DomainError("lil study needs n >= 3")
    grid, alphas, ytrue, h = _grid_study_inputs(cfg)
    model_cfg = cfg.model.to_config()
    tasks = [
        (model_cfg, n, grid.directions, alphas, ytrue, h, cfg.seed, rep, False, [])
        for n in cfg.n_grid
        for rep in range(cfg.replications)
    ]
    results = _run_tasks(_rep_grid_task, tasks, cfg.threads or default_threads())
    report = _new_report(cfg)
    for n, rep, stats in results:
        ratio = stats["sup_abs_err"] / lil_rate(n)
        report.add(n, rep, "lil_ratio", ratio, lil_rate(n))
    uqs = []
    for n in cfg.n_grid:
        uq = float(np.quantile(report.values("lil_ratio", n), 0.75))
        report.add(n, -1, "upper_quartile_lil_ratio", uq, lil_rate(n))
        uqs.append(uq)
    report.passed = max(uqs) <= cfg.lil_slack * min(uqs)
    if not report.passed:
        report.notes.append(
            f"upper-quartile ratios vary beyond x{cfg.lil_slack}: {uqs}"
        )
    _add_h_bounds(report, h)
    _add_rate_rows(report, cfg)
    return report


def run_bk_study(cfg: StudyConfig) -> StudyReport:
    """sup |sqrt(n)(Y_n - Y) + E_n/h| against b_n; the median ratio must be
    non-increasing across the n grid within a slack factor."""
    grid, alphas, ytrue, h = _grid_study_inputs(cfg)
    model_cfg = cfg.model.to_config()
    tasks = [
        (model_cfg, n, grid.directions, alphas, ytrue, h, cfg.seed, rep, True, [])
        for n in cfg.n_grid
        for rep in range(cfg.replications)
    ]
    results = _run_tasks(_rep_grid_task, tasks, cfg.threads or default_threads())
    report = _new_report(cfg)
    for n, rep, stats in results:
        b_n = bahadur_kiefer_rate(n)
        report.add(n, rep, "bk_sup_residual", stats["bk_sup_residual"], b_n)
        report.add(n, rep, "bk_ratio", stats["bk_sup_residual"] / b_n, b_n)
    medians = []
    for n in cfg.n_grid:
        med = float(np.median(report.values("bk_ratio", n)))
        report.add(n, -1, "median_bk_ratio", med, bahadur_kiefer_rate(n))
        medians.append(med)
    report.passed = all(b <= cfg.bk_slack * a for a, b in zip(medians, medians[1:]))
    if not report.passed:
        report.notes.append(
            f"median bk ratios increase beyond x{cfg.bk_slack}: {medians}"
        )
    # the oracle rho term of a_n = sqrt(n) rho(sqrt(loglog n / n)) vs b_n,
    # so a reader can see which part of the bound dominates at each n
    rho_grid = make_direction_grid(cfg.model.dims, min(cfg.directions, 24))
    for n in cfg.n_grid:
        gamma = lil_rate(n)
        term = math.sqrt(n) * rho_gamma(
            cfg.model, gamma, rho_grid, cfg.delta, cfg.alpha_steps, eps_steps=101
        )
        report.add(n, -1, "rate_a_n_rho_term", term, bahadur_kiefer_rate(n))
    _add_h_bounds(report, h)
    _add_rate_rows(report, cfg)
    return report


def _default_clt_points(k: int) -> tuple[tuple[int, float], ...]:
    return ((0, 0.7), (0, 0.8), (k // 4, 0.7), (k // 4, 0.8))


def _clt_oracle_sigma(cfg: StudyConfig, U_pts, alphas_pts, ytrue_pts, h_pts):
    """Oracle covariance: exact diagonal, Monte-Carlo intersections off it."""
    from .geometry import HalfSpace

    P = len(alphas_pts)
    sigma = np.empty((P, P))
    for i in range(P):
        sigma[i, i] = alphas_pts[i] * (1 - alphas_pts[i]) / h_pts[i] ** 2
        for j in range(i + 1, P):
            Hi = HalfSpace(U_pts[i], float(ytrue_pts[i]))
            Hj = HalfSpace(U_pts[j], float(ytrue_pts[j]))
            p = intersection_prob(
                cfg.model, Hi, Hj, cfg.mc_n,
                seed=int(np.random.SeedSequence([cfg.seed, 9000 + i, j]).generate_state(1)[0]),
            )
            sigma[i, j] = sigma[j, i] = (
                (p - alphas_pts[i] * alphas_pts[j]) / (h_pts[i] * h_pts[j])
            )
    return sigma


def run_clt_study(cfg: StudyConfig) -> StudyReport:
    """Empirical covariance of sqrt(n)(Y_n - Y) at a few grid points compared
    entrywise to the oracle covariance, plus marginal normality diagnostics."""
    if cfg.replications < 2:
        raise ConfigurationError("clt study needs at least 2 replications")
    grid = make_direction_grid(cfg.model.dims, cfg.directions)
    points = cfg.points or _default_clt_points(grid.k)
    if len(points) > 8:
        raise ConfigurationError("clt study compares at most 8 grid points")
    U_pts = np.array([grid.directions[j] for j, _ in points])
    alphas_pts = np.array([a for _, a in points])
    ytrue_pts = np.empty(len(points))
    h_pts = np.empty(len(points))
    for p, (j, a) in enumerate(points):
        law = cfg.model.project(grid.directions[j])
        ytrue_pts[p] = law.invert(a)
        h_pts[p] = float(law.pdf(np.asarray(ytrue_pts[p])))
    model_cfg = cfg.model.to_config()
    n = cfg.n_grid[-1]
    tasks = [
        (model_cfg, n, U_pts, alphas_pts, ytrue_pts, cfg.seed, rep)
        for rep in range(cfg.replications)
    ]
    results = _run_tasks(_rep_clt_task, tasks, cfg.threads or default_threads())
    report = _new_report(cfg)
    P = len(points)
    D = np.empty((cfg.replications, P))
    for nn, rep, stats in results:
        for p in range(P):
            D[rep, p] = stats[f"dn_p{p}"]
            report.add(nn, rep, f"dn_p{p}", D[rep, p])
    emp = np.atleast_2d(np.cov(D, rowvar=False))
    oracle = _clt_oracle_sigma(cfg, U_pts, alphas_pts, ytrue_pts, h_pts)
    R = cfg.replications
    ok = True
    for i in range(P):
        report.add(n, -1, f"cov_emp_{i}_{i}", float(emp[i, i]), float(oracle[i, i]))
        rel = abs(emp[i, i] - oracle[i, i]) / oracle[i, i]
        report.add(n, -1, f"cov_diag_relerr_{i}", float(rel), cfg.clt_diag_rtol)
        ok &= rel <= cfg.clt_diag_rtol
        report.add(n, -1, f"skewness_p{i}", float(skew(D[:, i])))
        report.add(n, -1, f"excess_kurtosis_p{i}", float(kurtosis(D[:, i])))
        report.add(n, -1, f"h_oracle_p{i}", float(h_pts[i]))
        for j in range(i + 1, P):
            se = math.sqrt((emp[i, i] * emp[j, j] + emp[i, j] ** 2) / R)
            dev = abs(emp[i, j] - oracle[i, j])
            report.add(n, -1, f"cov_emp_{i}_{j}", float(emp[i, j]), float(oracle[i, j]))
            report.add(n, -1, f"cov_offdiag_sigmas_{i}_{j}", float(dev / se),
                       cfg.clt_offdiag_sigmas)
            ok &= dev <= cfg.clt_offdiag_sigmas * se
    report.add(n, -1, "oracle_mc_se", 0.5 / math.sqrt(cfg.mc_n))
    report.passed = bool(ok)
    if not ok:
        report.notes.append("covariance entries outside tolerance; see aggregate rows")
    _add_rate_rows(report, cfg)
    return report


def run_coverage_study(cfg: StudyConfig) -> StudyReport:
    """Fraction of replications whose band contains the whole true surface."""
    grid = make_direction_grid(cfg.model.dims, cfg.directions)
    alpha = float(cfg.delta.grid(1)[0])  # band level = midpoint of delta
    ytrue = np.array(
        [cfg.model.project(u).invert(alpha) for u in grid.directions]
    )
    model_cfg = cfg.model.to_config()
    n = cfg.n_grid[-1]
    tasks = [
        (model_cfg, n, cfg.directions, alpha, cfg.level, cfg.draws, cfg.bandwidth,
         ytrue, cfg.seed, rep)
        for rep in range(cfg.replications)
    ]
    results = _run_tasks(_rep_coverage_task, tasks, cfg.threads or default_threads())
    report = _new_report(cfg)
    for nn, rep, stats in results:
        for stat, v in stats.items():
            report.add(nn, rep, stat, v)
    cov = float(np.mean(report.values("covered", n)))
    report.add(n, -1, "coverage", cov, cfg.level)
    report.add(n, -1, "mean_halfwidth", float(np.mean(report.values("mean_halfwidth", n))))
    lo, hi = cfg.coverage_bounds
    report.passed = lo <= cov <= hi
    if not report.passed:
        report.notes.append(f"coverage {cov} outside [{lo}, {hi}]")
    _add_rate_rows(report, cfg)
    return report


def run_psi_study(cfg: StudyConfig) -> StudyReport:
    """psi-hat across band widths; the ratio psi/eps must be stable."""
    model_cfg = cfg.model.to_config()
    tasks = [
        (model_cfg, n, cfg.directions, cfg.delta.alpha_minus, cfg.delta.alpha_plus,
         cfg.eps_values, cfg.seed, rep)
        for n in cfg.n_grid
        for rep in range(cfg.replications)
    ]
    results = _run_tasks(_rep_psi_task, tasks, cfg.threads or default_threads())
    report = _new_report(cfg)
    for n, rep, stats in results:
        for stat, v in stats.items():
            report.add(n, rep, stat, v)
    n = cfg.n_grid[-1]
    ratios = []
    for eps in cfg.eps_values:
        vals = report.values(f"psi_ratio_eps{eps:g}", n)
        vals = vals[np.isfinite(vals)]
        med = float(np.median(vals)) if vals.size else math.nan
        report.add(n, -1, f"median_psi_ratio_eps{eps:g}", med)
        ratios.append(med)
    finite = [r for r in ratios if math.isfinite(r)]
    report.passed = (
        len(finite) == len(ratios)
        and min(finite) > 0
        and max(finite) <= cfg.psi_ratio_slack * min(finite)
    )
    if not report.passed:
        report.notes.append(f"psi/eps ratios unstable: {ratios}")
    _add_rate_rows(report, cfg)
    return report


_RUNNERS = {
    "consistency": run_consistency_study,
    "lil": run_lil_study,
    "clt": run_clt_study,
    "bk": run_bk_study,
    "psi": run_psi_study,
    "coverage": run_coverage_study,
}


def run_study(cfg: StudyConfig) -> StudyReport:
    return _RUNNERS[cfg.study](cfg)
