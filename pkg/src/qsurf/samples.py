"""Dataset ingestion and the observer-independent projection cache.

The cache stores, for every grid direction u, the ascending order
statistics of the projections <X_i, u>. Every directional quantile or CDF
query for any observer reduces to one lookup here plus one inner product,
so the cache is built once and shared read-only.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, DomainError, ParseError
from .geometry import DirectionGrid

DEFAULT_MEMORY_CAP = 4 << 30  # bytes of projection storage allowed per cache


@dataclass(frozen=True, eq=False)
class Dataset:
    """An n x d point cloud with provenance."""

    points: np.ndarray
    label: str = ""
    source: str = ""

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise DomainError("dataset must be a nonempty (n, d) array")
        if not np.all(np.isfinite(pts)):
            raise DomainError("dataset contains non-finite values")
        object.__setattr__(self, "points", pts)
        pts.setflags(write=False)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dims(self) -> int:
        return self.points.shape[1]


def _parse_row(fields, line_no: int):
    try:
        return [float(f) for f in fields]
    except ValueError as exc:
        raise ParseError(f"non-numeric value ({exc})", line=line_no) from None


def project_columns(points: np.ndarray, U: np.ndarray) -> np.ndarray:
    """Column j = points @ U[j], as a Fortran-ordered (n, k) array.

    One matrix-vector product per direction, never a single matrix-matrix
    product: the two BLAS paths round differently at the last ulp, and cache
    answers must equal a naive per-direction computation bit for bit.
    """
    out = np.empty((points.shape[0], U.shape[0]), order="F")
    for j in range(U.shape[0]):
        out[:, j] = points @ U[j]
    return out


def load_dataset(path, format: str | None = None, label: str | None = None) -> Dataset:
    """Load a dataset from csv (optional single header row) or jsonl.

    Format is inferred from the suffix when not given. Ragged rows and
    non-finite values are rejected with the offending line number.
    """
    path = Path(path)
    if format is None:
        format = "jsonl" if path.suffix.lower() in (".jsonl", ".ndjson") else "csv"
    if format not in ("csv", "jsonl"):
        raise ConfigurationError(f"unknown dataset format {format!r}")
    text = path.read_text(encoding="utf-8")
    rows: list[list[float]] = []
    width = None
    first_data_line = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if format == "csv":
            fields = [f.strip() for f in line.split(",")]
            if not rows and width is None:
                # header auto-detection: a non-numeric first row is skipped
                try:
                    row = [float(f) for f in fields]
                except ValueError:
                    width = len(fields)
                    continue
            else:
                row = _parse_row(fields, line_no)
        else:
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid json ({exc.msg})", line=line_no) from None
            if not isinstance(obj, list):
                raise ParseError("expected an array of numbers", line=line_no)
            row = _parse_row(obj, line_no)
        if width is None:
            width = len(row)
            first_data_line = line_no
        elif len(row) != width:
            raise ParseError(
                f"row has {len(row)} values, expected {width} "
                f"(as on line {first_data_line})",
                line=line_no,
            )
        if not all(math.isfinite(v) for v in row):
            raise ParseError("non-finite value", line=line_no)
        rows.append(row)
    if not rows:
        raise ParseError("no data rows found", line=None)
    return Dataset(np.array(rows, dtype=float), label=label or path.stem, source=str(path))


@dataclass(frozen=True, eq=False)
class ProjectionCache:
    """Per-direction ascending order statistics of <X_i, u>.

    proj has shape (n, k), column j sorted ascending; the originating
    dataset is retained for operations that need joint memberships
    (pairwise half-space counts).
    """

    grid: DirectionGrid
    proj: np.ndarray = field(repr=False)
    dataset: Dataset = field(repr=False)

    @property
    def n(self) -> int:
        return self.proj.shape[0]

    def column(self, u_index: int) -> np.ndarray:
        k = self.grid.k
        if not (0 <= u_index < k):
            raise DomainError(f"direction index {u_index} outside grid of size {k}")
        return self.proj[:, u_index]


def build_projection_cache(
    data: Dataset, grid: DirectionGrid, max_memory_bytes: int = DEFAULT_MEMORY_CAP
) -> ProjectionCache:
    """Project the dataset onto every grid direction and sort each column."""
    if grid.dims != data.dims:
        raise DomainError(f"grid dimension {grid.dims} != dataset dimension {data.dims}")
    needed = 8 * data.n * grid.k
    if needed > max_memory_bytes:
        raise ConfigurationError(
            f"projection cache needs {needed} bytes for n={data.n}, k={grid.k}, "
            f"above the cap of {max_memory_bytes}; raise max_memory_bytes explicitly"
        )
    proj = project_columns(data.points, grid.directions)
    proj.sort(axis=0, kind="quicksort")
    proj.setflags(write=False)
    return ProjectionCache(grid=grid, proj=proj, dataset=data)


def order_stat_index(n: int, alpha: float) -> int:
    """0-based index of the smallest order statistic q with F_n(q) >= alpha.

    This is the ceil(n*alpha)-th order statistic; the correction loops pin
    the defining inequality m/n >= alpha under floating point so the value
    is exactly inf{y : P_n((-inf, y]) >= alpha}.
    """
    if not (0.0 < alpha <= 1.0):
        raise DomainError(f"alpha must be in (0, 1], got {alpha}")
    m = min(max(math.ceil(n * alpha), 1), n)
    while m < n and m / n < alpha:
        m += 1
    while m > 1 and (m - 1) / n >= alpha:
        m -= 1
    return m - 1


def empirical_cdf(cache: ProjectionCache, u_index: int, c: float) -> float:
    """Fraction of sample points with <X_i, u> <= c (boundary inclusive)."""
    col = cache.column(u_index)
    return float(np.searchsorted(col, c, side="right")) / cache.n


def empirical_quantile(cache: ProjectionCache, u_index: int, alpha: float) -> float:
    """The alpha-th empirical quantile of the projections onto direction u_index."""
    col = cache.column(u_index)
    return float(col[order_stat_index(cache.n, alpha)])


def empirical_quantile_all(cache: ProjectionCache, alpha: float) -> np.ndarray:
    """Vector of alpha-th projection quantiles, one entry per grid direction."""
    return np.array(cache.proj[order_stat_index(cache.n, alpha), :])
