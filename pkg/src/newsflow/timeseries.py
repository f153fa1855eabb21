"""Activity time series: binning, day removal, STL, ADF and correlation graphs."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from . import _kernels
from .ingest import TweetRecord

DAY = 86_400
DEFAULT_BIN = 900


class SeriesError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ActivitySeries:
    label: str
    bin_width: int
    t0: float
    counts: np.ndarray
    gaps: np.ndarray  # True where the bin falls in a collection outage
    bin_starts: np.ndarray  # UTC start of every bin; not contiguous after day removal

    def __len__(self) -> int:
        return int(self.counts.shape[0])


def _outage_mask(starts: np.ndarray, width: int, outages: Iterable[tuple[float, float]]) -> np.ndarray:
    mask = np.zeros(starts.shape[0], dtype=bool)
    for lo, hi in outages:
        mask |= (starts < hi) & (starts + width > lo)
    return mask


def bin_activity(
    records: Iterable[TweetRecord],
    selector: Callable[[TweetRecord], bool | int],
    t0: float,
    t1: float,
    bin_width: int = DEFAULT_BIN,
    label: str = "",
    outages: Iterable[tuple[float, float]] = (),
) -> ActivitySeries:
    """Count selected records in half-open bins ``[t, t + bin_width)``.

    ``selector`` returns a truth value or a per-record weight. Bins that
    overlap an outage interval are flagged in ``gaps``; zero counts are
    never treated as gaps.
    """
    if bin_width <= 0:
        raise SeriesError("bin width must be positive")
    if not t0 < t1:
        raise SeriesError("t0 must precede t1")
    n_bins = int(math.ceil((t1 - t0) / bin_width))
    counts = np.zeros(n_bins, dtype=np.int64)
    for rec in records:
        if not t0 <= rec.timestamp < t1:
            continue
        weight = int(selector(rec))
        if weight:
            counts[int((rec.timestamp - t0) // bin_width)] += weight
    starts = t0 + bin_width * np.arange(n_bins, dtype=np.float64)
    return ActivitySeries(label, bin_width, t0, counts, _outage_mask(starts, bin_width, outages), starts)


def day_index(t: np.ndarray | float, day_start_hour: float = 4, tz_offset_hours: float = -5):
    """Index of the local day (starting at ``day_start_hour``) containing ``t``."""
    return np.floor((np.asarray(t) + 3600 * (tz_offset_hours - day_start_hour)) / DAY).astype(np.int64)


def day_boundary(day: int, day_start_hour: float = 4, tz_offset_hours: float = -5) -> float:
    return day * DAY - 3600 * (tz_offset_hours - day_start_hour)


def remove_incomplete_days(
    series: ActivitySeries, day_start_hour: float = 4, tz_offset_hours: float = -5
) -> ActivitySeries:
    """Drop every local day that holds a gap bin or is only partly covered.

    Days run from ``day_start_hour`` to ``day_start_hour`` in the given UTC
    offset. The remaining days are concatenated, so the result has a whole
    number of days.
    """
    if DAY % series.bin_width:
        raise SeriesError("bin width must divide one day")
    per_day = DAY // series.bin_width
    days = day_index(series.bin_starts, day_start_hour, tz_offset_hours)
    keep = np.zeros(len(series), dtype=bool)
    for d in np.unique(days):
        sel = days == d
        aligned = series.bin_starts[sel][0] == day_boundary(int(d), day_start_hour, tz_offset_hours)
        if sel.sum() == per_day and aligned and not series.gaps[sel].any():
            keep |= sel
    if not keep.any():
        raise SeriesError(f"no complete day left in series {series.label!r}")
    return replace(
        series,
        counts=series.counts[keep],
        gaps=series.gaps[keep],
        bin_starts=series.bin_starts[keep],
    )


# -- STL ----------------------------------------------------------------------

@dataclass(frozen=True)
class StlParams:
    period: int = 96
    seasonal: int = 95
    trend: int | None = None
    low_pass: int | None = None
    seasonal_deg: int = 0
    trend_deg: int = 1
    low_pass_deg: int = 1
    inner_iter: int = 2
    outer_iter: int = 1  # passes; robustness weights are used from the second on

    def resolved(self) -> tuple[StlParams, list[str]]:
        """Fill defaults and force odd spans; returns notes on adjustments."""
        notes = []
        if self.period < 2:
            raise SeriesError("period must be >= 2")
        ns = self.seasonal
        if ns < 7:
            notes.append(f"seasonal span {ns} raised to 7")
            ns = 7
        if ns % 2 == 0:
            notes.append(f"seasonal span {ns} made odd ({ns + 1})")
            ns += 1
        nt = self.trend
        if nt is None:
            nt = _next_odd(1.5 * self.period / (1 - 1.5 / ns))
        elif nt % 2 == 0:
            notes.append(f"trend span {nt} made odd ({nt + 1})")
            nt += 1
        nl = self.low_pass
        if nl is None:
            nl = _next_odd(self.period)
        elif nl % 2 == 0:
            notes.append(f"low-pass span {nl} made odd ({nl + 1})")
            nl += 1
        if self.inner_iter < 1 or self.outer_iter < 1:
            raise SeriesError("iteration counts must be >= 1")
        return replace(self, seasonal=ns, trend=nt, low_pass=nl), notes


def _next_odd(x: float) -> int:
    k = int(math.ceil(x - 1e-12))
    return k if k % 2 else k + 1


@dataclass(frozen=True, eq=False)
class StlDecomposition:
    observed: np.ndarray
    trend: np.ndarray
    seasonal: np.ndarray
    remainder: np.ndarray
    params: StlParams
    notes: list[str] = field(default_factory=list)
    robustness: np.ndarray | None = None


def _smooth(y, span, degree, rw):
    """Loess at every position 1..n with the classic moving window."""
    n = y.shape[0]
    i = np.arange(1, n + 1, dtype=np.int64)
    if span >= n:
        nleft = np.ones(n, dtype=np.int64)
        nright = np.full(n, n, dtype=np.int64)
    else:
        nsh = (span + 1) // 2
        nleft = np.clip(i - nsh + 1, 1, n - span + 1)
        nright = nleft + span - 1
    ys, ok = _kernels.loess(y, rw, rw is not None, span, degree, i.astype(np.float64), nleft, nright)
    return np.where(ok, ys, y)


def _cycle_subseries(y, period, span, degree, rw):
    """Smooth each cycle-subseries and extend it one cycle on both ends."""
    n = y.shape[0]
    out = np.zeros(n + 2 * period)
    for j in range(period):
        sub = np.ascontiguousarray(y[j::period])
        k = sub.shape[0]
        srw = None if rw is None else np.ascontiguousarray(rw[j::period])
        fitted = _smooth(sub, span, degree, srw)
        ends, ok = _kernels.loess(
            sub, srw, srw is not None, span, degree,
            np.array([0.0, k + 1.0]),
            np.array([1, max(1, k - span + 1)], dtype=np.int64),
            np.array([min(span, k), k], dtype=np.int64),
        )
        first = ends[0] if ok[0] else fitted[0]
        last = ends[1] if ok[1] else fitted[-1]
        out[j::period][: k + 2] = np.concatenate(([first], fitted, [last]))
    return out


def _moving_average(x, length):
    c = np.cumsum(np.concatenate(([0.0], x)))
    return (c[length:] - c[:-length]) / length


def _robustness_weights(resid):
    r = np.abs(resid)
    h = 6.0 * np.median(r)
    if h == 0:
        return np.ones_like(r)
    u = r / h
    w = (1.0 - u * u) ** 2
    w[u <= 0.001] = 1.0
    w[u > 0.999] = 0.0
    return w


def stl_decompose(x: Sequence[float] | np.ndarray, params: StlParams | None = None) -> StlDecomposition:
    """Seasonal-trend decomposition by Loess (Cleveland et al. inner/outer loops)."""
    params, notes = (params or StlParams()).resolved()
    y = np.asarray(x, dtype=np.float64)
    n = y.shape[0]
    period = params.period
    if n < 2 * period:
        raise SeriesError(f"STL needs at least {2 * period} observations, got {n}")
    if not np.all(np.isfinite(y)):
        raise SeriesError("series contains non-finite values")
    trend = np.zeros(n)
    season = np.zeros(n)
    rw = None
    for outer in range(params.outer_iter):
        for _ in range(params.inner_iter):
            cycle = _cycle_subseries(y - trend, period, params.seasonal, params.seasonal_deg, rw)
            low = _moving_average(_moving_average(_moving_average(cycle, period), period), 3)
            low = _smooth(low, params.low_pass, params.low_pass_deg, None)
            season = cycle[period:period + n] - low
            trend = _smooth(y - season, params.trend, params.trend_deg, rw)
        if outer + 1 < params.outer_iter:
            rw = _robustness_weights(y - trend - season)
    return StlDecomposition(y, trend, season, y - trend - season, params, notes, rw)


# -- ADF ----------------------------------------------------------------------

# Response-surface coefficients for the constant-only Dickey-Fuller tau
# distribution with one unit root (MacKinnon 1994).
_TAU_MAX = 2.74
_TAU_MIN = -18.83
_TAU_STAR = -1.61
_TAU_SMALLP = (2.1659, 1.4412, 0.038269)
_TAU_LARGEP = (1.7339, 0.93202, -0.12745, -0.010368)


def _norm_cdf(z: float) -> float:
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


def adf_pvalue(stat: float) -> float:
    if stat > _TAU_MAX:
        return 1.0
    if stat < _TAU_MIN:
        return 0.0
    coef = _TAU_SMALLP if stat <= _TAU_STAR else _TAU_LARGEP
    return _norm_cdf(sum(c * stat**k for k, c in enumerate(coef)))


def adf_lag(nobs: int) -> int:
    return int(math.floor(12.0 * (nobs / 100.0) ** 0.25))


@dataclass(frozen=True)
class AdfResult:
    statistic: float
    p_value: float
    lags: int
    nobs: int

    def __iter__(self):
        return iter((self.statistic, self.p_value))


def adf_test(x: Sequence[float] | np.ndarray, lags: int | None = None) -> AdfResult:
    """Augmented Dickey-Fuller test with a constant and no trend."""
    y = np.asarray(x, dtype=np.float64)
    T = y.shape[0]
    if T < 30:
        raise SeriesError("ADF needs at least 30 observations")
    if np.ptp(y) == 0:
        raise SeriesError("ADF regression is degenerate for a constant series")
    p = adf_lag(T) if lags is None else int(lags)
    dy = np.diff(y)
    nobs = dy.shape[0] - p
    if nobs < p + 3:
        raise SeriesError("series too short for the ADF lag order")
    cols = [y[p:-1]]
    cols += [dy[p - k:-k] for k in range(1, p + 1)]
    X = np.column_stack(cols + [np.ones(nobs)])
    target = dy[p:]
    beta, *_ = np.linalg.lstsq(X, target, rcond=None)
    resid = target - X @ beta
    dof = nobs - X.shape[1]
    sigma2 = resid @ resid / dof
    xtx_inv = np.linalg.inv(X.T @ X)
    se = math.sqrt(sigma2 * xtx_inv[0, 0])
    if se == 0:
        raise SeriesError("ADF regression is degenerate")
    stat = float(beta[0] / se)
    return AdfResult(stat, adf_pvalue(stat), p, nobs)


# -- correlation ----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    labels: list[str]
    r: np.ndarray

    def __getitem__(self, pair: tuple[str, str]) -> float:
        a, b = pair
        return float(self.r[self.labels.index(a), self.labels.index(b)])


def cross_correlation(series: Mapping[str, Sequence[float] | np.ndarray]) -> CorrelationMatrix:
    """Zero-lag Pearson correlation between every pair of equal-length series."""
    labels = list(series)
    if not labels:
        return CorrelationMatrix([], np.zeros((0, 0)))
    data = [np.asarray(series[k], dtype=np.float64) for k in labels]
    n = data[0].shape[0]
    if any(d.shape != (n,) for d in data):
        raise SeriesError("all series must have the same length")
    z = []
    for label, d in zip(labels, data):
        c = d - d.mean()
        norm = math.sqrt(c @ c)
        if norm == 0:
            raise SeriesError(f"series {label!r} has zero variance")
        z.append(c / norm)
    Z = np.array(z)
    r = np.clip(Z @ Z.T, -1.0, 1.0)
    r = (r + r.T) / 2
    np.fill_diagonal(r, 1.0)
    return CorrelationMatrix(labels, r)


@dataclass(frozen=True)
class CorrelationGraph:
    nodes: list[str]
    edges: list[tuple[str, str, float]]
    r0: float

    def components(self) -> list[list[str]]:
        parent = {v: v for v in self.nodes}

        def find(v):
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            return v

        for a, b, _ in self.edges:
            parent[find(a)] = find(b)
        groups: dict[str, list[str]] = {}
        for v in self.nodes:
            groups.setdefault(find(v), []).append(v)
        return list(groups.values())


def threshold_graph(matrix: CorrelationMatrix, r0: float = 0.5) -> CorrelationGraph:
    labels = matrix.labels
    edges = [
        (labels[i], labels[j], float(matrix.r[i, j]))
        for i in range(len(labels))
        for j in range(i + 1, len(labels))
        if matrix.r[i, j] > r0
    ]
    return CorrelationGraph(list(labels), edges, r0)


# -- I/O ----------------------------------------------------------------------

def write_series(series: ActivitySeries, path: str | Path, metadata: Mapping[str, object] = ()) -> None:
    meta = {"label": series.label, "bin_width": series.bin_width, "t0": series.t0}
    meta.update(dict(metadata))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for k, v in meta.items():
            fh.write(f"# {k}: {v}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["bin_start_utc", "count"])
        for t, c in zip(series.bin_starts.tolist(), series.counts.tolist()):
            w.writerow([int(t) if float(t).is_integer() else t, c])


def read_series(path: str | Path) -> ActivitySeries:
    meta: dict[str, str] = {}
    rows = []
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    body = []
    for line in lines:
        if line.startswith("#"):
            key, _, value = line[1:].partition(":")
            meta[key.strip()] = value.strip()
        elif line.strip():
            body.append(line)
    reader = csv.reader(body)
    if next(reader, None) != ["bin_start_utc", "count"]:
        raise SeriesError(f"{path}: expected header bin_start_utc,count")
    for t, c in reader:
        rows.append((float(t), int(c)))
    starts = np.array([r[0] for r in rows], dtype=np.float64)
    counts = np.array([r[1] for r in rows], dtype=np.int64)
    width = int(meta.get("bin_width", DEFAULT_BIN))
    t0 = float(meta.get("t0", starts[0] if rows else 0.0))
    return ActivitySeries(meta.get("label", Path(path).stem), width, t0, counts,
                          np.zeros(len(rows), dtype=bool), starts)


def read_outages(path: str | Path) -> list[tuple[float, float]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"start_utc", "end_utc"} <= set(reader.fieldnames):
            raise SeriesError(f"{path}: expected header start_utc,end_utc")
        out = [(float(r["start_utc"]), float(r["end_utc"])) for r in reader]
    for lo, hi in out:
        if not lo < hi:
            raise SeriesError(f"{path}: empty outage interval [{lo}, {hi})")
    return out


def write_matrix(matrix: CorrelationMatrix, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([""] + matrix.labels)
        for label, row in zip(matrix.labels, matrix.r.tolist()):
            w.writerow([label] + [repr(v) for v in row])


def write_graph_dot(graph: CorrelationGraph, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"graph correlation {{\n  // edges where r > {graph.r0}\n")
        for v in graph.nodes:
            fh.write(f'  "{v}";\n')
        for a, b, r in graph.edges:
            fh.write(f'  "{a}" -- "{b}" [label="{r:.2f}", weight={r!r}];\n')
        fh.write("}\n")


def write_graph_edges(graph: CorrelationGraph, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["source", "target", "r"])
        for a, b, r in graph.edges:
            w.writerow([a, b, repr(r)])
