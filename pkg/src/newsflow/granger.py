"""Bivariate Granger-causality F tests with information-criterion lag choice."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


class DegenerateRegressionError(ValueError):
    pass


# -- F distribution tail ---------------------------------------------------

_EPS = 1e-16
_TINY = 1e-300


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the regularized incomplete beta (modified Lentz)."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    max_iter = 10_000 + int(20 * math.sqrt(max(a, b)))
    for m in range(1, max_iter):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def _stirling_corr(x: float) -> float:
    """lgamma(x) minus its Stirling approximation."""
    if x < 15.0:
        return math.lgamma(x) - ((x - 0.5) * math.log(x) - x + _HALF_LOG_2PI)
    z = 1.0 / (x * x)
    return (1.0 / 12 - z * (1.0 / 360 - z * (1.0 / 1260 - z * (1.0 / 1680 - z / 1188)))) / x


def _lbeta(a: float, b: float) -> float:
    # the naive lgamma sum loses ~1e-11 to cancellation for large arguments
    if a < b:
        a, b = b, a
    if b < 15.0 and a < 15.0:
        return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)
    return (
        _HALF_LOG_2PI
        - (a - 0.5) * math.log1p(b / a)
        + (b - 0.5) * math.log(b)
        - b * math.log(a + b)
        + _stirling_corr(a) + _stirling_corr(b) - _stirling_corr(a + b)
    )


def betainc(a: float, b: float, x: float, xc: float | None = None) -> float:
    """Regularized incomplete beta I_x(a, b).

    ``xc`` may pass ``1 - x`` computed without cancellation.
    """
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if xc is None:
        xc = 1.0 - x
    if x <= 0.0:
        return 0.0
    if xc <= 0.0:
        return 1.0
    log_front = a * math.log(x) + b * math.log(xc) - _lbeta(a, b)
    if x < (a + 1.0) / (a + b + 2.0):
        return math.exp(log_front) * _betacf(a, b, x) / a
    return 1.0 - math.exp(log_front) * _betacf(b, a, xc) / b


def f_sf(f: float, d1: float, d2: float) -> float:
    """Upper tail P(F > f) of the F(d1, d2) distribution."""
    if f <= 0:
        return 1.0
    if math.isinf(f):
        return 0.0
    denom = d2 + d1 * f
    return betainc(d2 / 2.0, d1 / 2.0, d2 / denom, d1 * f / denom)


# -- regressions -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class VarFit:
    intercept: float
    a: np.ndarray  # own-lag coefficients a_1..a_m
    b: np.ndarray  # cross-lag coefficients b_1..b_l (empty when restricted)
    residuals: np.ndarray
    ssr: float
    t_effective: int
    n_params: int

    @property
    def residual_variance(self) -> float:
        return self.ssr / (self.t_effective - self.n_params)

    @property
    def residual_mean(self) -> float:
        return float(self.residuals.mean())


def _lags(z: np.ndarray, start: int, count: int) -> list[np.ndarray]:
    T = z.shape[0]
    return [z[start - j:T - j] for j in range(1, count + 1)]


def _ols(target: np.ndarray, cols: list[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    X = np.column_stack([np.ones(target.shape[0])] + cols)
    if X.shape[0] <= X.shape[1]:
        raise DegenerateRegressionError("not enough observations for the regression")
    Q, R = np.linalg.qr(X)
    diag = np.abs(np.diag(R))
    if diag.min() <= 1e-10 * diag.max():
        raise DegenerateRegressionError("design matrix is rank deficient")
    beta = np.linalg.solve(R, Q.T @ target)
    return beta, target - X @ beta


def _fit(x, y, m, l, start):
    x = np.asarray(x, dtype=np.float64)
    cols = _lags(x, start, m)
    if l:
        cols += _lags(np.asarray(y, dtype=np.float64), start, l)
    target = x[start:]
    beta, resid = _ols(target, cols)
    return VarFit(
        intercept=float(beta[0]),
        a=beta[1:1 + m],
        b=beta[1 + m:],
        residuals=resid,
        ssr=float(resid @ resid),
        t_effective=target.shape[0],
        n_params=beta.shape[0],
    )


def fit_restricted(x: Sequence[float] | np.ndarray, m: int, start: int | None = None) -> VarFit:
    """OLS of x_t on an intercept and its own lags 1..m."""
    x = np.asarray(x, dtype=np.float64)
    if m < 0:
        raise ValueError("lag count must be non-negative")
    if x.shape[0] <= m + 2:
        raise DegenerateRegressionError("series too short for the lag order")
    return _fit(x, None, m, 0, m if start is None else start)


def fit_unrestricted(x, y, m: int, l: int, start: int | None = None) -> VarFit:
    """OLS of x_t on an intercept, lags 1..m of x and lags 1..l of y."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError("x and y must have the same length")
    if m < 0 or l < 0:
        raise ValueError("lag counts must be non-negative")
    if x.shape[0] <= max(m, l) + 2:
        raise DegenerateRegressionError("series too short for the lag order")
    return _fit(x, y, m, l, max(m, l) if start is None else start)


CRITERIA = ("AIC", "BIC", "HQC")


def information_criteria(x, y, max_lag: int) -> dict[str, np.ndarray]:
    """AIC/BIC/HQC of bivariate VAR(p), p = 1..max_lag, on a shared sample."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if max_lag < 1:
        raise ValueError("max_lag must be >= 1")
    if x.shape != y.shape:
        raise ValueError("x and y must have the same length")
    if max_lag >= x.shape[0] / 4:
        raise ValueError("max_lag must be below T/4")
    T = x.shape[0] - max_lag
    out = {c: np.empty(max_lag) for c in CRITERIA}
    for p in range(1, max_lag + 1):
        rx = _fit(x, y, p, p, max_lag).residuals
        ry = _fit(y, x, p, p, max_lag).residuals
        cov = np.cov(np.vstack([rx, ry]), bias=True)
        sign, logdet = np.linalg.slogdet(cov)
        if sign <= 0:
            raise DegenerateRegressionError("singular residual covariance")
        k = 4 * p  # lag coefficients across both equations
        out["AIC"][p - 1] = logdet + 2.0 * k / T
        out["BIC"][p - 1] = logdet + math.log(T) * k / T
        out["HQC"][p - 1] = logdet + 2.0 * math.log(math.log(T)) * k / T
    return out


def select_lag(x, y, criterion: str = "BIC", max_lag: int = 48) -> int:
    criterion = criterion.upper()
    if criterion not in CRITERIA:
        raise ValueError(f"criterion must be one of {CRITERIA}")
    values = information_criteria(x, y, max_lag)[criterion]
    return int(np.argmin(values)) + 1  # argmin returns the first, i.e. smallest, lag on ties


@dataclass(frozen=True)
class GrangerResult:
    cause: str
    effect: str
    lag: int
    f_stat: float
    p_value: float
    ssr_restricted: float
    ssr_unrestricted: float
    df_num: int
    df_den: int


def granger_test(x, y, lag: int, effect: str = "x", cause: str = "y") -> GrangerResult:
    """F test of "y Granger-causes x" with ``lag`` lags of both series."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError("x and y must have the same length")
    if lag < 1:
        raise ValueError("lag must be >= 1")
    if x.shape[0] <= 3 * lag:
        raise ValueError("series must be longer than 3 * lag")
    restricted = fit_restricted(x, lag)
    unrestricted = fit_unrestricted(x, y, lag, lag)
    df_den = unrestricted.t_effective - 2 * lag - 1
    ssr_r = restricted.ssr
    ssr_u = min(unrestricted.ssr, ssr_r)
    if ssr_u <= 0:
        raise DegenerateRegressionError("perfect fit; F statistic undefined")
    f_stat = max(((ssr_r - ssr_u) / lag) / (ssr_u / df_den), 0.0)
    return GrangerResult(cause, effect, lag, f_stat, f_sf(f_stat, lag, df_den),
                         ssr_r, unrestricted.ssr, lag, df_den)


@dataclass(frozen=True)
class CausalityGraph:
    edges: list[tuple[str, str, float, float]]  # cause, effect, strength, p
    p0: float


def causality_graph(results: Iterable[GrangerResult], p0: float = 1e-7) -> CausalityGraph:
    """Edges cause -> effect for p < p0, weighted by log10(p0 / p)."""
    if not 0 < p0 < 1:
        raise ValueError("p0 must lie in (0, 1)")
    edges = []
    for r in results:
        if r.p_value < p0:
            s = math.inf if r.p_value == 0 else math.log10(p0 / r.p_value)
            edges.append((r.cause, r.effect, s, r.p_value))
    return CausalityGraph(edges, p0)


def write_results(results: Iterable[GrangerResult], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["cause", "effect", "lag", "F", "p_value"])
        for r in results:
            w.writerow([r.cause, r.effect, r.lag, repr(r.f_stat), repr(r.p_value)])


def write_causality_dot(graph: CausalityGraph, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"digraph granger {{\n  // edges where p < {graph.p0!r}; penwidth = log10(p0/p)\n")
        for cause, effect, s, p in graph.edges:
            fh.write(f'  "{cause}" -> "{effect}" [penwidth={s!r}, label="p={p:.2e}"];\n')
        fh.write("}\n")
