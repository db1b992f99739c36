"""Sample-size diagnostics: exact two-sample KS statistics, autocorrelation
decay, inverse-square-root curve fits, quantile prediction intervals, and the
composite criterion that recommends how long chains must run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Mapping, Sequence

import numpy as np


class NonDecayingError(RuntimeError):
    """Autocorrelation never reached the threshold within half the series length."""


@dataclass(frozen=True)
class Ecdf:
    """Empirical CDF of a sample: F(x) = fraction of sample values <= x."""

    values: np.ndarray

    @classmethod
    def of(cls, sample: Sequence[float]) -> "Ecdf":
        arr = np.sort(np.asarray(sample, dtype=np.float64))
        if arr.size == 0:
            raise ValueError("ECDF of an empty sample is undefined")
        return cls(values=arr)

    def __call__(self, x) -> np.ndarray | float:
        frac = np.searchsorted(self.values, x, side="right") / self.values.size
        return float(frac) if np.isscalar(x) else frac


def ks_two_sample(s1: Sequence[float], s2: Sequence[float]) -> float:
    """Exact two-sample KS statistic: sup_x |F1(x) - F2(x)|.

    Computed by evaluating both ECDFs over the union of sample points, so it
    is exact for discrete-valued samples (e.g. seat counts) as well.
    """
    a = np.sort(np.asarray(s1, dtype=np.float64))
    b = np.sort(np.asarray(s2, dtype=np.float64))
    if a.size == 0 or b.size == 0:
        raise ValueError("KS statistic of an empty sample is undefined")
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / a.size
    fb = np.searchsorted(b, grid, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def pairwise_ks(ensembles: Sequence[Sequence[float]], n: int) -> list[float]:
    """KS statistic over the first n entries of every ensemble pair (C(m,2) values)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    arrays = [np.asarray(e, dtype=np.float64) for e in ensembles]
    for i, arr in enumerate(arrays):
        if arr.size < n:
            raise ValueError(f"ensemble {i} has length {arr.size} < n={n}")
    return [ks_two_sample(a[:n], b[:n]) for a, b in combinations(arrays, 2)]


def autocorrelation(series: Sequence[float], lag: int) -> float:
    """Sample autocorrelation at the given lag.

    Mean-centered; the lag-L cross term is averaged over its n-L products and
    normalized by the lag-0 autocovariance (averaged over n), so a perfectly
    alternating series has lag-1 autocorrelation exactly -1.
    """
    x = np.asarray(series, dtype=np.float64)
    n = x.size
    if lag < 0:
        raise ValueError("lag must be >= 0")
    if n <= lag:
        raise ValueError(f"series length {n} must exceed lag {lag}")
    centered = x - x.mean()
    denom = float(centered @ centered) / n
    if denom == 0:
        raise ValueError("autocorrelation undefined for a zero-variance series")
    if lag == 0:
        return 1.0
    num = float(centered[: n - lag] @ centered[lag:]) / (n - lag)
    return num / denom


def decay_lag(series: Sequence[float], threshold: float = 0.01) -> int:
    """Smallest lag L >= 1 whose autocorrelation is <= threshold."""
    x = np.asarray(series, dtype=np.float64)
    max_lag = x.size // 2
    for lag in range(1, max_lag + 1):
        if autocorrelation(x, lag) <= threshold:
            return lag
    raise NonDecayingError(
        f"autocorrelation stayed above {threshold} for all lags up to {max_lag}"
    )


@dataclass(frozen=True)
class KsFit:
    """Least-squares fit of y = coefficient / sqrt(n) through (n, y) points."""

    coefficient: float
    r_squared: float
    points: tuple[tuple[float, float], ...]


def fit_inverse_sqrt(points: Sequence[tuple[float, float]]) -> KsFit:
    """Closed-form least squares for y = a / sqrt(n)."""
    pts = [(float(n), float(y)) for n, y in points]
    if len({n for n, _ in pts}) < 2:
        raise ValueError("fit requires at least 2 points with distinct n")
    x = np.array([n ** -0.5 for n, _ in pts])
    y = np.array([v for _, v in pts])
    a = float((y @ x) / (x @ x))
    residual = y - a * x
    ss_res = float(residual @ residual)
    centered = y - y.mean()
    ss_tot = float(centered @ centered)
    if ss_tot == 0:
        r_squared = 1.0 if ss_res == 0 else -math.inf
    else:
        r_squared = 1.0 - ss_res / ss_tot
    return KsFit(coefficient=a, r_squared=r_squared, points=tuple(pts))


def required_sample_size(a: float, target: float = 0.01) -> int:
    """Smallest integer n with a / sqrt(n) <= target (at least 1)."""
    if target <= 0:
        raise ValueError("target must be positive")
    if a <= 0:
        return 1
    n = max(1, math.ceil((a / target) ** 2))
    while a / math.sqrt(n) > target:
        n += 1
    while n > 1 and a / math.sqrt(n - 1) <= target:
        n -= 1
    return n


def quantile(values: Sequence[float], q: float) -> float:
    """Empirical quantile with linear interpolation between order statistics."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("quantile of an empty sample is undefined")
    if not 0 <= q <= 1:
        raise ValueError("q must lie in [0, 1]")
    return float(np.quantile(arr, q, method="linear"))


def prediction_interval(
    points_by_n: Mapping[int, Sequence[float]], q_lo: float = 0.05, q_hi: float = 0.95
) -> tuple[KsFit, KsFit]:
    """Fit b/sqrt(n) and c/sqrt(n) through the per-n sample quantiles of D."""
    lo_points = [(n, quantile(ds, q_lo)) for n, ds in sorted(points_by_n.items())]
    hi_points = [(n, quantile(ds, q_hi)) for n, ds in sorted(points_by_n.items())]
    return fit_inverse_sqrt(lo_points), fit_inverse_sqrt(hi_points)


def default_grid(length: int, count: int = 47, span: int = 20) -> list[int]:
    """Evaluation grid from length/span up to length, mirroring a 47-point sweep."""
    if length < 2:
        raise ValueError("series too short for a diagnostic grid")
    lo = max(2, length // span)
    values = np.unique(np.linspace(lo, length, num=min(count, length - lo + 1)).round().astype(int))
    return [int(v) for v in values]


@dataclass(frozen=True)
class MeasureDiagnostics:
    measure: str
    mean_fit: KsFit
    lo_fit: KsFit
    hi_fit: KsFit
    required_n_ks: int
    decay_lags: tuple[int, ...]
    decay_lag: int
    required_n_autocorr: int
    d_values: Mapping[int, tuple[float, ...]] = field(repr=False, default_factory=dict)

    @property
    def required_n(self) -> int:
        return max(self.required_n_ks, self.required_n_autocorr)


@dataclass(frozen=True)
class SampleSizeReport:
    per_measure: Mapping[str, MeasureDiagnostics]
    recommended_n: int
    target: float
    grid: tuple[int, ...]

    def to_dict(self) -> dict:
        return {
            "format_version": 1,
            "target": self.target,
            "grid": list(self.grid),
            "recommended_n": self.recommended_n,
            "per_measure": {
                name: {
                    "a": m.mean_fit.coefficient,
                    "b": m.lo_fit.coefficient,
                    "c": m.hi_fit.coefficient,
                    "r_squared_mean": m.mean_fit.r_squared,
                    "r_squared_lo": m.lo_fit.r_squared,
                    "r_squared_hi": m.hi_fit.r_squared,
                    "required_n_ks": m.required_n_ks,
                    "decay_lag_per_chain": list(m.decay_lags),
                    "decay_lag": m.decay_lag,
                    "required_n_autocorr": m.required_n_autocorr,
                    "required_n": m.required_n,
                }
                for name, m in self.per_measure.items()
            },
        }


def sample_size_report(
    series_by_measure: Mapping[str, Sequence[Sequence[float]]],
    grid: Sequence[int] | None = None,
    target: float = 0.01,
    autocorr_threshold: float = 0.01,
    autocorr_factor: int = 1000,
    q_lo: float = 0.05,
    q_hi: float = 0.95,
) -> SampleSizeReport:
    """Composite sample-size criterion over several measures and chains.

    For each measure: pairwise KS statistics across chains at each grid n are
    fitted to a/sqrt(n), giving the n needed for an expected D at or below the
    target; the slowest per-chain autocorrelation decay lag is multiplied by
    autocorr_factor. The recommendation is the maximum over all measures and
    both criteria.
    """
    if not series_by_measure:
        raise ValueError("no measures supplied")
    for name, chains in series_by_measure.items():
        if len(chains) < 2:
            raise ValueError(f"measure '{name}': at least 2 chains are required for KS")
    length = min(len(c) for chains in series_by_measure.values() for c in chains)
    usable = [n for n in (grid if grid is not None else default_grid(length)) if n <= length]
    if len(set(usable)) < 2:
        raise ValueError("grid must contain >= 2 usable n values")
    grid_used = tuple(dict.fromkeys(usable))

    per_measure: dict[str, MeasureDiagnostics] = {}
    for name, chains in series_by_measure.items():
        d_values = {n: tuple(pairwise_ks(chains, n)) for n in grid_used}
        mean_points = [(n, float(np.mean(ds))) for n, ds in d_values.items()]
        mean_fit = fit_inverse_sqrt(mean_points)
        lo_fit, hi_fit = prediction_interval(d_values, q_lo=q_lo, q_hi=q_hi)
        required_ks = required_sample_size(mean_fit.coefficient, target)
        lags = tuple(decay_lag(c, autocorr_threshold) for c in chains)
        worst = max(lags)
        per_measure[name] = MeasureDiagnostics(
            measure=name,
            mean_fit=mean_fit,
            lo_fit=lo_fit,
            hi_fit=hi_fit,
            required_n_ks=required_ks,
            decay_lags=lags,
            decay_lag=worst,
            required_n_autocorr=autocorr_factor * worst,
            d_values=d_values,
        )
    recommended = max(m.required_n for m in per_measure.values())
    return SampleSizeReport(
        per_measure=per_measure, recommended_n=recommended, target=target, grid=grid_used
    )


@dataclass(frozen=True)
class ExtremeRankReport:
    """Tail position of an enacted plan's ranked shares within an ensemble."""

    per_rank_below: tuple[float, ...]
    tail_q: float
    joint_probability: float


def extreme_rank_stats(
    ensemble: np.ndarray, enacted: Sequence[float]
) -> ExtremeRankReport:
    """How extreme the enacted ranked shares are relative to the ensemble.

    per_rank_below[r] is the fraction of ensemble plans whose rank-r share is
    strictly below the enacted rank-r share. tail_q is the enacted plan's most
    extreme per-rank tail fraction (bottom or top); the joint probability is
    the fraction of ensemble plans with at least one rank at least that deep
    in its own marginal's bottom or top tail.
    """
    matrix = np.asarray(ensemble, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] == 0:
        raise ValueError("ensemble must be a nonempty (plans x ranks) matrix")
    n, k = matrix.shape
    enacted_arr = np.asarray(enacted, dtype=np.float64)
    if enacted_arr.shape != (k,):
        raise ValueError(f"enacted shares must have length {k}")

    sorted_cols = np.sort(matrix, axis=0)
    below = np.empty(k)
    above = np.empty(k)
    plan_extremity = np.full(n, np.inf)
    for r in range(k):
        col = sorted_cols[:, r]
        below[r] = np.searchsorted(col, enacted_arr[r], side="left") / n
        above[r] = (n - np.searchsorted(col, enacted_arr[r], side="right")) / n
        plan_below = np.searchsorted(col, matrix[:, r], side="left") / n
        plan_above = (n - np.searchsorted(col, matrix[:, r], side="right")) / n
        plan_extremity = np.minimum(plan_extremity, np.minimum(plan_below, plan_above))
    tail_q = float(np.min(np.minimum(below, above)))
    joint = float(np.mean(plan_extremity <= tail_q))
    return ExtremeRankReport(
        per_rank_below=tuple(float(b) for b in below),
        tail_q=tail_q,
        joint_probability=joint,
    )


def rank_percentiles(ensemble: np.ndarray, rank: int) -> dict[str, float]:
    """Box-plot statistics (p1, p25, p50, p75, p99) for one rank column."""
    matrix = np.asarray(ensemble, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] == 0:
        raise ValueError("ensemble must be a nonempty (plans x ranks) matrix")
    if not 0 <= rank < matrix.shape[1]:
        raise ValueError(f"rank {rank} outside [0, {matrix.shape[1]})")
    col = matrix[:, rank]
    return {
        "p1": quantile(col, 0.01),
        "p25": quantile(col, 0.25),
        "p50": quantile(col, 0.50),
        "p75": quantile(col, 0.75),
        "p99": quantile(col, 0.99),
    }


def cross_chain_mean_se(chains: Sequence[Sequence[float]]) -> tuple[float, float]:
    """Mean of per-chain means and its standard error across chains."""
    if len(chains) < 2:
        raise ValueError("standard error across chains requires >= 2 chains")
    means = np.array([np.mean(np.asarray(c, dtype=np.float64)) for c in chains])
    return float(means.mean()), float(means.std(ddof=1) / math.sqrt(means.size))
