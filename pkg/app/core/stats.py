"""
Summary statistics and the Welch two-sample t-test for replication outputs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats  # type: ignore[import]

from .errors import DataError


@dataclass(frozen=True)
class WelchResult:
    t: float
    df: float
    p_value: float

    def significant(self, alpha: float = 0.05) -> bool:
        return self.p_value < alpha


@dataclass(frozen=True)
class Summary:
    n: int
    mean: float
    sd: float
    ci_half_width: float  # 95% t-based; NaN below two observations

    @property
    def ci(self) -> tuple[float, float]:
        return self.mean - self.ci_half_width, self.mean + self.ci_half_width


def _finite(values: Sequence[float]) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    return arr[np.isfinite(arr)]


def summarize(values: Sequence[float], confidence: float = 0.95) -> Summary:
    """Mean, sample SD and CI half-width of the finite entries of `values`."""
    x = _finite(values)
    n = len(x)
    if n == 0:
        return Summary(n=0, mean=math.nan, sd=math.nan, ci_half_width=math.nan)
    if n == 1:
        return Summary(n=1, mean=float(x[0]), sd=0.0, ci_half_width=math.nan)
    sd = float(x.std(ddof=1))
    q = float(stats.t.ppf(0.5 + confidence / 2.0, n - 1))
    return Summary(n=n, mean=float(x.mean()), sd=sd, ci_half_width=q * sd / math.sqrt(n))


def welch_t(a: Sequence[float], b: Sequence[float]) -> WelchResult:
    """
    Two-sided Welch test of mean(a) == mean(b), Satterthwaite degrees of freedom.

    When both samples have zero variance the statistic is 0 (p = 1) for equal
    means and +/-inf (p = 0) otherwise, with df = na + nb - 2.
    """
    xa, xb = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    na, nb = len(xa), len(xb)
    if na < 2 or nb < 2:
        raise DataError(f"Welch test needs at least two observations per sample, got {na} and {nb}")
    ma, mb = float(xa.mean()), float(xb.mean())
    va, vb = float(xa.var(ddof=1)), float(xb.var(ddof=1))
    sa, sb = va / na, vb / nb
    se2 = sa + sb
    if se2 == 0.0:
        df = float(na + nb - 2)
        if ma == mb:
            return WelchResult(t=0.0, df=df, p_value=1.0)
        return WelchResult(t=math.copysign(math.inf, ma - mb), df=df, p_value=0.0)
    t = (ma - mb) / math.sqrt(se2)
    df = se2**2 / (sa**2 / (na - 1) + sb**2 / (nb - 1))
    p = float(min(1.0, 2.0 * stats.t.sf(abs(t), df)))
    return WelchResult(t=float(t), df=float(df), p_value=p)


def pct_change(baseline: float, variant: float) -> float:
    """100 * (variant - baseline) / baseline; NaN for a zero or non-finite baseline."""
    if baseline == 0 or not math.isfinite(baseline) or not math.isfinite(variant):
        return math.nan
    return 100.0 * (variant - baseline) / baseline
