"""Empirical-distribution machinery for the verification harness.

ECDF tables with structural censoring (the path length has infinite mean, so
a fraction of every batch is cut at the step horizon), one- and two-sample
Kolmogorov-Smirnov distances restricted to the fully observed range, DKW
confidence bands, chi-square goodness of fit with tail-bin merging, and the
rescaled tail/pmf ratios whose limits are 1/(4 sqrt pi) and 1/(2 sqrt pi).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

INV_4_SQRT_PI = 1.0 / (4.0 * math.sqrt(math.pi))   # 0.141047...
INV_2_SQRT_PI = 1.0 / (2.0 * math.sqrt(math.pi))   # 0.282095...


@dataclass
class EcdfTable:
    """Sorted uncensored values plus censoring bookkeeping.

    The ECDF F(x) = #{values <= x} / n_total is exact for x strictly below
    censor_threshold (all censored observations exceed the threshold by
    construction); evaluation above it raises.
    """

    values: np.ndarray
    n_total: int
    censor_count: int = 0
    censor_threshold: float = math.inf

    @classmethod
    def from_samples(cls, values, censored=None, threshold: float = math.inf) -> "EcdfTable":
        values = np.asarray(values, dtype=float)
        if censored is None:
            censored = np.zeros(values.shape, dtype=bool)
        censored = np.asarray(censored, dtype=bool)
        kept = np.sort(values[~censored])
        n_cens = int(censored.sum())
        if n_cens and not math.isfinite(threshold):
            raise ValueError("censored samples need a finite censor threshold")
        if kept.size and math.isfinite(threshold) and kept[-1] >= threshold:
            raise ValueError("uncensored value at or above the censor threshold")
        return cls(values=kept, n_total=int(values.size), censor_count=n_cens,
                   censor_threshold=threshold)

    @property
    def censor_rate(self) -> float:
        return self.censor_count / self.n_total if self.n_total else 0.0

    def eval(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if np.any(x >= self.censor_threshold):
            raise ValueError("ECDF queried at or above the censor threshold")
        return np.searchsorted(self.values, x, side="right") / self.n_total

    def merge(self, other: "EcdfTable") -> "EcdfTable":
        """Associative combination of two tables (parallel aggregation)."""
        thr = min(self.censor_threshold, other.censor_threshold)
        vals = np.concatenate([self.values, other.values])
        vals = np.sort(vals[vals < thr] if math.isfinite(thr) else vals)
        dropped = self.values.size + other.values.size - vals.size
        return EcdfTable(values=vals, n_total=self.n_total + other.n_total,
                         censor_count=self.censor_count + other.censor_count + dropped,
                         censor_threshold=thr)

    def to_csv(self) -> str:
        lines = ["# driftnet-schema v1", "x,ecdf"]
        for k, x in enumerate(self.values, start=1):
            lines.append(f"{x!r},{k / self.n_total!r}")
        return "\n".join(lines) + "\n"


@dataclass
class KsResult:
    statistic: float
    n_a: int
    n_b: int | None
    range: tuple[float, float]
    threshold: float
    censor_rate_a: float = 0.0
    censor_rate_b: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.statistic <= self.threshold

    def to_json(self) -> str:
        d = {"statistic": self.statistic, "n_a": self.n_a, "n_b": self.n_b,
             "range": list(self.range), "threshold": self.threshold,
             "passed": self.passed, "censor_rate_a": self.censor_rate_a,
             "censor_rate_b": self.censor_rate_b}
        d.update(self.extra)
        return json.dumps(d)


def dkw_epsilon(n: int, alpha: float = 0.01) -> float:
    """Half-width of the (1 - alpha) DKW band: sqrt(log(2/alpha) / (2n))."""
    if n < 1 or not 0.0 < alpha < 1.0:
        raise ValueError("need n >= 1 and alpha in (0,1)")
    return math.sqrt(math.log(2.0 / alpha) / (2.0 * n))


def ks_two_sample_critical(n_a: int, n_b: int, alpha: float = 0.01) -> float:
    c = math.sqrt(-0.5 * math.log(alpha / 2.0))
    return c * math.sqrt((n_a + n_b) / (n_a * n_b))


def ks_one_sample(ecdf: EcdfTable, cdf, lo: float, hi: float,
                  threshold: float | None = None) -> KsResult:
    """sup over sample points in [lo, hi] of |ECDF - cdf|, both one-sided
    gaps (at and just before each jump)."""
    hi = min(hi, np.nextafter(ecdf.censor_threshold, -math.inf))
    if hi <= lo:
        raise ValueError("empty evaluation range")
    n = ecdf.n_total
    xs = ecdf.values
    sel = (xs >= lo) & (xs <= hi)
    pts = xs[sel]
    if pts.size == 0:
        raise ValueError("no sample points in the evaluation range")
    idx = np.searchsorted(xs, pts, side="right")
    ref = np.asarray([cdf(x) for x in pts], dtype=float)
    d_hi = np.abs(idx / n - ref)
    d_lo = np.abs((idx - 1) / n - ref)
    # also compare at the range endpoints
    d_end = max(abs(float(ecdf.eval(lo)) - float(cdf(lo))),
                abs(float(ecdf.eval(hi)) - float(cdf(hi))))
    D = float(max(d_hi.max(), d_lo.max(), d_end))
    thr = dkw_epsilon(n) if threshold is None else threshold
    return KsResult(statistic=D, n_a=n, n_b=None, range=(lo, float(hi)),
                    threshold=thr, censor_rate_a=ecdf.censor_rate)


def ks_two_sample(a: EcdfTable, b: EcdfTable, lo: float = -math.inf,
                  hi: float = math.inf, threshold: float | None = None) -> KsResult:
    """sup-distance between the two ECDFs on the common uncensored range."""
    hi = min(hi, np.nextafter(min(a.censor_threshold, b.censor_threshold), -math.inf))
    if hi <= lo:
        raise ValueError("empty evaluation range")
    pts = np.concatenate([a.values, b.values])
    pts = np.unique(pts[(pts >= lo) & (pts <= hi)])
    if pts.size == 0:
        raise ValueError("no sample points in the evaluation range")
    D = float(np.abs(a.eval(pts) - b.eval(pts)).max())
    lo_eff = lo if math.isfinite(lo) else float(pts[0])
    thr = ks_two_sample_critical(a.n_total, b.n_total) if threshold is None else threshold
    return KsResult(statistic=D, n_a=a.n_total, n_b=b.n_total,
                    range=(lo_eff, float(hi)), threshold=thr,
                    censor_rate_a=a.censor_rate, censor_rate_b=b.censor_rate)


# ---------------------------------------------------------------------------
# chi-square goodness of fit
# ---------------------------------------------------------------------------


@dataclass
class ChiSquareResult:
    statistic: float
    dof: int
    n_bins: int
    p_value: float

    @property
    def passed(self) -> bool:
        return self.p_value > 0.01


def chi_square_gof(observed: np.ndarray, expected: np.ndarray,
                   min_expected: float = 5.0, ddof: int = 0) -> ChiSquareResult:
    """Pearson chi-square with greedy merging of adjacent low-expectation
    bins (from the tail inward) until every bin has expected >= min_expected."""
    from scipy.stats import chi2

    obs = [float(v) for v in observed]
    exp = [float(v) for v in expected]
    if len(obs) != len(exp) or len(obs) < 2:
        raise ValueError("need matching histograms with at least two bins")
    k = len(exp) - 1
    while k > 0:
        if exp[k] < min_expected:
            exp[k - 1] += exp[k]
            obs[k - 1] += obs[k]
            del exp[k], obs[k]
        k -= 1
    while len(exp) > 1 and exp[0] < min_expected:
        exp[1] += exp[0]
        obs[1] += obs[0]
        del exp[0], obs[0]
    if len(exp) < 2:
        raise ValueError("fewer than two bins after merging")
    o = np.array(obs)
    e = np.array(exp)
    stat = float(((o - e) ** 2 / e).sum())
    dof = len(e) - 1 - ddof
    return ChiSquareResult(statistic=stat, dof=dof, n_bins=len(e),
                           p_value=float(chi2.sf(stat, dof)))


# ---------------------------------------------------------------------------
# rescaled tail / pmf ratios
# ---------------------------------------------------------------------------


def tail_ratio(source, ell: int, f: float, kind: str = "tail") -> float:
    """Rescaled tail or pmf of the pure-lattice path-length law.

    kind="tail": sqrt(f)/ell * P(tau >= f)   -> 1/(4 sqrt pi) as f/ell^2 -> inf
    kind="pmf":  f^{3/2}/ell * P(tau = floor(f)) -> 1/(2 sqrt pi)

    source(ell, n) must return P(tau >= n) or P(tau = n) respectively.
    """
    n = int(math.floor(f))
    if kind == "tail":
        return math.sqrt(f) / ell * source(ell, n)
    if kind == "pmf":
        return f**1.5 / ell * source(ell, n)
    raise ValueError("kind must be 'tail' or 'pmf'")
