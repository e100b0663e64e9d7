"""Censoring-aware empirical-distribution machinery.

Capped hitting times produce right-censored batches: a censored trial says
only that its value exceeds the transformed cap.  The empirical CDF here
keeps censored mass in the denominator (so the CDF is honestly depressed
below the censor point) and refuses any comparison that would reach into the
censored region; renormalizing to hits only would bias every quantile of a
heavy-tailed law.

Also provides the log-log slope fit for the divergence-rate experiment,
using per-epsilon medians since the hitting times have infinite mean.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import StatisticalRefusal, ValidationError
from .walk_engine import SampleSet


def dkw_halfwidth(n: int, delta: float) -> float:
    """Distribution-free ECDF confidence half-width sqrt(ln(2/delta)/(2n))."""
    if n < 1:
        raise ValidationError("need at least one sample")
    if not 0.0 < delta < 1.0:
        raise ValidationError("delta must lie in (0, 1)")
    return math.sqrt(math.log(2.0 / delta) / (2.0 * n))


@dataclass
class EmpiricalCdf:
    """ECDF of transformed, non-excluded samples with a censor point.

    ``values`` holds the transformed hit samples, sorted; ``n`` counts all
    non-excluded trials (hits and censored), so evaluation below the censor
    point is unbiased; above it the ECDF is unknown.
    """

    values: np.ndarray
    n: int
    censor_point: float
    excluded_count: int

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        out = np.searchsorted(self.values, t, side="right") / self.n
        return float(out) if out.ndim == 0 else out


def build_ecdf(samples: SampleSet, transform: Callable[[np.ndarray], np.ndarray],
               probe_points: int = 64) -> EmpiricalCdf:
    """Empirical CDF of transform(hitting steps), honoring exclusion and censoring.

    Excluded trials (exact target hits) are dropped entirely, which realizes
    conditioning on the no-exact-hit event.  The transform must be strictly
    increasing on [1, cap]; it is validated on a log-spaced integer probe grid.
    """
    cap = samples.config.cap
    probe = np.unique(np.round(np.logspace(0.0, math.log10(cap), probe_points))
                      .astype(np.int64))
    probe_vals = np.asarray(transform(probe), dtype=float)
    if probe_vals.shape != probe.shape or not np.all(np.diff(probe_vals) > 0.0):
        raise ValidationError("transform must be strictly increasing on [1, cap]")
    keep = ~samples.excluded
    n = int(np.sum(keep))
    if n == 0:
        raise StatisticalRefusal("every trial was excluded; nothing to condition on")
    hits = keep & ~samples.censored
    values = np.sort(np.asarray(transform(samples.steps[hits]), dtype=float))
    censor_point = float(transform(np.asarray([cap], dtype=np.int64))[0])
    return EmpiricalCdf(values=values, n=n, censor_point=censor_point,
                        excluded_count=int(np.sum(samples.excluded)))


@dataclass(frozen=True)
class KsReport:
    """Truncated Kolmogorov-Smirnov comparison result."""

    ks: float
    t_max: float
    n_effective: int
    dkw: float
    delta: float

    def to_json(self) -> str:
        return json.dumps({"ks": self.ks, "t_max": self.t_max,
                           "n_effective": self.n_effective, "dkw": self.dkw,
                           "delta": self.delta})


def ks_truncated(ecdf: EmpiricalCdf, theory: Callable[[np.ndarray], np.ndarray],
                 t_max: float, delta: float = 1e-3) -> KsReport:
    """Sup of |ECDF - theory| over the ECDF's jump points up to t_max.

    t_max must stay strictly below the censor point: beyond it the empirical
    CDF is contaminated by censoring and the comparison would be meaningless.
    """
    if not t_max > 0.0:
        raise ValidationError("t_max must be positive")
    if t_max >= ecdf.censor_point:
        raise StatisticalRefusal(
            f"t_max {t_max:g} reaches the censor point {ecdf.censor_point:g}; "
            "censoring would contaminate the comparison")
    pts = ecdf.values[ecdf.values <= t_max]
    pts = np.concatenate([pts, [t_max]])
    diffs = np.abs(ecdf.evaluate(pts) - np.asarray(theory(pts), dtype=float))
    return KsReport(ks=float(np.max(diffs)), t_max=float(t_max),
                    n_effective=ecdf.n, dkw=dkw_halfwidth(ecdf.n, delta),
                    delta=delta)


@dataclass(frozen=True)
class SlopeReport:
    """Least-squares slope of median log hitting time against log epsilon."""

    slope: float
    stderr: float
    n_points: int
    n_censored: int

    def to_json(self) -> str:
        return json.dumps({"slope": self.slope, "stderr": self.stderr,
                           "n_points": self.n_points,
                           "n_censored": self.n_censored})


def loglog_slope(log_eps: np.ndarray, log_tau: np.ndarray,
                 censored: Optional[np.ndarray] = None) -> SlopeReport:
    """OLS fit of per-epsilon median log tau on log eps.

    Censored pairs are excluded from the fit (their log tau is only a lower
    bound) but counted in the report.  Medians rather than means: the
    hitting times have infinite mean in every shipped regime.
    """
    log_eps = np.asarray(log_eps, dtype=float)
    log_tau = np.asarray(log_tau, dtype=float)
    if censored is None:
        censored = np.zeros(log_eps.shape, dtype=bool)
    censored = np.asarray(censored, dtype=bool)
    if log_eps.shape != log_tau.shape or log_eps.shape != censored.shape:
        raise ValidationError("inputs must have identical shapes")
    if np.unique(log_eps).size < 2:
        raise ValidationError("need at least 2 distinct epsilon levels")
    n_censored = int(np.sum(censored))
    xs, ys = [], []
    for x in np.unique(log_eps):
        vals = log_tau[(log_eps == x) & ~censored]
        if vals.size:
            xs.append(x)
            ys.append(float(np.median(vals)))
    if len(xs) < 2:
        raise StatisticalRefusal("censoring left fewer than 2 epsilon levels to fit")
    xs = np.asarray(xs)
    ys = np.asarray(ys)
    xbar = xs.mean()
    sxx = float(np.sum((xs - xbar) ** 2))
    slope = float(np.sum((xs - xbar) * (ys - ys.mean())) / sxx)
    intercept = ys.mean() - slope * xbar
    rss = float(np.sum((ys - intercept - slope * xs) ** 2))
    dof = len(xs) - 2
    stderr = math.sqrt(rss / dof / sxx) if dof > 0 else 0.0
    return SlopeReport(slope=slope, stderr=stderr, n_points=len(xs),
                       n_censored=n_censored)
