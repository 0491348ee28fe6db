#!/usr/bin/env python3
"""
Convergence-rate regression in log-log coordinates
"""

import logging
from collections import defaultdict
from dataclasses import dataclass
from dataclasses import replace

import numpy as np
from scipy import stats

from analysis.measures import Measure

logger = logging.getLogger(__name__)

MIN_FIT_POINTS = 3
DROP_LARGEST_GAIN = 0.05


@dataclass(frozen=True)
class RatePoint:
    delta: float
    error: float
    n_stop: int
    measure: Measure


@dataclass(frozen=True)
class RateFit:
    """log(error) ~ slope * log(delta) + intercept

    When the largest delta was dropped, ``full_fit`` keeps the fit over all points.
    """
    slope: float
    intercept: float
    r_squared: float
    n_points: int
    dropped_largest: bool = False
    full_fit: 'RateFit | None' = None


def _usable(points) -> list[RatePoint]:
    kept = []
    for point in points:
        if not point.delta > 0:
            raise ValueError(f"Rate points need delta > 0, got {point.delta}")
        if point.error > 0 and np.isfinite(point.error):
            kept.append(point)
        else:
            logger.warning(f"Excluding rate point delta={point.delta:.3e} with error {point.error}")
    return kept


def fit_rate(points) -> RateFit:
    """Least-squares line through (log delta, log error)

    Points with a nonpositive or non-finite error are excluded with a warning.

    Raises:
        ValueError: if fewer than three usable points remain or all deltas coincide
    """
    kept = _usable(points)
    if len(kept) < MIN_FIT_POINTS:
        raise ValueError(f"Rate fit needs at least {MIN_FIT_POINTS} positive points, got {len(kept)}")
    log_delta = np.log([p.delta for p in kept])
    log_error = np.log([p.error for p in kept])
    if np.ptp(log_delta) == 0:
        raise ValueError("Rate fit needs at least two distinct noise levels")
    result = stats.linregress(log_delta, log_error)
    return RateFit(slope=float(result.slope), intercept=float(result.intercept),
                   r_squared=float(result.rvalue ** 2), n_points=len(kept))


def fit_rate_study(points) -> RateFit:
    """fit_rate, refitted without the largest delta when that raises R^2 by more than 0.05

    Asymptotic rates only show for small noise, so the largest delta may sit in
    the pre-asymptotic regime.
    """
    kept = _usable(points)
    full = fit_rate(kept)
    if len(kept) <= MIN_FIT_POINTS:
        return full
    largest = max(p.delta for p in kept)
    reduced_points = [p for p in kept if p.delta != largest]
    if len(reduced_points) < MIN_FIT_POINTS:
        return full
    reduced = fit_rate(reduced_points)
    if reduced.r_squared > full.r_squared + DROP_LARGEST_GAIN:
        logger.info(f"Dropping delta={largest:.3e} from the rate fit (R^2 {full.r_squared:.3f} -> "
                    f"{reduced.r_squared:.3f})")
        return replace(reduced, dropped_largest=True, full_fit=full)
    return full


def median_points(points) -> list[RatePoint]:
    """Collapse repeated seeds to the median error and median n_stop per (measure, delta)"""
    groups = defaultdict(list)
    for point in points:
        groups[(Measure(point.measure), point.delta)].append(point)
    merged = []
    for (measure, delta), group in sorted(groups.items(), key=lambda item: (item[0][0].value, -item[0][1])):
        merged.append(RatePoint(
            delta=delta,
            error=float(np.median([p.error for p in group])),
            n_stop=int(np.median([p.n_stop for p in group])),
            measure=measure,
        ))
    return merged


def loglog_slope(x, y) -> float:
    """Slope of log(y) against log(x), used for eta decay and iteration counts"""
    result = stats.linregress(np.log(np.asarray(x, dtype=float)), np.log(np.asarray(y, dtype=float)))
    return float(result.slope)
