"""Finite-scale fiber pressure, pressure curves, Legendre conjugation and
level-set counting rates.

All rate estimators extract least-squares slopes of log-quantities over an
n-range; the O(1) intercept cancels instead of polluting (log Z_n)/n at a
single n.  The delta and eps refinements are *not* extrapolated to zero:
the smallest tested values are reported together with trend diagnostics.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .counting import (CountTable, Restriction, SeparatedSet, cylinder_counts,
                       max_separated_set, DEFAULT_BUDGET)
from .drivers import BasePoint
from .errors import BudgetExceeded
from .observables import Observable, birkhoff_sums
from .systems import SkewSystem


def _fit_slope(ns, ys):
    """Least-squares slope with its standard error."""
    ns = np.asarray(ns, dtype=float)
    ys = np.asarray(ys, dtype=float)
    k = len(ns)
    A = np.stack([ns, np.ones(k)], axis=1)
    coef, *_ = np.linalg.lstsq(A, ys, rcond=None)
    slope, intercept = coef
    if k > 2:
        resid = ys - A @ coef
        sigma2 = float(resid @ resid) / (k - 2)
        denom = float(np.sum((ns - ns.mean()) ** 2))
        se = math.sqrt(sigma2 / denom) if denom > 0 else 0.0
    else:
        se = 0.0
    return float(slope), se


def _sample_omegas(sys, count, seed):
    rng = np.random.default_rng(seed)
    if sys.driving.kind == "point":
        return [sys.driving.point() for _ in range(count)]
    return [sys.driving.point(a) for a in rng.random(count)]


def partition_sum(sys: SkewSystem, phi: Observable, w: BasePoint,
                  Q: SeparatedSet, n: int) -> float:
    """Z_n(w, phi, Q) = sum over Q of exp(S_n phi)."""
    if Q.cardinality == 0:
        return 0.0
    if phi.is_constant:
        return Q.cardinality * math.exp(n * phi.constant_value)
    sums = birkhoff_sums(sys, phi, w, Q.points, n)
    return float(np.sum(np.exp(sums)))


def _log_partition_sum(sums, q=1.0):
    """log of sum(exp(q * sums)), max-shifted for overflow safety."""
    vals = q * np.asarray(sums, dtype=float)
    m = float(np.max(vals))
    return m + math.log(float(np.sum(np.exp(vals - m))))


@dataclass(frozen=True)
class PressureEstimate:
    slope: float
    stderr: float
    per_omega: tuple
    lemma_consistency: float       # max spread of per-omega slopes (a.s. constancy check)
    eps: float
    n_range: tuple
    method: str


@dataclass(frozen=True)
class PressureCurve:
    """Sampled pressure function q -> pi(q phi), with fit diagnostics."""

    q: np.ndarray
    pressure: np.ndarray
    stderr: np.ndarray
    eps: float
    n_min: int
    n_max: int
    convexity_defect: float

    def to_csv(self) -> str:
        lines = ["q,pressure,stderr,n_min,n_max,epsilon"]
        for i in range(len(self.q)):
            lines.append(f"{float(self.q[i])!r},{float(self.pressure[i])!r},"
                         f"{float(self.stderr[i])!r},"
                         f"{self.n_min},{self.n_max},{float(self.eps)!r}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class SpectrumCurve:
    """Spectrum estimates over alpha, from the Legendre transform and
    (optionally) from level-set counting."""

    alpha: np.ndarray
    legendre: np.ndarray
    boundary_flag: np.ndarray          # True: argmin at a q-grid endpoint
    concavity_defect: float
    counting_rate: Optional[np.ndarray] = None
    outside_flag: Optional[np.ndarray] = None
    observed_interval: Optional[tuple] = None

    def to_csv(self) -> str:
        lines = ["alpha,legendre,counting_rate,flag"]
        for i in range(len(self.alpha)):
            rate = "" if self.counting_rate is None else repr(float(self.counting_rate[i]))
            flags = []
            if self.boundary_flag[i]:
                flags.append("boundary")
            if self.outside_flag is not None and self.outside_flag[i]:
                flags.append("outside")
            lines.append(f"{float(self.alpha[i])!r},{float(self.legendre[i])!r},{rate},"
                         f"{'+'.join(flags)}")
        return "\n".join(lines) + "\n"


def _convexity_defect(xs, ys, sign=1.0):
    """Max violation of (sign=+1) convexity / (sign=-1) concavity vs chords."""
    defect = 0.0
    for i in range(1, len(xs) - 1):
        t = (xs[i] - xs[i - 1]) / (xs[i + 1] - xs[i - 1])
        chord = (1 - t) * ys[i - 1] + t * ys[i + 1]
        defect = max(defect, sign * (ys[i] - chord))
    return defect


class _SumCache:
    """Per-(omega, n) separated sets and Birkhoff sums, shared across q."""

    def __init__(self, sys, phi, eps, n_range, method, budget, grid_resolution):
        self.sys = sys
        self.phi = phi
        self.eps = eps
        self.n_range = list(n_range)
        self.method = method
        self.budget = budget
        self.grid_resolution = grid_resolution
        self._store = {}

    def sums(self, w, n):
        key = (w.anchor, w.shift, n)
        if key not in self._store:
            Q = max_separated_set(self.sys, w, n, self.eps, method=self.method,
                                  budget=self.budget,
                                  grid_resolution=self.grid_resolution)
            if self.phi.is_constant:
                s = np.full(max(Q.cardinality, 1), n * self.phi.constant_value)
                if Q.cardinality == 0:
                    s = s[:0]
            else:
                predicted = Q.cardinality * n
                if predicted > self.budget:
                    raise BudgetExceeded(predicted, self.budget)
                s = birkhoff_sums(self.sys, self.phi, w, Q.points, n)
            self._store[key] = (Q, s)
        return self._store[key]


def pressure_estimate(sys: SkewSystem, phi: Observable, eps: float, n_range,
                      omega_samples: int = 1, seed: int = 0,
                      method: str = "auto", budget: int = DEFAULT_BUDGET,
                      grid_resolution=None, _cache=None, _q=1.0) -> PressureEstimate:
    """Slope of log Z_n over the n-range, averaged over base-point samples.

    The per-omega slopes are also compared pairwise: their maximal spread is
    reported as the almost-sure omega-independence diagnostic.
    """
    n_range = list(n_range)
    if len(n_range) < 4:
        raise ValueError("n_range needs at least 4 entries")
    if omega_samples < 1:
        raise ValueError("omega_samples must be >= 1")
    cache = _cache or _SumCache(sys, phi, eps, n_range, method, budget, grid_resolution)
    omegas = _sample_omegas(sys, omega_samples, seed)
    slopes, errs = [], []
    used_method = None
    for w in omegas:
        logs = []
        for n in n_range:
            Q, sums = cache.sums(w, n)
            used_method = Q.method
            if Q.cardinality == 0:
                logs.append(0.0)
            else:
                logs.append(_log_partition_sum(sums, q=_q))
        a, se = _fit_slope(n_range, logs)
        slopes.append(a)
        errs.append(se)
    slopes = np.array(slopes)
    spread = float(slopes.max() - slopes.min()) if len(slopes) > 1 else 0.0
    return PressureEstimate(slope=float(slopes.mean()),
                            stderr=float(max(np.mean(errs), slopes.std())),
                            per_omega=tuple(float(s) for s in slopes),
                            lemma_consistency=spread,
                            eps=eps, n_range=(min(n_range), max(n_range)),
                            method=used_method or method)


def pressure_curve(sys: SkewSystem, phi: Observable, q_grid, eps: float, n_range,
                   omega_samples: int = 1, seed: int = 0, method: str = "auto",
                   budget: int = DEFAULT_BUDGET, grid_resolution=None,
                   q_max: float = 6.0, threads: int = 1) -> PressureCurve:
    """pi(q phi) over a sorted q grid, sharing separated sets across q.

    Scaling commutes with Birkhoff sums (S_n(q phi) = q S_n(phi)), so each
    (omega, n) pair is enumerated once.
    """
    q_grid = np.asarray(sorted(q_grid), dtype=float)
    if np.max(np.abs(q_grid)) > q_max:
        raise ValueError(f"|q| exceeds q_max = {q_max}")
    cache = _SumCache(sys, phi, eps, list(n_range), method, budget, grid_resolution)

    def one(q):
        est = pressure_estimate(sys, phi, eps, n_range, omega_samples, seed,
                                method, budget, grid_resolution, _cache=cache, _q=q)
        return est.slope, est.stderr

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(one, q_grid))
    else:
        results = [one(q) for q in q_grid]
    pressures = np.array([r[0] for r in results])
    errs = np.array([r[1] for r in results])
    defect = _convexity_defect(q_grid, pressures, sign=1.0)
    return PressureCurve(q=q_grid, pressure=pressures, stderr=errs, eps=eps,
                         n_min=min(n_range), n_max=max(n_range),
                         convexity_defect=defect)


def legendre_conjugate(curve: PressureCurve, alpha_grid) -> SpectrumCurve:
    """pi*(alpha) = min over the q grid of pi(q) - q alpha.

    When the minimiser sits at a q-grid endpoint the true infimum may lie
    outside the grid; those alphas carry a boundary flag.  Ties are broken
    toward the q closest to 0, so flat curves do not flag spuriously.
    """
    if len(curve.q) < 3:
        raise ValueError("pressure curve needs at least 3 points")
    alpha_grid = np.asarray(alpha_grid, dtype=float)
    values = np.empty(len(alpha_grid))
    flags = np.zeros(len(alpha_grid), dtype=bool)
    for i, a in enumerate(alpha_grid):
        vals = curve.pressure - curve.q * a
        m = float(np.min(vals))
        cand = np.flatnonzero(vals <= m + 1e-12)
        j = int(cand[np.argmin(np.abs(curve.q[cand]))])
        values[i] = vals[j]
        flags[i] = j == 0 or j == len(curve.q) - 1
    defect = _convexity_defect(alpha_grid, values, sign=-1.0)
    return SpectrumCurve(alpha=alpha_grid, legendre=values, boundary_flag=flags,
                         concavity_defect=defect)


@dataclass(frozen=True)
class LevelSetRate:
    rate: float
    stderr: float
    per_delta: tuple               # (delta, slope) pairs, decreasing delta
    delta_trend: float             # max |slope_delta - slope_smallest|
    outside_range: bool            # True when the deviation set stayed empty
    counts: CountTable = field(repr=False, default=None)


def level_set_rate(sys: SkewSystem, phi: Observable, w: BasePoint, alpha: float,
                   delta_schedule, eps: float, n_range, method: str = "auto",
                   budget: int = DEFAULT_BUDGET) -> LevelSetRate:
    """Growth rate of deviation-restricted separated counts.

    For each delta in the (strictly decreasing) schedule, fits the slope of
    log M(alpha, delta, n, eps, w) in n; returns the slope at the smallest
    delta with the schedule trend as a convergence diagnostic.  Empty
    deviation sets count as 1 (slope 0) and raise the outside-range flag.
    """
    deltas = list(delta_schedule)
    if len(deltas) < 2 or any(d2 >= d1 for d1, d2 in zip(deltas, deltas[1:])):
        raise ValueError("delta_schedule must be strictly decreasing with >= 2 entries")
    n_range = list(n_range)
    table = CountTable()
    use_cylinder = sys.fiber_kind == "doubling" and phi.kind == "digit" \
        and method in ("auto", "cylinder")
    slopes = []
    errs = []
    all_empty_smallest = False
    for delta in deltas:
        logs = []
        empty = True
        for n in n_range:
            if use_cylinder:
                c = cylinder_counts(sys, phi, n, alpha, delta)
                mth = "cylinder"
            else:
                Q = max_separated_set(sys, w, n, eps,
                                      restriction=Restriction(phi, alpha, delta),
                                      method=method, budget=budget)
                c = Q.count
                mth = Q.method
            empty = empty and c == 1
            table.add(n, eps, c, mth, alpha=alpha, delta=delta)
            logs.append(math.log(c))
        if empty:
            slopes.append(0.0)
            errs.append(0.0)
        else:
            a, se = _fit_slope(n_range, logs)
            slopes.append(a)
            errs.append(se)
        if delta == deltas[-1]:
            all_empty_smallest = empty
    trend = max(abs(s - slopes[-1]) for s in slopes)
    return LevelSetRate(rate=slopes[-1], stderr=errs[-1],
                        per_delta=tuple(zip(deltas, slopes)),
                        delta_trend=trend, outside_range=all_empty_smallest,
                        counts=table)


@dataclass(frozen=True)
class CrosscheckReport:
    alpha: np.ndarray
    legendre: np.ndarray
    boundary_flag: np.ndarray
    rates: np.ndarray                  # (n_alpha, n_omega)
    outside_flag: np.ndarray
    max_interior_discrepancy: float
    max_omega_spread: float
    observed_interval: tuple
    spectrum: SpectrumCurve

    def to_csv(self) -> str:
        lines = ["alpha,legendre,counting_rate,flag"]
        for i in range(len(self.alpha)):
            flags = []
            if self.boundary_flag[i]:
                flags.append("boundary")
            if self.outside_flag[i]:
                flags.append("outside")
            lines.append(f"{float(self.alpha[i])!r},{float(self.legendre[i])!r},"
                         f"{float(np.mean(self.rates[i]))!r},{'+'.join(flags)}")
        return "\n".join(lines) + "\n"


def spectrum_crosscheck(sys: SkewSystem, phi: Observable, alpha_grid, *,
                        q_grid, eps: float, n_range, delta_schedule,
                        omega_samples: int = 1, seed: int = 0,
                        method: str = "auto", budget: int = DEFAULT_BUDGET,
                        curve_n_range=None, threads: int = 1) -> CrosscheckReport:
    """Tabulates |counting rate - Legendre conjugate| per alpha and omega.

    Boundary-flagged alphas (argmin at a q endpoint) are excluded from the
    reported interior maximum, as are alphas with empty deviation sets.
    ``curve_n_range`` lets the pressure curve use a shorter n-range than the
    counting rates (counts may come from closed forms, partition sums must
    materialise separated sets).
    """
    curve = pressure_curve(sys, phi, q_grid, eps,
                           curve_n_range if curve_n_range is not None else n_range,
                           omega_samples, seed, method, budget, threads=threads)
    spec = legendre_conjugate(curve, alpha_grid)
    omegas = _sample_omegas(sys, omega_samples, seed)
    alpha_grid = np.asarray(alpha_grid, dtype=float)
    rates = np.empty((len(alpha_grid), len(omegas)))
    outside = np.zeros(len(alpha_grid), dtype=bool)
    for i, a in enumerate(alpha_grid):
        out_all = True
        for k, w in enumerate(omegas):
            r = level_set_rate(sys, phi, w, a, delta_schedule, eps, n_range,
                               method=method, budget=budget)
            rates[i, k] = r.rate
            out_all = out_all and r.outside_range
        outside[i] = out_all
    interior = ~spec.boundary_flag & ~outside
    if interior.any():
        disc = np.abs(rates[interior].mean(axis=1) - spec.legendre[interior])
        max_disc = float(disc.max())
    else:
        max_disc = float("nan")
    spread = float(np.max(rates.max(axis=1) - rates.min(axis=1))) if rates.size else 0.0
    observed = alpha_grid[~outside]
    interval = (float(observed.min()), float(observed.max())) if len(observed) else (math.nan, math.nan)
    spec = SpectrumCurve(alpha=spec.alpha, legendre=spec.legendre,
                         boundary_flag=spec.boundary_flag,
                         concavity_defect=spec.concavity_defect,
                         counting_rate=rates.mean(axis=1),
                         outside_flag=outside, observed_interval=interval)
    return CrosscheckReport(alpha=alpha_grid, legendre=spec.legendre,
                            boundary_flag=spec.boundary_flag, rates=rates,
                            outside_flag=outside,
                            max_interior_discrepancy=max_disc,
                            max_omega_spread=spread,
                            observed_interval=interval, spectrum=spec)
