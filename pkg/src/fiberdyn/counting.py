"""Separated and spanning set counting.

Three generation methods feed the same `SeparatedSet` contract:

* ``grid`` — greedy lexicographic selection over a candidate lattice, the
  generic path.  Counts are lower bounds on the maximal-separated
  cardinality; growth-rate consumers calibrate against the exact methods.
* ``cylinder`` — doubling oracle only: the 2^n dyadic left endpoints
  x_w = 0.w1...wn.  At the last index where two words disagree the orbit
  difference is exactly 1/2, so the set is (eps, n)-separated for every
  eps < 1/2, and its covering radius is <= 1/4, hence maximal for
  eps >= 1/4.
* ``periodic`` — affine toral systems: the fixed-point lattice of T^n.
  An orbit difference of two such points is n-periodic on the torus, so
  staying eps-close for 0..n-1 means staying eps-close forever, which the
  expansivity constant eta forbids; the set is separated for every
  eps < eta.  It is not maximal (a constant-factor undercount, harmless
  to log-count slopes).

Spanning counts are greedy upper bounds: generic greedy set cover, a
1-d sweep cover for the doubling oracle, and a frame-cell cover for
affine systems (cells inscribed in Bowen balls; one sample point per
occupied cell is a genuine spanning set).
"""

import math
import zlib
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from . import _kernels
from .drivers import BasePoint
from .dyadic import snap
from .errors import BudgetExceeded, EmptySample, EpsilonTooLarge, NotAffine
from .observables import Observable, birkhoff_sum, birkhoff_sums
from .systems import (SkewSystem, expansivity_eta, hyperbolic_frame,
                      min_expansion_rate, orbit_points)

DEFAULT_BUDGET = 10**7
AUDIT_FULL_CAP = 1200       # full pairwise audit below this cardinality
AUDIT_SAMPLE_PAIRS = 4000


class Restriction(NamedTuple):
    """Deviation-set restriction: keep x with |S_n phi / n - alpha| < delta."""

    phi: Observable
    alpha: float
    delta: float


@dataclass(frozen=True)
class SeparatedSet:
    """An (omega, eps, n)-separated set of fiber points with provenance."""

    points: np.ndarray
    omega: BasePoint
    n: int
    eps: float
    method: str
    grid_resolution: Optional[float]
    maximal: bool
    audit_min_distance: float
    audit_pairs: int
    note: str = ""

    @property
    def cardinality(self) -> int:
        return int(self.points.shape[0])

    @property
    def count(self) -> int:
        """Cardinality under the empty-set convention (empty counts as 1)."""
        return max(1, self.cardinality)


class SpanningResult(NamedTuple):
    count: int
    method: str
    note: str


def deviation_set_membership(sys: SkewSystem, phi: Observable, w: BasePoint,
                             x, n: int, alpha: float, delta: float) -> bool:
    """Strict membership |S_n phi(w, x)/n - alpha| < delta."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if delta <= 0:
        raise ValueError("delta must be positive")
    avg = birkhoff_sum(sys, phi, w, x, n) / n
    return abs(avg - alpha) < delta


def _deviation_filter(sys, w, X, n, restriction: Restriction):
    sums = birkhoff_sums(sys, restriction.phi, w, X, n)
    keep = np.abs(sums / n - restriction.alpha) < restriction.delta
    return X[keep] if sys.fiber_dim == 1 else X[keep, :]


def _orbit_stack(sys, w, X, n):
    """Orbits shaped (N, n, d) for the kernels."""
    orb = orbit_points(sys, w, X, n)
    if sys.fiber_dim == 1:
        orb = orb[:, :, None]
    return np.ascontiguousarray(orb)


def _audit(orbits, eps, seed_tag):
    """Pairwise strict-separation audit; full below the cap, sampled above."""
    N = orbits.shape[0]
    if N < 2:
        return float("inf"), 0
    if N <= AUDIT_FULL_CAP:
        dmin = _kernels.min_pairwise_bowen(orbits)
        pairs = N * (N - 1) // 2
    else:
        rng = np.random.default_rng(zlib.crc32(f"audit:{N}:{seed_tag}".encode()))
        k = min(AUDIT_SAMPLE_PAIRS, N * (N - 1) // 2)
        idx = rng.integers(0, N, size=(k, 2))
        idx = idx[idx[:, 0] != idx[:, 1]]
        dmin = float(np.min(_kernels.pairwise_bowen(orbits, idx))) if len(idx) else float("inf")
        pairs = len(idx)
    if dmin <= eps:
        raise AssertionError(f"separation audit failed: min distance {dmin} <= eps {eps}")
    return dmin, pairs


# -- exact enumerations -----------------------------------------------------

def dyadic_words(n: int):
    """Left endpoints j / 2^n of the length-n binary cylinders, plus popcounts."""
    if n > 30:
        raise ValueError("cylinder enumeration limited to n <= 30")
    j = np.arange(2**n, dtype=np.int64)
    pts = j / float(2**n)
    # popcount via bit tricks (vectorised)
    ones = np.zeros(len(j), dtype=np.int64)
    v = j.copy()
    while v.any():
        ones += v & 1
        v >>= 1
    return pts, ones


def _snf2(A):
    """Smith-style reduction: returns (D, P, Q) with P @ A @ Q = D = diag(d1, d2),
    d1, d2 > 0, d1 | d2, and P, Q unimodular.  Exact integer arithmetic;
    the factorisation is re-verified before returning."""
    a = [[int(A[0][0]), int(A[0][1])], [int(A[1][0]), int(A[1][1])]]
    P = [[1, 0], [0, 1]]
    Q = [[1, 0], [0, 1]]

    def row_sub(i, j, q):
        for c in range(2):
            a[i][c] -= q * a[j][c]
            P[i][c] -= q * P[j][c]

    def row_swap():
        a[0], a[1] = a[1], a[0]
        P[0], P[1] = P[1], P[0]

    def row_neg(i):
        for c in range(2):
            a[i][c] = -a[i][c]
            P[i][c] = -P[i][c]

    def col_sub(i, j, q):
        for r in range(2):
            a[r][i] -= q * a[r][j]
            Q[r][i] -= q * Q[r][j]

    def col_swap():
        for r in range(2):
            a[r][0], a[r][1] = a[r][1], a[r][0]
            Q[r][0], Q[r][1] = Q[r][1], Q[r][0]

    while True:
        while a[1][0] != 0 or a[0][1] != 0:
            if a[1][0] != 0:
                if a[0][0] == 0:
                    row_swap()
                else:
                    q = a[1][0] // a[0][0]
                    row_sub(1, 0, q)
                    if a[1][0] != 0:
                        row_swap()
            elif a[0][1] != 0:
                if a[0][0] == 0:
                    col_swap()
                else:
                    q = a[0][1] // a[0][0]
                    col_sub(1, 0, q)
                    if a[0][1] != 0:
                        col_swap()
        if a[0][0] == 0 and a[1][1] != 0:
            col_swap()
            continue
        if a[0][0] != 0 and a[1][1] % a[0][0] != 0:
            col_sub(0, 1, -1)          # col0 += col1, rerun the reduction
            continue
        break
    if a[0][0] < 0:
        row_neg(0)
    if a[1][1] < 0:
        row_neg(1)
    D = a
    PA = [[sum(P[i][k] * int(A[k][j]) for k in range(2)) for j in range(2)] for i in range(2)]
    PAQ = [[sum(PA[i][k] * Q[k][j] for k in range(2)) for j in range(2)] for i in range(2)]
    assert PAQ == D, "SNF verification failed"
    assert abs(P[0][0] * P[1][1] - P[0][1] * P[1][0]) == 1
    assert abs(Q[0][0] * Q[1][1] - Q[0][1] * Q[1][0]) == 1
    assert D[0][1] == 0 and D[1][0] == 0 and D[0][0] > 0 and D[1][1] > 0
    assert D[1][1] % D[0][0] == 0
    return D, P, Q


def _power_minus_identity(sys, n):
    T = [[int(sys.matrix[0, 0]), int(sys.matrix[0, 1])],
         [int(sys.matrix[1, 0]), int(sys.matrix[1, 1])]]
    M = [[1, 0], [0, 1]]
    for _ in range(n):
        M = [[M[0][0] * T[0][0] + M[0][1] * T[1][0],
              M[0][0] * T[0][1] + M[0][1] * T[1][1]],
             [M[1][0] * T[0][0] + M[1][1] * T[1][0],
              M[1][0] * T[0][1] + M[1][1] * T[1][1]]]
    return [[M[0][0] - 1, M[0][1]], [M[1][0], M[1][1] - 1]]


def periodic_cardinality(sys: SkewSystem, n: int) -> int:
    """|det(T^n - I)|, the number of T^n-fixed points, without enumerating."""
    if not sys.is_affine_torus:
        raise NotAffine("periodic enumeration requires an affine toral system")
    A = _power_minus_identity(sys, n)
    return abs(A[0][0] * A[1][1] - A[0][1] * A[1][0])


def periodic_points(sys: SkewSystem, n: int,
                    budget: int = DEFAULT_BUDGET) -> np.ndarray:
    """All fixed points of T^n on the torus, via Smith reduction of T^n - I.

    Cardinality |det(T^n - I)| = lam_u^n + lam_s^n - 2 for det T = 1; the
    cardinality is checked against the budget before anything materialises.
    """
    card = periodic_cardinality(sys, n)
    if card > budget:
        raise BudgetExceeded(card, budget)
    A = _power_minus_identity(sys, n)
    D, _, Q = _snf2(A)
    d1, d2 = D[0][0], D[1][1]
    i = np.arange(d1, dtype=float) / d1
    j = np.arange(d2, dtype=float) / d2
    I, J = np.meshgrid(i, j, indexing="ij")
    y = np.stack([I.ravel(), J.ravel()], axis=1)
    Qm = np.array(Q, dtype=float)
    pts = y @ Qm.T
    pts -= np.floor(pts)
    return snap(pts)


def cylinder_count(n: int, alpha: float, delta: float) -> int:
    """Exact number of length-n binary words with |ones/n - alpha| < delta.

    Each qualifying word contributes one (omega, eps, n)-separated point of
    the doubling oracle for any eps < 1/2; the empty case counts as 1.
    """
    total = sum(math.comb(n, j) for j in range(n + 1) if abs(j / n - alpha) < delta)
    return max(total, 1)


def cylinder_counts(sys: SkewSystem, phi: Observable, n: int, alpha: float,
                    delta: float) -> int:
    """CountTable entry for the doubling oracle via exact binomials.

    For phi = s * digit + c the Birkhoff average of a word is s*ones/n + c,
    so the deviation condition rescales to |ones/n - (alpha-c)/s| < delta/|s|.
    """
    if sys.fiber_kind != "doubling":
        raise ValueError("cylinder counts are defined for the doubling oracle")
    if phi.kind != "digit":
        raise ValueError("cylinder counts require the first-digit observable")
    s, off = phi.scale, phi.offset
    if s == 0.0:
        return 2**n if abs(off - alpha) < delta else 1
    return cylinder_count(n, (alpha - off) / s, delta / abs(s))


# -- maximal separated sets --------------------------------------------------

def _grid_candidates(sys, n, eps, resolution):
    if sys.fiber_dim == 1:
        if resolution is None:
            # resolve the finest Bowen-ball scale at this n (1-d grids stay cheap)
            rate = min_expansion_rate(sys)
            resolution = eps * rate ** (-(n - 1)) / 8.0
        g = int(math.ceil(1.0 / resolution))
        return snap(np.arange(g) / g), resolution
    if resolution is None:
        resolution = eps / 8.0
    g = int(math.ceil(1.0 / resolution))
    j = np.arange(g) / g
    X, Y = np.meshgrid(j, j, indexing="ij")
    return snap(np.stack([X.ravel(), Y.ravel()], axis=1)), resolution


def max_separated_set(sys: SkewSystem, w: BasePoint, n: int, eps: float,
                      restriction: Optional[Restriction] = None,
                      method: str = "auto", budget: int = DEFAULT_BUDGET,
                      grid_resolution: Optional[float] = None) -> SeparatedSet:
    """A deterministic (omega, eps, n)-separated set of the fiber.

    method 'auto' picks the exact enumeration when certified (cylinder for
    the doubling oracle at eps in [1/4, 1/2); the T^n fixed-point lattice
    for affine systems at eps < eta) and the greedy grid otherwise.  The
    returned set always passes a strict pairwise separation audit; with the
    grid method it is maximal relative to the candidate lattice.  The
    paper's supremum over maximal separated sets is approximated by this
    one deterministic set (recorded in ``note``).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if eps <= 0:
        raise ValueError("eps must be positive")
    if method == "auto":
        if sys.fiber_kind == "doubling" and 0.25 <= eps < 0.5:
            method = "cylinder"
        elif sys.is_affine_torus and eps < expansivity_eta(sys):
            method = "periodic"
        else:
            method = "grid"

    note = "one deterministic maximal set approximates the sup over maximal sets"

    if method == "cylinder":
        if sys.fiber_kind != "doubling":
            raise ValueError("cylinder method applies to the doubling oracle only")
        if eps >= 0.5:
            raise EpsilonTooLarge("cylinder separation certified for eps < 1/2 only")
        predicted = 2**n * n
        if predicted > budget:
            raise BudgetExceeded(predicted, budget)
        pts, ones = dyadic_words(n)
        if restriction is not None:
            if restriction.phi.kind == "digit":
                avg = restriction.phi.scale * ones / n + restriction.phi.offset
            else:
                avg = birkhoff_sums(sys, restriction.phi, w, pts, n) / n
            pts = pts[np.abs(avg - restriction.alpha) < restriction.delta]
        maximal = eps >= 0.25
        orbits = _orbit_stack(sys, w, pts, n) if len(pts) else np.empty((0, n, 1))
        dmin, pairs = _audit(orbits, eps, "cylinder") if len(pts) > 1 else (float("inf"), 0)
        return SeparatedSet(pts, w, n, eps, "cylinder", None, maximal, dmin, pairs,
                            note + "; separation exact at the last disagreeing digit")

    if method == "periodic":
        if not sys.is_affine_torus:
            raise NotAffine("periodic method requires an affine toral system")
        eta = expansivity_eta(sys)
        if eps >= eta:
            raise EpsilonTooLarge(f"periodic separation certified for eps < eta = {eta:.4f}")
        card = periodic_cardinality(sys, n)
        predicted = card if restriction is None else card * (n + 1)
        if predicted > budget:
            raise BudgetExceeded(predicted, budget)
        pts = periodic_points(sys, n, budget=budget)
        if restriction is not None:
            pts = _deviation_filter(sys, w, pts, n, restriction)
        # audit on a bounded subsample; separation certified by expansivity
        if pts.shape[0] > 1:
            cap = min(pts.shape[0], 400)
            rng = np.random.default_rng(12345)
            sub = pts[rng.choice(pts.shape[0], size=cap, replace=False)] \
                if pts.shape[0] > cap else pts
            orbits = _orbit_stack(sys, w, sub, n)
            dmin, pairs = _audit(orbits, eps, "periodic")
        else:
            dmin, pairs = float("inf"), 0
        return SeparatedSet(pts, w, n, eps, "periodic", None, False, dmin, pairs,
                            note + "; separation certified by n-periodicity + expansivity; "
                                   "not maximal (constant-factor undercount)")

    if method != "grid":
        raise ValueError(f"unknown method {method!r}")

    cand, resolution = _grid_candidates(sys, n, eps, grid_resolution)
    ncand = cand.shape[0]
    predicted = ncand * n * (2 if restriction is not None else 1)
    if predicted > budget:
        raise BudgetExceeded(predicted, budget)
    if restriction is not None:
        cand = _deviation_filter(sys, w, cand, n, restriction)
    if cand.shape[0] == 0:
        empty = np.empty((0,)) if sys.fiber_dim == 1 else np.empty((0, 2))
        return SeparatedSet(empty, w, n, eps, "grid", resolution, True,
                            float("inf"), 0, note + "; empty deviation set, count convention 1")
    orbits = _orbit_stack(sys, w, cand, n)
    sel = _kernels.greedy_separated(orbits, eps)
    pts = cand[sel] if sys.fiber_dim == 1 else cand[sel, :]
    dmin, pairs = _audit(orbits[sel], eps, "grid")
    return SeparatedSet(pts, w, n, eps, "grid", resolution, True, dmin, pairs, note)


# -- count tables -------------------------------------------------------------

@dataclass
class CountTable:
    """Counts indexed by (n, eps) or (n, eps, alpha, delta), with methods."""

    entries: dict

    def __init__(self):
        self.entries = {}

    def add(self, n, eps, count, method, alpha=None, delta=None):
        if count < 1:
            raise ValueError("counts follow the >= 1 empty-set convention")
        self.entries[(n, eps, alpha, delta)] = (int(count), method)

    def get(self, n, eps, alpha=None, delta=None):
        return self.entries[(n, eps, alpha, delta)][0]

    def rows(self):
        for (n, eps, alpha, delta), (count, method) in sorted(
                self.entries.items(), key=lambda kv: tuple(
                    (v if v is not None else -1) for v in kv[0])):
            yield n, eps, alpha, delta, count, method

    def to_csv(self) -> str:
        lines = ["n,epsilon,alpha,delta,count,method"]
        for n, eps, alpha, delta, count, method in self.rows():
            a = "" if alpha is None else repr(float(alpha))
            d = "" if delta is None else repr(float(delta))
            lines.append(f"{n},{float(eps)!r},{a},{d},{count},{method}")
        return "\n".join(lines) + "\n"


# -- spanning counts ----------------------------------------------------------

def _sweep_cover(xs, w, keep_fraction):
    """Greedy left-to-right interval cover of circle samples, then trim the
    cheapest balls until the kept balls still cover >= keep_fraction."""
    xs = np.sort(np.asarray(xs, dtype=float))
    npts = len(xs)
    covers = []
    i = 0
    while i < npts:
        hi = xs[i] + 2.0 * w
        j = int(np.searchsorted(xs, hi, side="right"))
        covers.append(j - i)
        i = j
    covers = sorted(covers)
    allowed = (1.0 - keep_fraction) * npts
    dropped = 0
    k = 0
    while k < len(covers) and dropped + covers[k] <= allowed:
        dropped += covers[k]
        k += 1
    return len(covers) - k


def _cell_cover(sys, X, n, eps, keep_fraction):
    """Frame-cell cover: cells inscribed in Bowen eps-balls, trimmed."""
    frame = hyperbolic_frame(sys)
    a = eps * frame.lam_u ** (-(n - 1)) / 2.0
    b = eps / 2.0
    B = np.stack([frame.e_u, frame.e_s], axis=1)
    uv = np.linalg.solve(B, X.T).T
    iu = np.floor(uv[:, 0] / a).astype(np.int64)
    isx = np.floor(uv[:, 1] / b).astype(np.int64)
    key = iu * np.int64(2**31) + isx
    _, counts = np.unique(key, return_counts=True)
    counts = np.sort(counts)
    allowed = (1.0 - keep_fraction) * X.shape[0]
    dropped = 0
    k = 0
    while k < len(counts) and dropped + counts[k] <= allowed:
        dropped += counts[k]
        k += 1
    return int(len(counts) - k)


def min_spanning_count(sys: SkewSystem, w: BasePoint, n: int, eps: float,
                       sample, coverage: float, method: str = "auto",
                       budget: int = DEFAULT_BUDGET) -> SpanningResult:
    """Upper bound on the minimal (omega, eps, n)-spanning count of a
    (coverage)-mass subset of the sample.

    Greedy cover carries the usual ln-factor inflation; the sweep and cell
    methods overcount by bounded constants.  All three vanish in log-count
    slopes.
    """
    sample = np.asarray(sample, dtype=float)
    if sample.size == 0:
        raise EmptySample("spanning count needs at least one sample point")
    if not (0.0 < coverage <= 1.0):
        raise ValueError("coverage must lie in (0, 1]")
    if sys.fiber_dim == 1:
        sample = sample.reshape(-1)
    else:
        sample = sample.reshape(-1, 2)
    N = sample.shape[0]

    if method == "auto":
        if sys.fiber_kind == "doubling":
            method = "sweep"
        elif sys.is_affine_torus:
            method = "cells"
        else:
            method = "greedy"

    if method == "sweep":
        if sys.fiber_dim != 1:
            raise ValueError("sweep cover applies to circle fibers")
        rate = min_expansion_rate(sys)
        wrad = eps * rate ** (-(n - 1))
        cnt = _sweep_cover(sample, wrad, coverage)
        return SpanningResult(max(cnt, 1), "sweep",
                              "interval cover on the dominant Bowen-ball component; "
                              "upper bound on the minimal cover")
    if method == "cells":
        cnt = _cell_cover(sys, sample, n, eps, coverage)
        return SpanningResult(max(cnt, 1), "cells",
                              "one sample point per occupied frame cell is a spanning set; "
                              "constant-factor overcount")
    if method != "greedy":
        raise ValueError(f"unknown method {method!r}")

    predicted = N * N * n
    if predicted > budget:
        raise BudgetExceeded(predicted, budget)
    orbits = _orbit_stack(sys, w, sample, n)
    cov = _kernels.cover_matrix(orbits, eps).astype(bool)
    covered = np.zeros(N, dtype=bool)
    target = int(math.ceil(coverage * N))
    chosen = 0
    while covered.sum() < target:
        gains = cov[:, ~covered].sum(axis=1)
        pick = int(np.argmax(gains))
        if gains[pick] == 0:
            break
        covered |= cov[pick]
        chosen += 1
    return SpanningResult(max(chosen, 1), "greedy",
                          "greedy set cover: upper bound within a ln-factor of optimal")


# -- exact covering counts for the doubling oracle ---------------------------

def doubling_cover_count(n: int, eps: float, alpha=None, delta=None,
                         phi_scale: float = 1.0) -> int:
    """Exact minimal number of Bowen eps-balls covering the deviation set of
    the doubling oracle (the whole circle when alpha is None).

    Bowen eps-balls are intervals of radius eps * 2^-(n-1) for eps < 1/3.
    The cover is optimised over the circle by trying every segment start as
    the anchor of the first ball.
    """
    if eps >= 1.0 / 3.0:
        raise EpsilonTooLarge("interval-ball formula certified for eps < 1/3")
    r = eps * 2.0 ** (-(n - 1))
    width = 2**n
    if alpha is None:
        segs = [(0.0, 1.0)]
    else:
        segs = []
        cur = None
        for j in range(width):
            ones = bin(j).count("1")
            if abs(phi_scale * ones / n - alpha) < delta:
                lo, hi = j / width, (j + 1) / width
                if cur is not None and abs(cur[1] - lo) < 1e-15:
                    cur = (cur[0], hi)
                else:
                    if cur is not None:
                        segs.append(cur)
                    cur = (lo, hi)
        if cur is not None:
            segs.append(cur)
        if not segs:
            return 1

    def line_cover(segments, L):
        cnt = 0
        pos = -np.inf
        for lo, hi in segments:
            while pos < hi:
                start = max(lo, pos)
                if start >= hi:
                    break
                pos = start + L
                cnt += 1
            # next segment continues with current pos
        return cnt

    L = 2.0 * r
    if len(segs) == 1 and segs[0] == (0.0, 1.0):
        return int(math.ceil(1.0 / L))
    # circle optimisation: anchor the first ball at each segment start
    best = None
    for k in range(len(segs)):
        rot = segs[k:] + [(lo + 1.0, hi + 1.0) for lo, hi in segs[:k]]
        base = rot[0][0]
        shifted = [(lo - base, hi - base) for lo, hi in rot]
        cnt = line_cover(shifted, L)
        best = cnt if best is None else min(best, cnt)
    return max(int(best), 1)
