"""Constructive fiber-specification shadowing for affine hyperbolic fibers.

The orbit-gluing induction is implemented exactly where the stable and
unstable manifolds are globally affine: segments along the eigendirections
of the fiber matrix.  Each gluing pushes the unstable segment of the
current point across the gap (an affine image: same direction, length
multiplied by lam_u^gap) and intersects it with the stable segment of the
next anchor, choosing the lattice lift with the smallest stable offset.
The final point is pulled back to time zero with exact integer inverse
matrices.

Numerics: anchors live on the dyadic grid, so their orbits are computed in
exact integer arithmetic.  The shadow point itself is irrational (an
intersection of eigenlines), so its orbit is tracked in mpmath at a
precision budgeted from the specification horizon; certificate distances
are exponentially sensitive to the initial condition and would drown in
float64 rounding beyond ~30 steps.

The certified spacing (`mixing_gap`) is derived from lattice geometry: an
unstable segment of half-length L meets the gamma-stable segment of an
arbitrary anchor iff some lattice translate lands in a 2L x 2gamma
frame-aligned rectangle.  The enumeration certifies the largest stable-
projection gap among lattice points in the unstable strip, which is the
worst case over anchor positions (a quadratic-in-gamma requirement; the
naive linear bound lam^N gamma > diam + 1 admits counterexamples).
"""

import math
from dataclasses import dataclass

import numpy as np
from mpmath import mp, mpf

from .drivers import BasePoint
from .dyadic import ISCALE, snap
from .errors import FiberdynError, NotAffine, PointsTooFar, SpacingTooSmall
from .systems import HyperbolicFrame, SkewSystem, hyperbolic_frame

GAMMA_FRACTION = 8      # gamma = eps / 8, the beta/8 bookkeeping at beta = eps


# -- specifications ----------------------------------------------------------

@dataclass(frozen=True)
class OmegaSpecification:
    """A base point, disjoint integer intervals and one anchor per interval.

    The anchor at a_i generates the orbit segment P(t) = F^(t - a_i)(anchor)
    for t in [a_i, b_i], so orbit consistency holds by construction; the
    audit in `verify_shadowing` re-checks it.
    """

    omega: BasePoint
    intervals: tuple
    anchors: tuple

    def __post_init__(self):
        ivs = tuple((int(a), int(b)) for a, b in self.intervals)
        if not ivs:
            raise ValueError("specification needs at least one interval")
        for a, b in ivs:
            if b < a:
                raise ValueError(f"interval [{a}, {b}] is empty")
        for (a1, b1), (a2, b2) in zip(ivs, ivs[1:]):
            if a2 <= b1:
                raise ValueError("intervals must be sorted and disjoint")
        if len(self.anchors) != len(ivs):
            raise ValueError("one anchor per interval required")
        anchors = tuple(np.array(snap(np.asarray(p, dtype=float).reshape(2)))
                        for p in self.anchors)
        object.__setattr__(self, "intervals", ivs)
        object.__setattr__(self, "anchors", anchors)

    @property
    def k(self) -> int:
        return len(self.intervals)

    @property
    def min_gap(self):
        gaps = [a2 - b1 for (_, b1), (a2, _) in zip(self.intervals, self.intervals[1:])]
        return min(gaps) if gaps else math.inf

    def is_m_spaced(self, m: int) -> bool:
        return all(a2 > b1 + m for (_, b1), (a2, _) in
                   zip(self.intervals, self.intervals[1:]))

    @property
    def horizon(self) -> int:
        return self.intervals[-1][1] - min(0, self.intervals[0][0])

    def to_text(self) -> str:
        rows = []
        for (a, b), p in zip(self.intervals, self.anchors):
            rows.append(f"{a} {b} {float(p[0])!r} {float(p[1])!r}")
        return (f"[specification]\nomega = {float(self.omega.anchor)!r} "
                f"{self.omega.shift}\n"
                f"intervals = {' ; '.join(rows)}\n")


def specification_from_text(text) -> OmegaSpecification:
    import configparser
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    parser.read_string(text if isinstance(text, str) else text.read())
    sec = parser["specification"]
    om = sec["omega"].split()
    omega = BasePoint(float(om[0]), int(om[1]) if len(om) > 1 else 0)
    intervals, anchors = [], []
    for row in sec["intervals"].split(";"):
        toks = row.split()
        if not toks:
            continue
        a, b, x1, x2 = int(toks[0]), int(toks[1]), float(toks[2]), float(toks[3])
        intervals.append((a, b))
        anchors.append((x1, x2))
    return OmegaSpecification(omega, tuple(intervals), tuple(anchors))


@dataclass(frozen=True)
class AffineManifold:
    """A segment {p + t e, |t| <= half_length} along a frame direction."""

    point: np.ndarray
    direction: str          # 'u' or 's'
    half_length: float

    def __post_init__(self):
        if self.direction not in ("u", "s"):
            raise ValueError("direction must be 'u' or 's'")
        if not (0 < self.half_length < 0.25):
            raise ValueError("half_length must lie in (0, 1/4)")

    def vector(self, frame: HyperbolicFrame):
        return frame.e_u if self.direction == "u" else frame.e_s

    def pushed(self, frame: HyperbolicFrame, image_point, steps: int):
        """Affine forward image: the direction persists, the length scales."""
        rate = frame.lam_u if self.direction == "u" else frame.lam_s
        return AffineManifold(np.asarray(image_point, dtype=float), self.direction,
                              self.half_length * rate ** steps)


def local_product(x, y, eps: float, frame: HyperbolicFrame):
    """The single point of W_eps^s(x) cap W_eps^u(y) (affine case).

    Solves z = x + s e_s = y + kappa + t e_u over the nine nearest lattice
    lifts of y, choosing the lift closest to x.  Precondition:
    d(x, y) < delta(eps) = eps sin(angle) / 2.
    """
    x = np.asarray(x, dtype=float).reshape(2)
    y = np.asarray(y, dtype=float).reshape(2)
    delta = eps * frame.sin_angle / 2.0
    d = y - x
    shifts = np.array([[i, j] for i in (-1, 0, 1) for j in (-1, 0, 1)], dtype=float)
    lifts = d[None, :] + shifts
    norms = np.linalg.norm(lifts, axis=1)
    best = int(np.argmin(norms))
    if norms[best] >= delta:
        raise PointsTooFar(f"d(x, y) = {norms[best]:.6f} >= delta(eps) = {delta:.6f}")
    M = np.stack([frame.e_s, -frame.e_u], axis=1)
    s, t = np.linalg.solve(M, lifts[best])
    if abs(s) > eps or abs(t) > eps:
        raise PointsTooFar(f"intersection offsets |s|={abs(s):.6f}, |t|={abs(t):.6f} exceed eps")
    z = x + s * frame.e_s
    return z - np.floor(z)


# -- certified mixing gap ------------------------------------------------------

def _lattice_strip(frame: HyperbolicFrame, t_max: float, s_max: float):
    """Lattice points' (t, s) frame coordinates within the given strip."""
    R = int(math.ceil(t_max + s_max + 2))
    ks = np.arange(-R, R + 1)
    K1, K2 = np.meshgrid(ks, ks, indexing="ij")
    pts = np.stack([K1.ravel(), K2.ravel()], axis=1).astype(float)
    M = np.stack([frame.e_u, -frame.e_s], axis=1)
    ts = np.linalg.solve(M, pts.T).T          # columns: t along e_u, s along -e_s
    keep = (np.abs(ts[:, 0]) <= t_max) & (np.abs(ts[:, 1]) <= s_max)
    return ts[keep]


_MIXING_GAP_CACHE = {}


def mixing_gap(sys: SkewSystem, eps: float) -> int:
    """Smallest certified spacing N for the gluing construction.

    Requires lam_u^-N <= 1/2 (geometric error ledger) and that every
    stable window of width 2 gamma within the anchor range contains a
    lattice point whose unstable projection fits the pushed segment
    half-length gamma lam_u^N (with unit margins for the anchor offsets).
    """
    if not sys.is_affine_torus:
        raise NotAffine("mixing gap requires an affine toral system")
    if not (0 < eps <= 0.25):
        raise ValueError("eps must lie in (0, 1/4]")
    key = (tuple(int(v) for v in sys.matrix.flat), float(eps))
    if key in _MIXING_GAP_CACHE:
        return _MIXING_GAP_CACHE[key]
    frame = hyperbolic_frame(sys)
    gamma = eps / GAMMA_FRACTION
    Minv = np.linalg.inv(np.stack([frame.e_u, -frame.e_s], axis=1))
    half_diag = math.sqrt(2.0) / 2.0
    t_off = float(np.linalg.norm(Minv[0])) * half_diag
    s_off = float(np.linalg.norm(Minv[1])) * half_diag
    for N in range(1, 61):
        if frame.lam_u ** (-N) > 0.5:
            continue
        L = gamma * frame.lam_u ** N
        t_avail = L - t_off
        if t_avail <= 0:
            continue
        if L > 5000:
            raise FiberdynError("mixing-gap enumeration window too large; eps too small")
        strip = _lattice_strip(frame, t_avail, s_off + 3.0 * gamma)
        if strip.shape[0] < 2:
            continue
        sv = np.sort(strip[:, 1])
        lo, hi = -s_off - gamma, s_off + gamma
        if sv[0] > lo or sv[-1] < hi:
            continue
        inside = sv[(sv >= lo - 2 * gamma) & (sv <= hi + 2 * gamma)]
        if len(inside) < 2:
            continue
        if float(np.max(np.diff(inside))) <= 2.0 * gamma:
            _MIXING_GAP_CACHE[key] = N
            return N
    raise FiberdynError("no certified mixing gap found below 60")


# -- exact orbit helpers -------------------------------------------------------

class _Forcing:
    """Dyadic forcing values along the base orbit, as integers and mpf."""

    def __init__(self, sys: SkewSystem, w: BasePoint):
        self.sys = sys
        self.w = w
        self._cache = {}

    def ints(self, t: int):
        if t not in self._cache:
            h = self.sys._forcing_at(self.w, t)
            if h is None:
                self._cache[t] = (0, 0)
            else:
                self._cache[t] = (int(round(h[0] * ISCALE)) % ISCALE,
                                  int(round(h[1] * ISCALE)) % ISCALE)
        return self._cache[t]

    def mpfs(self, t: int):
        h0, h1 = self.ints(t)
        return mpf(h0) / ISCALE, mpf(h1) / ISCALE


def _int_matrices(sys):
    T = sys.matrix
    a, b, c, d = int(T[0, 0]), int(T[0, 1]), int(T[1, 0]), int(T[1, 1])
    det = a * d - b * c
    Tint = ((a, b), (c, d))
    Tinv = ((d * det, -b * det), (-c * det, a * det))
    return Tint, Tinv


def _int_orbit(sys, forcing, t_from: int, nums, t_to: int):
    """March an exact dyadic point from time t_from to t_to; yields nothing,
    returns the final integer numerator pair."""
    Tint, Tinv = _int_matrices(sys)
    n0, n1 = nums
    t = t_from
    while t < t_to:
        h0, h1 = forcing.ints(t)
        n0, n1 = ((Tint[0][0] * n0 + Tint[0][1] * n1 + h0) % ISCALE,
                  (Tint[1][0] * n0 + Tint[1][1] * n1 + h1) % ISCALE)
        t += 1
    while t > t_to:
        h0, h1 = forcing.ints(t - 1)
        m0, m1 = n0 - h0, n1 - h1
        n0, n1 = ((Tinv[0][0] * m0 + Tinv[0][1] * m1) % ISCALE,
                  (Tinv[1][0] * m0 + Tinv[1][1] * m1) % ISCALE)
        t -= 1
    return n0, n1


def _mp_step(sys, forcing, t: int, x, forward: bool):
    Tint, Tinv = _int_matrices(sys)
    if forward:
        h0, h1 = forcing.mpfs(t)
        y0 = Tint[0][0] * x[0] + Tint[0][1] * x[1] + h0
        y1 = Tint[1][0] * x[0] + Tint[1][1] * x[1] + h1
    else:
        h0, h1 = forcing.mpfs(t - 1)
        m0, m1 = x[0] - h0, x[1] - h1
        y0 = Tinv[0][0] * m0 + Tinv[0][1] * m1
        y1 = Tinv[1][0] * m0 + Tinv[1][1] * m1
    return y0 - mp.floor(y0), y1 - mp.floor(y1)


def _mp_march(sys, forcing, t_from, x, t_to):
    t = t_from
    while t < t_to:
        x = _mp_step(sys, forcing, t, x, forward=True)
        t += 1
    while t > t_to:
        x = _mp_step(sys, forcing, t, x, forward=False)
        t -= 1
    return x


def _wrapped_diff_float(x_mp, nums):
    """Float64 wrapped difference of an mpf point and an exact dyadic point."""
    out = []
    for j in range(2):
        d = x_mp[j] - mpf(nums[j]) / ISCALE
        d = d - mp.floor(d + mpf(1) / 2)
        out.append(float(d))
    return np.array(out)


# -- the gluing construction ---------------------------------------------------

@dataclass(frozen=True)
class ShadowResult:
    """Shadow point with its verification certificate.

    ``point`` is the float64 projection (display only: certificate
    re-verification over long horizons needs the high-precision value in
    ``mp_point``/``dps``).
    """

    point: np.ndarray
    mp_point: tuple
    dps: int
    certificate: tuple            # ((t, distance), ...) over all interval times
    max_distance: float
    per_interval_max: tuple
    unstable_ledger: tuple        # per interval: max |unstable component|
    stable_ledger: tuple
    gluing_offsets: tuple         # per gluing: (|s|, |t|, available half-length)
    gamma: float
    eps: float
    spacing_used: int

    @property
    def ok(self) -> bool:
        return self.max_distance < self.eps


def _required_dps(sys, spec):
    frame = hyperbolic_frame(sys)
    lam10 = math.log10(frame.lam_u)
    a_last = spec.intervals[-1][0]
    b_last = spec.intervals[-1][1]
    span = abs(a_last) + abs(b_last) + 2 * spec.horizon + 20
    return 40 + int(math.ceil(lam10 * span))


def shadow(sys: SkewSystem, spec: OmegaSpecification, eps: float,
           _require_gap: bool = True) -> ShadowResult:
    """Construct the shadowing point of an m-spaced specification.

    Implements the induction: the first anchor starts the orbit; each
    successor is the intersection of the forward-pushed unstable segment
    with the stable segment of the next anchor (lattice lift with minimal
    stable offset); the result is pulled back to time zero.  Certificate
    distances are computed for every t in every interval and all must come
    out below eps (the per-interval construction bound is 3 gamma < eps/2).
    """
    if not sys.is_affine_torus:
        raise NotAffine("shadowing requires an affine toral fiber system")
    if not (0 < eps <= 0.25):
        raise ValueError("eps must lie in (0, 1/4]")
    N = mixing_gap(sys, eps)
    if _require_gap and not spec.is_m_spaced(N):
        raise SpacingTooSmall(f"specification gaps must exceed mixing_gap = {N}")
    frame = hyperbolic_frame(sys)
    gamma = eps / GAMMA_FRACTION
    forcing = _Forcing(sys, spec.omega)
    dps = _required_dps(sys, spec)

    with mp.workdps(dps):
        # eigendata recomputed at working precision (float seeds are too coarse)
        Tm = sys.matrix
        tr = int(Tm[0, 0] + Tm[1, 1])
        det = int(round(np.linalg.det(sys.matrix)))
        disc = mpf(tr) ** 2 - 4 * det
        lam_signed = (tr + mp.sqrt(disc)) / 2
        if abs(lam_signed) < 1:
            lam_signed = (tr - mp.sqrt(disc)) / 2
        mu_s = mpf(det) / lam_signed

        def unit_vec(mu):
            a, b = mpf(int(Tm[0, 0])), mpf(int(Tm[0, 1]))
            c, d = mpf(int(Tm[1, 0])), mpf(int(Tm[1, 1]))
            if abs(b) + abs(mu - a) >= abs(mu - d) + abs(c):
                v = (b, mu - a)
            else:
                v = (mu - d, c)
            nrm = mp.sqrt(v[0] ** 2 + v[1] ** 2)
            v = (v[0] / nrm, v[1] / nrm)
            if v[0] < 0 or (v[0] == 0 and v[1] < 0):
                v = (-v[0], -v[1])
            return v

        e_u = unit_vec(lam_signed)
        e_s = unit_vec(mu_s)
        det_M = e_s[0] * (-e_u[1]) - (-e_u[0]) * e_s[1]

        def solve_st(rhs0, rhs1):
            # [e_s, -e_u] @ (s, t) = rhs
            s = (rhs0 * (-e_u[1]) - (-e_u[0]) * rhs1) / det_M
            t = (e_s[0] * rhs1 - e_s[1] * rhs0) / det_M
            return s, t

        ivs = spec.intervals
        anchors_int = [(int(round(p[0] * ISCALE)) % ISCALE,
                        int(round(p[1] * ISCALE)) % ISCALE) for p in spec.anchors]

        # current orbit point at time a_k, as mpf
        x_cur = (mpf(anchors_int[0][0]) / ISCALE, mpf(anchors_int[0][1]) / ISCALE)
        glue_stats = []
        for k in range(len(ivs) - 1):
            a_k, b_k = ivs[k]
            a_next = ivs[k + 1][0]
            gap = a_next - b_k
            z = _mp_march(sys, forcing, a_k, x_cur, a_next)
            # pushed unstable half-length (log-capped: far beyond the needed window)
            log_len = math.log(gamma) + gap * math.log(frame.lam_u)
            avail = math.exp(min(log_len, math.log(1e7)))
            p_next_int = anchors_int[k + 1]
            p_next = (mpf(p_next_int[0]) / ISCALE, mpf(p_next_int[1]) / ISCALE)
            # float candidate search over lattice lifts
            dlt = np.array([float(p_next[0] - z[0]), float(p_next[1] - z[1])])
            Lwin = min(avail, gamma * frame.lam_u ** N + 2.0)
            R = int(math.ceil(Lwin + 3))
            ks = np.arange(-R, R + 1)
            K1, K2 = np.meshgrid(ks, ks, indexing="ij")
            kpts = np.stack([K1.ravel(), K2.ravel()], axis=1).astype(float)
            M2 = np.stack([frame.e_s, -frame.e_u], axis=1)
            st = np.linalg.solve(M2, (dlt[None, :] + kpts).T).T
            okm = (np.abs(st[:, 1]) <= avail) & (np.abs(st[:, 0]) <= gamma)
            if not okm.any():
                raise FiberdynError(
                    f"no admissible stable intersection at gluing {k + 1}; "
                    f"gap {gap} vs certified {N}")
            cand = np.flatnonzero(okm)
            order = np.lexsort((kpts[cand, 1], kpts[cand, 0],
                                np.abs(st[cand, 1]), np.abs(st[cand, 0])))
            pick = cand[order[0]]
            kap = (int(kpts[pick, 0]), int(kpts[pick, 1]))
            rhs0 = p_next[0] - z[0] + kap[0]
            rhs1 = p_next[1] - z[1] + kap[1]
            s_mp, t_mp = solve_st(rhs0, rhs1)
            # z + t e_u = p_next + kappa + ... : new point on the stable segment
            x_new = (p_next[0] + (-s_mp) * e_s[0], p_next[1] + (-s_mp) * e_s[1])
            x_new = (x_new[0] - mp.floor(x_new[0]), x_new[1] - mp.floor(x_new[1]))
            glue_stats.append((abs(float(s_mp)), abs(float(t_mp)), float(avail)))
            x_cur = x_new

        # pull the last point back to time 0
        a_last = ivs[-1][0]
        x0 = _mp_march(sys, forcing, a_last, x_cur, 0)

        # certificate: exact anchor orbits vs the mpf orbit of x0
        cert = []
        per_int_max = []
        u_ledger = []
        s_ledger = []
        Minv_np = np.linalg.inv(np.stack([frame.e_u, frame.e_s], axis=1))
        for (a_i, b_i), anc in zip(ivs, anchors_int):
            x_t = _mp_march(sys, forcing, 0, x0, a_i)
            p_t = anc
            worst = 0.0
            umax = 0.0
            smax = 0.0
            t = a_i
            while True:
                dev = _wrapped_diff_float(x_t, p_t)
                dist = float(np.hypot(dev[0], dev[1]))
                cert.append((t, dist))
                worst = max(worst, dist)
                uc, sc = Minv_np @ dev
                umax = max(umax, abs(float(uc)))
                smax = max(smax, abs(float(sc)))
                if t == b_i:
                    break
                x_t = _mp_step(sys, forcing, t, x_t, forward=True)
                h0, h1 = forcing.ints(t)
                Tint, _ = _int_matrices(sys)
                p_t = ((Tint[0][0] * p_t[0] + Tint[0][1] * p_t[1] + h0) % ISCALE,
                       (Tint[1][0] * p_t[0] + Tint[1][1] * p_t[1] + h1) % ISCALE)
                t += 1
            per_int_max.append(worst)
            u_ledger.append(umax)
            s_ledger.append(smax)

        point = np.array([float(x0[0]), float(x0[1])])
        mp_point = (mp.nstr(x0[0], dps), mp.nstr(x0[1], dps))

    return ShadowResult(point=point, mp_point=mp_point, dps=dps,
                        certificate=tuple(cert),
                        max_distance=max(d for _, d in cert),
                        per_interval_max=tuple(per_int_max),
                        unstable_ledger=tuple(u_ledger),
                        stable_ledger=tuple(s_ledger),
                        gluing_offsets=tuple(glue_stats),
                        gamma=gamma, eps=eps, spacing_used=N)


def verify_shadowing(sys: SkewSystem, spec: OmegaSpecification, x, eps: float):
    """Exhaustive check d(F^t x, P(t)) < eps over all interval times.

    Accepts a ShadowResult (re-verified at its stored precision), a pair of
    high-precision decimal strings, or a float64 point (precision valid for
    horizons of roughly 30 steps; longer horizons need the former).
    Returns (ok, max_distance, worst_t, rows).
    """
    if not sys.is_affine_torus:
        raise NotAffine("verification requires an affine toral fiber system")
    if isinstance(x, ShadowResult):
        dps = x.dps
        xs = x.mp_point
    elif isinstance(x, tuple) and len(x) == 2 and isinstance(x[0], str):
        dps = max(_required_dps(sys, spec), 50)
        xs = x
    else:
        dps = max(_required_dps(sys, spec), 50)
        arr = np.asarray(x, dtype=float).reshape(2)
        xs = (repr(float(arr[0])), repr(float(arr[1])))
    forcing = _Forcing(sys, spec.omega)
    rows = []
    worst = (-1.0, None)
    with mp.workdps(dps):
        x0 = (mpf(xs[0]), mpf(xs[1]))
        anchors_int = [(int(round(p[0] * ISCALE)) % ISCALE,
                        int(round(p[1] * ISCALE)) % ISCALE) for p in spec.anchors]
        Tint, _ = _int_matrices(sys)
        for (a_i, b_i), anc in zip(spec.intervals, anchors_int):
            x_t = _mp_march(sys, forcing, 0, x0, a_i)
            p_t = anc
            t = a_i
            while True:
                dev = _wrapped_diff_float(x_t, p_t)
                dist = float(np.hypot(dev[0], dev[1]))
                rows.append((t, dist))
                if dist > worst[0]:
                    worst = (dist, t)
                if t == b_i:
                    break
                x_t = _mp_step(sys, forcing, t, x_t, forward=True)
                h0, h1 = forcing.ints(t)
                p_t = ((Tint[0][0] * p_t[0] + Tint[0][1] * p_t[1] + h0) % ISCALE,
                       (Tint[1][0] * p_t[0] + Tint[1][1] * p_t[1] + h1) % ISCALE)
                t += 1
    return worst[0] < eps, worst[0], worst[1], tuple(rows)


def certificate_csv(result: ShadowResult) -> str:
    lines = ["t,distance"]
    for t, d in result.certificate:
        lines.append(f"{t},{float(d)!r}")
    return "\n".join(lines) + "\n"


def random_specification(sys: SkewSystem, rng, k: int, spacing: int,
                         max_len: int = 10, consistent_orbit: bool = False):
    """Random m-spaced specification with gaps spacing + 1 (minimally spaced).

    With ``consistent_orbit`` the anchors all lie on one true orbit, so the
    shadow must return that orbit's point.
    """
    t = int(rng.integers(-3, 4))
    intervals = []
    for _ in range(k):
        ln = int(rng.integers(1, max_len + 1))
        intervals.append((t, t + ln))
        t = t + ln + spacing + 1
    omega = sys.driving.point(float(rng.random()))
    if consistent_orbit:
        forcing = _Forcing(sys, omega)
        x0 = snap(rng.random(2))
        nums = (int(round(x0[0] * ISCALE)), int(round(x0[1] * ISCALE)))
        anchors = []
        for a, _b in intervals:
            na = _int_orbit(sys, forcing, 0, nums, a)
            anchors.append((na[0] / ISCALE, na[1] / ISCALE))
    else:
        anchors = [tuple(snap(rng.random(2))) for _ in intervals]
    return OmegaSpecification(omega, tuple(intervals), tuple(anchors))
