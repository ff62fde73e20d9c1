"""Skew product systems: fiber map families over a driving system.

Three fiber families are implemented:

* ``affine_torus`` — F_w(x) = T x + h(w) on the 2-torus, with T an integer
  hyperbolic matrix of determinant +-1 and h a finite Fourier sum evaluated
  at the circle coordinate of the base point;
* ``matrix_cocycle`` — F_w = B_{w_0} on the 2-torus, the generator selected
  by the symbol at index 0 of a Sturmian base point;
* ``doubling`` — x -> 2x mod 1 on the circle over the one-point base, a
  forward-only deterministic oracle with exactly computable statistics.

All fiber coordinates live on the dyadic grid of `.dyadic`, and the forcing
values h(w) are snapped to that grid, so iteration is exact: the cocycle
law and forward/backward inversion hold bit-for-bit, and orbit differences
of the affine system are independent of the base point exactly (the forcing
cancels), not merely up to rounding.
"""

import configparser
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .drivers import BasePoint, DrivingSystem, base_step
from .dyadic import check_exact_matrix, mod1, snap, torus_dist, wrap_half
from .errors import (BackwardNotInvertible, ConfigError, EpsilonTooLarge,
                     NotAffine, NotHyperbolic)


@dataclass(frozen=True)
class FourierMap:
    """Forcing map h: T -> T^2 as finite Fourier sums per output coordinate.

    h_j(w) = sum_m a[j, m-1] * cos(2 pi m w) + b[j, m-1] * sin(2 pi m w).
    """

    cos_coeffs: tuple = ((), ())
    sin_coeffs: tuple = ((), ())

    def __call__(self, w_coord):
        w = np.asarray(w_coord, dtype=float)
        out = np.zeros(w.shape + (2,))
        for j in range(2):
            for m, a in enumerate(self.cos_coeffs[j], start=1):
                out[..., j] += a * np.cos(2.0 * np.pi * m * w)
            for m, b in enumerate(self.sin_coeffs[j], start=1):
                out[..., j] += b * np.sin(2.0 * np.pi * m * w)
        return snap(out)

    @property
    def is_zero(self):
        return not any(self.cos_coeffs) and not any(self.sin_coeffs)


def _int_inverse(M):
    """Exact inverse of an integer 2x2 matrix with determinant +-1."""
    a, b, c, d = int(M[0, 0]), int(M[0, 1]), int(M[1, 0]), int(M[1, 1])
    det = a * d - b * c
    if abs(det) != 1:
        raise ValueError("matrix determinant must be +-1")
    inv = np.array([[d, -b], [-c, a]], dtype=np.int64) * det
    return inv


@dataclass(frozen=True)
class HyperbolicFrame:
    """Constant unstable/stable splitting of an affine toral system."""

    e_u: np.ndarray
    e_s: np.ndarray
    lam_u: float
    lam_s: float
    sin_angle: float

    @property
    def log_expansion(self):
        return math.log(self.lam_u)


@dataclass(frozen=True)
class ExpansivityReport:
    """Certified fiber-expansivity constant and separation horizons."""

    eta: float
    horizons: dict
    min_expansion: float
    max_opnorm: float
    certificate: str


@dataclass(frozen=True)
class SkewSystem:
    driving: DrivingSystem
    fiber_kind: str                      # affine_torus | matrix_cocycle | doubling
    matrix: np.ndarray = None            # affine_torus
    forcing: FourierMap = field(default_factory=FourierMap)
    cocycle: tuple = ()                  # matrix_cocycle generators

    def __post_init__(self):
        if self.fiber_kind == "affine_torus":
            M = check_exact_matrix(self.matrix, "fiber matrix")
            object.__setattr__(self, "matrix", M)
            if abs(int(round(np.linalg.det(M)))) != 1:
                raise ConfigError("matrix", "affine fiber matrix must have |det| = 1")
            check_exact_matrix(_int_inverse(M), "fiber matrix inverse")
            if self.driving.kind not in ("rotation", "point"):
                raise ConfigError("base", "affine torus fibers need a rotation or point base")
        elif self.fiber_kind == "matrix_cocycle":
            if not self.cocycle:
                raise ConfigError("matrices", "matrix cocycle needs at least one generator")
            gens = []
            for i, B in enumerate(self.cocycle):
                B = check_exact_matrix(B, f"generator {i + 1}")
                if np.any(B <= 0):
                    raise ConfigError("matrices",
                                      f"generator {i + 1} must have strictly positive entries")
                if abs(int(B[0, 0] * B[1, 1] - B[0, 1] * B[1, 0])) != 1:
                    raise ConfigError("matrices", f"generator {i + 1} must have |det| = 1")
                check_exact_matrix(_int_inverse(B), f"generator {i + 1} inverse")
                gens.append(B)
            object.__setattr__(self, "cocycle", tuple(gens))
            if self.driving.kind != "sturmian":
                raise ConfigError("base", "matrix cocycles are driven by the sturmian base")
            if len(self.cocycle) > 2:
                raise ConfigError("matrices", "sturmian coding selects between two generators")
        elif self.fiber_kind == "doubling":
            if self.driving.kind != "point":
                raise ConfigError("base", "the doubling oracle runs over the one-point base")
        else:
            raise ConfigError("fiber", f"unknown fiber kind {self.fiber_kind!r}")

    # -- geometry ---------------------------------------------------------

    @property
    def fiber_dim(self):
        return 1 if self.fiber_kind == "doubling" else 2

    @property
    def invertible(self):
        return self.fiber_kind != "doubling"

    @property
    def is_affine_torus(self):
        return self.fiber_kind == "affine_torus"

    def fiber_point(self, coords):
        """Snap raw coordinates (a point or a batch) onto the dyadic grid."""
        x = snap(np.asarray(coords, dtype=float))
        if self.fiber_dim == 1:
            arr = np.asarray(x)
            return float(arr.reshape(())) if arr.ndim == 0 or arr.size == 1 \
                else arr
        return np.asarray(x, dtype=float).reshape(-1, 2) \
            if np.asarray(x).size > 2 else np.asarray(x, dtype=float).reshape(2)

    def fiber_distance(self, x, y):
        if self.fiber_dim == 1:
            return float(np.abs(wrap_half(np.asarray(x) - np.asarray(y))))
        return float(torus_dist(x, y))

    # -- step selection ---------------------------------------------------

    def _generator_at(self, w: BasePoint, t: int):
        """Integer matrix applied when stepping from time t to t+1."""
        if self.fiber_kind == "affine_torus":
            return self.matrix
        sym = self.driving.symbol(base_step(self.driving, w, t), 0)
        idx = min(sym - 1, len(self.cocycle) - 1)
        return self.cocycle[idx]

    def _forcing_at(self, w: BasePoint, t: int):
        if self.fiber_kind != "affine_torus" or self.forcing.is_zero:
            return None
        coord = self.driving.coordinate(base_step(self.driving, w, t))
        return self.forcing(coord)


def fiber_step(sys: SkewSystem, w: BasePoint, x, t: int):
    """Apply F_w^t to a fiber point, exact on the dyadic grid.

    Backward steps use exact integer inverse matrices; requesting t < 0 on
    the doubling oracle raises BackwardNotInvertible.
    """
    t = int(t)
    if sys.fiber_kind == "doubling":
        if t < 0:
            raise BackwardNotInvertible("the doubling oracle has no inverse branch")
        x = float(np.asarray(x).reshape(()))
        for _ in range(t):
            x = mod1(2.0 * x)
        return x

    x = np.asarray(x, dtype=float).reshape(2)
    if t >= 0:
        for i in range(t):
            M = sys._generator_at(w, i)
            h = sys._forcing_at(w, i)
            x = M @ x if h is None else M @ x + h
            x = mod1(x)
    else:
        for i in range(-1, t - 1, -1):
            M = _int_inverse(sys._generator_at(w, i))
            h = sys._forcing_at(w, i)
            x = M @ x if h is None else M @ (x - h)
            x = mod1(x)
    return x


def orbit_points(sys: SkewSystem, w: BasePoint, X, n: int):
    """Iterates F_w^i X for i = 0..n-1 over a batch of fiber points.

    Returns an array of shape (N, n) for circle fibers or (N, n, 2) for
    torus fibers.  Bit-identical to repeated `fiber_step`.
    """
    n = int(n)
    if sys.fiber_dim == 1:
        X = np.atleast_1d(np.asarray(X, dtype=float))
        out = np.empty((X.shape[0], n))
        cur = X.copy()
        for i in range(n):
            out[:, i] = cur
            cur = mod1(2.0 * cur)
        return out

    X = np.asarray(X, dtype=float).reshape(-1, 2)
    out = np.empty((X.shape[0], n, 2))
    cur = X.copy()
    for i in range(n):
        out[:, i, :] = cur
        if i + 1 < n:
            M = sys._generator_at(w, i)
            h = sys._forcing_at(w, i)
            cur = cur @ M.T.astype(float)
            if h is not None:
                cur = cur + h
            cur = mod1(cur)
    return out


def bowen_distance(sys: SkewSystem, w: BasePoint, x, y, n: int) -> float:
    """Fiber Bowen metric: max_{0 <= i < n} d(F_w^i x, F_w^i y)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if sys.fiber_dim == 1:
        ox = orbit_points(sys, w, [x], n)[0]
        oy = orbit_points(sys, w, [y], n)[0]
        return float(np.max(np.abs(wrap_half(ox - oy))))
    ox = orbit_points(sys, w, x, n)[0]
    oy = orbit_points(sys, w, y, n)[0]
    return float(np.max(torus_dist(ox, oy)))


def hyperbolic_frame(sys: SkewSystem) -> HyperbolicFrame:
    """Eigen-splitting of the affine fiber matrix.

    Raises NotHyperbolic when no real eigenvalue has modulus > 1 (for
    det = 1 this is |trace| <= 2).
    """
    if not sys.is_affine_torus:
        raise NotAffine("hyperbolic frame requires an affine toral system")
    M = sys.matrix.astype(float)
    tr = M[0, 0] + M[1, 1]
    det = float(round(np.linalg.det(M)))
    disc = tr * tr - 4.0 * det
    if disc <= 0:
        raise NotHyperbolic(f"trace {tr}, det {det}: complex eigenvalues")
    root = math.sqrt(disc)
    mu1 = (tr + root) / 2.0
    mu2 = (tr - root) / 2.0
    mu_u, mu_s = (mu1, mu2) if abs(mu1) >= abs(mu2) else (mu2, mu1)
    if abs(mu_u) <= 1.0 + 1e-12:
        raise NotHyperbolic(f"largest eigenvalue modulus {abs(mu_u)} is not > 1")

    def unit_eigvec(mu):
        a, b, c, d = M[0, 0], M[0, 1], M[1, 0], M[1, 1]
        v1 = np.array([b, mu - a])
        v2 = np.array([mu - d, c])
        v = v1 if np.linalg.norm(v1) >= np.linalg.norm(v2) else v2
        v = v / np.linalg.norm(v)
        if v[0] < 0 or (v[0] == 0 and v[1] < 0):
            v = -v
        return v

    e_u = unit_eigvec(mu_u)
    e_s = unit_eigvec(mu_s)
    sin_angle = float(abs(e_u[0] * e_s[1] - e_u[1] * e_s[0]))
    return HyperbolicFrame(e_u=e_u, e_s=e_s, lam_u=abs(mu_u), lam_s=abs(mu_s),
                           sin_angle=sin_angle)


def _operator_norms(sys: SkewSystem):
    if sys.is_affine_torus:
        mats = [sys.matrix]
    elif sys.fiber_kind == "matrix_cocycle":
        mats = list(sys.cocycle)
    else:
        raise NotAffine("expansivity constants are defined for toral fiber systems")
    return [float(np.linalg.norm(M.astype(float), 2)) for M in mats]


def min_expansion_rate(sys: SkewSystem) -> float:
    """Certified uniform expansion rate of the unstable cone.

    Affine: the unstable eigenvalue.  Matrix cocycle: every generator has
    strictly positive entries >= 1, so on the positive cone each component
    of B v dominates v1 + v2, giving |B v| >= sqrt(2) |v|.
    """
    if sys.is_affine_torus:
        return hyperbolic_frame(sys).lam_u
    if sys.fiber_kind == "matrix_cocycle":
        return math.sqrt(2.0)
    if sys.fiber_kind == "doubling":
        return 2.0
    raise NotAffine("no certified expansion rate")


def expansivity_eta(sys: SkewSystem) -> float:
    """The certified fiber-expansivity constant 1 / (4 (1 + max opnorm))."""
    return 1.0 / (4.0 * (1.0 + max(_operator_norms(sys))))


def expansivity_constants(sys: SkewSystem, eps: float) -> ExpansivityReport:
    """Certified expansivity constant eta and separation horizon L(eps).

    eta = 1 / (4 (1 + max operator norm)): if two orbits stay eta-close at
    every time, minimal lifts stay minimal step after step (||M|| eta < 1/4
    prevents wrap-around), so the difference vector obeys the linear
    expansion/contraction bounds globally and both components must vanish.
    L(eps) is the smallest L with min_expansion^L * eps > 1/2 (0 when
    eps > eta: nothing to separate).
    """
    if not (0.0 < eps < 0.25):
        raise ValueError("eps must lie in (0, 1/4)")
    norms = _operator_norms(sys)
    maxnorm = max(norms)
    eta = 1.0 / (4.0 * (1.0 + maxnorm))
    rate = min_expansion_rate(sys)
    if eps > eta:
        L = 0
    else:
        L = 0
        while rate**L * eps <= 0.5:
            L += 1
    cert = (f"eta certified by minimal-lift induction: max opnorm {maxnorm:.6f}, "
            f"opnorm*eta = {maxnorm * eta:.6f} < 1/4; horizon from expansion rate "
            f"{rate:.6f} per step")
    return ExpansivityReport(eta=eta, horizons={eps: L}, min_expansion=rate,
                             max_opnorm=maxnorm, certificate=cert)


# -- exact Bowen-ball geometry (frame max-metric) --------------------------

def frame_coordinates(frame: HyperbolicFrame, v):
    """Coordinates of vectors in the (e_u, e_s) basis."""
    v = np.asarray(v, dtype=float)
    B = np.stack([frame.e_u, frame.e_s], axis=1)
    sol = np.linalg.solve(B, v.reshape(-1, 2).T).T
    return sol.reshape(v.shape)


def frame_max_torus_dist(frame: HyperbolicFrame, p, q):
    """Frame max-metric distance on the torus (min over 9 lattice lifts)."""
    d = wrap_half(np.asarray(p, dtype=float) - np.asarray(q, dtype=float))
    d = d.reshape(-1, 2)
    shifts = np.array([[i, j] for i in (-1, 0, 1) for j in (-1, 0, 1)], dtype=float)
    lifts = d[:, None, :] + shifts[None, :, :]
    uv = frame_coordinates(frame, lifts.reshape(-1, 2)).reshape(d.shape[0], 9, 2)
    vals = np.max(np.abs(uv), axis=2).min(axis=1)
    return vals if vals.shape[0] > 1 else float(vals[0])


def frame_bowen_distance(sys: SkewSystem, w: BasePoint, x, y, n: int) -> float:
    """Bowen distance in the auxiliary frame max-metric."""
    frame = hyperbolic_frame(sys)
    ox = orbit_points(sys, w, x, n)[0]
    oy = orbit_points(sys, w, y, n)[0]
    vals = [frame_max_torus_dist(frame, ox[i], oy[i]) for i in range(n)]
    return float(np.max(vals))


def bowen_ball_area(sys: SkewSystem, n: int, eps: float) -> float:
    """Exact Lebesgue area of the frame max-metric Bowen ball.

    The ball of radius eps in d^max_n is the parallelogram of half-widths
    eps * lam_u^-(n-1) along e_u and eps along e_s, independent of the
    centre and of the base point (the forcing is a translation).
    """
    if eps >= 0.25:
        raise EpsilonTooLarge("eps must stay below the injectivity scale 1/4")
    if n < 1:
        raise ValueError("n must be >= 1")
    frame = hyperbolic_frame(sys)
    a = eps * frame.lam_u ** (-(n - 1))
    b = eps
    return 4.0 * a * b * frame.sin_angle


def metric_equivalence_constants(frame: HyperbolicFrame):
    """(c1, c2) with c1*maxmetric <= euclid <= c2*maxmetric for the frame."""
    cos = abs(float(frame.e_u @ frame.e_s))
    return frame.sin_angle, math.sqrt(2.0 + 2.0 * cos)


# -- system description files ----------------------------------------------

def _parse_floats(text):
    return [float(tok) for tok in text.replace(",", " ").split()]


def _parse_matrix(text, field_name):
    vals = _parse_floats(text)
    if len(vals) != 4:
        raise ConfigError(field_name, "expected 4 entries (row-major 2x2)")
    return np.array(vals).reshape(2, 2)


def system_from_section(section) -> SkewSystem:
    """Build a SkewSystem from a key-value mapping (one config section).

    Schema: ``base`` (rotation|sturmian|point), ``alpha`` (irrational in
    (0,1)), ``fiber`` (affine_torus|matrix_cocycle|doubling), ``matrix``
    (4 ints, row-major), ``h<j>_cos`` / ``h<j>_sin`` (Fourier coefficient
    lists for j = 1, 2) and ``matrices`` (semicolon-separated generators).
    """
    base = section.get("base", "").strip()
    if not base:
        raise ConfigError("base", "missing base kind")
    alpha = section.get("alpha", "").strip()
    driving = DrivingSystem(base, float(alpha)) if alpha else DrivingSystem(base)

    fiber = section.get("fiber", "").strip()
    if not fiber:
        raise ConfigError("fiber", "missing fiber kind")
    if fiber == "affine_torus":
        if "matrix" not in section:
            raise ConfigError("matrix", "affine torus fiber needs a matrix")
        T = _parse_matrix(section["matrix"], "matrix")
        cos_c, sin_c = [], []
        for j in (1, 2):
            cos_c.append(tuple(_parse_floats(section.get(f"h{j}_cos", ""))))
            sin_c.append(tuple(_parse_floats(section.get(f"h{j}_sin", ""))))
        forcing = FourierMap(tuple(cos_c), tuple(sin_c))
        return SkewSystem(driving, "affine_torus", matrix=T, forcing=forcing)
    if fiber == "matrix_cocycle":
        if "matrices" not in section:
            raise ConfigError("matrices", "matrix cocycle needs generators")
        gens = [_parse_matrix(part, "matrices")
                for part in section["matrices"].split(";") if part.strip()]
        return SkewSystem(driving, "matrix_cocycle", cocycle=tuple(gens))
    if fiber == "doubling":
        return SkewSystem(driving, "doubling")
    raise ConfigError("fiber", f"unknown fiber kind {fiber!r}")


def load_system(path) -> SkewSystem:
    """Load and validate a system description file."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    if hasattr(path, "read"):
        parser.read_file(path)
    else:
        with io.open(path, "r", encoding="utf-8") as fh:
            parser.read_file(fh)
    if "system" not in parser:
        raise ConfigError("system", "missing [system] section")
    return system_from_section(parser["system"])
