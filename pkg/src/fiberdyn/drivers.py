"""Driving (base) dynamical systems.

Three bases are supported: an irrational circle rotation, the Sturmian
subshift obtained by rotation coding, and a trivial one-point base used by
the deterministic oracle system.

Base points carry an anchor coordinate plus an integer shift instead of a
single reduced coordinate.  Stepping only increments the shift, so the
group law ``step(w, s + t) == step(step(w, s), t)`` holds exactly in
floating point; the circle coordinate is materialised (reduced mod 1) on
demand.  Sturmian points are windows into the coding of the same rotation
orbit, regenerated lazily from (alpha, anchor, shift) — no stored word can
drift out of sync with its coding parameters.
"""

from dataclasses import dataclass, replace

import numpy as np

from .dyadic import circle_dist, mod1

#: default irrational rotation angle, sqrt(2) - 1
DEFAULT_ALPHA = 0.41421356237309515


@dataclass(frozen=True)
class BasePoint:
    """A point of the base space: anchor coordinate plus integer shift.

    For the one-point base both fields are ignored (there is a single
    point); for rotation and Sturmian bases the represented coordinate is
    ``frac(anchor + shift * alpha)``.
    """

    anchor: float = 0.0
    shift: int = 0


@dataclass(frozen=True)
class DrivingSystem:
    """Base system (Omega, theta): 'rotation', 'sturmian' or 'point'.

    ``alpha`` is contractually irrational; configured values must avoid
    small-denominator rationals (numerical irrationality).  All asserted
    properties hold at the resolutions tested, not asymptotically.
    """

    kind: str
    alpha: float = DEFAULT_ALPHA

    def __post_init__(self):
        if self.kind not in ("rotation", "sturmian", "point"):
            raise ValueError(f"unknown base kind {self.kind!r}")
        if self.kind != "point" and not (0.0 < self.alpha < 1.0):
            raise ValueError("rotation angle must lie in (0, 1)")

    def point(self, anchor=0.0):
        """Construct a base point from a circle coordinate in [0, 1)."""
        if self.kind == "point":
            return BasePoint(0.0, 0)
        return BasePoint(float(mod1(anchor)), 0)

    def coordinate(self, w: BasePoint) -> float:
        """Materialised circle coordinate of ``w`` in [0, 1)."""
        if self.kind == "point":
            return 0.0
        return float(mod1(w.anchor + w.shift * self.alpha))

    def symbol(self, w: BasePoint, i: int) -> int:
        """Sturmian symbol at index ``i`` of the word coded by ``w``."""
        if self.kind != "sturmian":
            raise ValueError("symbols are defined only for the sturmian base")
        return sturmian_symbol(self.alpha, self.coordinate(w), i)

    def window(self, w: BasePoint, radius: int):
        """Centered symbol window [-radius, radius] of the coded word."""
        return [self.symbol(w, i) for i in range(-radius, radius + 1)]


def base_step(sys: DrivingSystem, w: BasePoint, t: int) -> BasePoint:
    """Apply theta^t to a base point.  Total; exact group law by design."""
    if sys.kind == "point":
        return w
    return replace(w, shift=w.shift + int(t))


def sturmian_symbol(alpha: float, x0: float, i: int) -> int:
    """Rotation coding symbol: 1 if frac(x0 + i*alpha) in [0, 1-alpha), else 2."""
    y = mod1(x0 + i * alpha)
    return 1 if y < 1.0 - alpha else 2


def sturmian_symbols(alpha: float, x0: float, indices) -> np.ndarray:
    """Vectorised rotation coding over an index array."""
    idx = np.asarray(indices, dtype=float)
    y = mod1(x0 + idx * alpha)
    return np.where(y < 1.0 - alpha, 1, 2).astype(np.int64)


def base_distance(sys: DrivingSystem, w1: BasePoint, w2: BasePoint,
                  horizon: int = 60) -> float:
    """Distance on the base space.

    Circle: arc distance.  Sturmian: 2^-j where j is the first index, in
    the order 0, 1, -1, 2, -2, ..., at which the coded words disagree
    (0 if none disagrees up to ``horizon``).  Point base: 0.
    """
    if sys.kind == "point":
        return 0.0
    c1 = sys.coordinate(w1)
    c2 = sys.coordinate(w2)
    if sys.kind == "rotation":
        return float(circle_dist(c1, c2))
    for j in range(horizon + 1):
        for i in ((j,) if j == 0 else (j, -j)):
            if sturmian_symbol(sys.alpha, c1, i) != sturmian_symbol(sys.alpha, c2, i):
                return 2.0 ** (-abs(i))
    return 0.0
