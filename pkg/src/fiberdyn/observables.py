"""Observables on base x fiber and their Birkhoff sums.

Supported kinds:

* ``constant`` — phi = c everywhere (``zero`` is the c = 0 shorthand);
* ``trig`` — a real trigonometric polynomial in the fiber coordinates,
  phi(w, x) = c0 + sum_k a_k cos(2 pi m_k . x) + b_k sin(2 pi m_k . x);
* ``product`` — g(w) * f(x) with g a trig polynomial in the circle
  coordinate of the base and f as above;
* ``digit`` — the first binary digit of a circle point (indicator of
  [1/2, 1)), the symbolic observable of the doubling oracle.

Every kind evaluates exactly (closed-form trig / indicator); the ``scale``
field implements q * phi for pressure curves without rebuilding terms.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from .drivers import BasePoint, base_step
from .errors import ConfigError
from .systems import SkewSystem, orbit_points


@dataclass(frozen=True)
class Observable:
    kind: str = "zero"
    value: float = 0.0                 # constant kind
    terms: tuple = ()                  # ((m1, m2, a_cos, a_sin), ...)
    const: float = 0.0                 # constant offset of the trig part
    base_terms: tuple = ()             # product kind: ((m, a_cos, a_sin), ...)
    base_const: float = 0.0
    scale: float = 1.0
    offset: float = 0.0                # additive shift, applied after scale

    def __post_init__(self):
        if self.kind not in ("zero", "constant", "trig", "product", "digit"):
            raise ConfigError("observable", f"unknown kind {self.kind!r}")

    # -- algebra ---------------------------------------------------------

    def scaled(self, q: float) -> "Observable":
        """The observable q * phi."""
        q = float(q)
        return replace(self, scale=self.scale * q, offset=self.offset * q)

    def shifted(self, c: float) -> "Observable":
        """The observable phi + c (exact for partition sums)."""
        return replace(self, offset=self.offset + float(c))

    # -- structure -------------------------------------------------------

    @property
    def is_constant(self) -> bool:
        if self.kind in ("zero", "constant"):
            return True
        return self.kind == "trig" and not self.terms

    @property
    def constant_value(self) -> float:
        if self.kind == "zero":
            return self.offset
        if self.kind == "constant":
            return self.scale * self.value + self.offset
        if self.kind == "trig" and not self.terms:
            return self.scale * self.const + self.offset
        raise ValueError("not a constant observable")

    @property
    def sup_norm_bound(self) -> float:
        """Computable upper bound on the C^0 norm."""
        s = abs(self.scale)
        off = abs(self.offset)
        if self.kind in ("zero", "constant"):
            return off + (s * abs(self.value) if self.kind == "constant" else 0.0)
        if self.kind == "digit":
            return s + off
        fib = abs(self.const) + sum(math.hypot(a, b) for _, _, a, b in self.terms)
        if self.kind == "trig":
            return s * fib + off
        bas = abs(self.base_const) + sum(math.hypot(a, b) for _, a, b in self.base_terms)
        return s * fib * bas + off

    @property
    def lipschitz_bound(self):
        """Fiber Lipschitz constant bound; None for the discontinuous digit."""
        if self.kind == "digit":
            return None
        if self.is_constant:
            return 0.0
        fib = sum(2.0 * math.pi * math.hypot(m1, m2) * math.hypot(a, b)
                  for m1, m2, a, b in self.terms)
        if self.kind == "trig":
            return abs(self.scale) * fib
        bas = abs(self.base_const) + sum(math.hypot(a, b) for _, a, b in self.base_terms)
        return abs(self.scale) * fib * bas

    # -- evaluation --------------------------------------------------------

    def _fiber_part(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            x1, x2 = X, 0.0
        else:
            x1, x2 = X[..., 0], X[..., 1]
        out = np.full(np.shape(x1), self.const, dtype=float)
        for m1, m2, a, b in self.terms:
            phase = 2.0 * np.pi * (m1 * x1 + m2 * x2)
            if a:
                out += a * np.cos(phase)
            if b:
                out += b * np.sin(phase)
        return out

    def _base_part(self, w_coord):
        out = self.base_const
        for m, a, b in self.base_terms:
            phase = 2.0 * math.pi * m * w_coord
            out += a * math.cos(phase) + b * math.sin(phase)
        return out

    def evaluate(self, X, w_coord=0.0):
        """phi at fiber points X over base coordinate w_coord.

        X is a batch: shape (N,) for circle fibers, (N, 2) for torus
        fibers (a bare scalar is accepted for circle fibers).
        """
        if self.kind in ("zero", "constant"):
            X = np.asarray(X, dtype=float)
            shape = X.shape[:-1] if X.ndim == 2 else X.shape
            return np.full(shape, self.constant_value)
        if self.kind == "digit":
            X = np.asarray(X, dtype=float)
            return self.scale * (X >= 0.5).astype(float) + self.offset
        if self.kind == "trig":
            return self.scale * self._fiber_part(X) + self.offset
        return self.scale * self._base_part(w_coord) * self._fiber_part(X) + self.offset


def birkhoff_sums(sys: SkewSystem, phi: Observable, w: BasePoint, X, n: int):
    """S_n phi(w, x) = sum_{i<n} phi(Theta^i(w, x)) over a batch of points.

    Constant observables short-circuit to n*c without orbit evaluation.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    X = np.asarray(X, dtype=float)
    if sys.fiber_dim == 1:
        npts = np.atleast_1d(X).shape[0]
    else:
        npts = X.reshape(-1, 2).shape[0]
    if phi.is_constant:
        return np.full(npts, n * phi.constant_value)
    orbits = orbit_points(sys, w, X, n)
    total = np.zeros(orbits.shape[0])
    for i in range(n):
        coord = sys.driving.coordinate(base_step(sys.driving, w, i))
        Xi = orbits[:, i] if sys.fiber_dim == 1 else orbits[:, i, :]
        total += phi.evaluate(Xi, coord)
    return total


def birkhoff_sum(sys: SkewSystem, phi: Observable, w: BasePoint, x, n: int) -> float:
    """Scalar Birkhoff sum."""
    if sys.fiber_dim == 1:
        return float(birkhoff_sums(sys, phi, w, np.atleast_1d(x), n)[0])
    return float(birkhoff_sums(sys, phi, w, np.asarray(x).reshape(1, 2), n)[0])


def observable_from_section(section) -> Observable:
    """Parse an observable description from a config section.

    Schema: ``kind`` plus ``value`` (constant), ``terms`` (semicolon list of
    ``m1 m2 a_cos a_sin``), ``const``, ``base_terms`` (``m a_cos a_sin``),
    ``base_const``.
    """
    kind = section.get("kind", "zero").strip()
    if kind in ("zero", "digit"):
        return Observable(kind)
    if kind == "constant":
        try:
            return Observable("constant", value=float(section["value"]))
        except KeyError:
            raise ConfigError("value", "constant observable needs a value")
    def parse_terms(text, width, name):
        out = []
        for part in text.split(";"):
            part = part.strip()
            if not part:
                continue
            vals = [float(t) for t in part.split()]
            if len(vals) != width:
                raise ConfigError(name, f"each term needs {width} numbers")
            if width == 4:
                out.append((int(vals[0]), int(vals[1]), vals[2], vals[3]))
            else:
                out.append((int(vals[0]), vals[1], vals[2]))
        return tuple(out)
    terms = parse_terms(section.get("terms", ""), 4, "terms")
    const = float(section.get("const", "0"))
    if kind == "trig":
        return Observable("trig", terms=terms, const=const)
    if kind == "product":
        base_terms = parse_terms(section.get("base_terms", ""), 3, "base_terms")
        base_const = float(section.get("base_const", "0"))
        return Observable("product", terms=terms, const=const,
                          base_terms=base_terms, base_const=base_const)
    raise ConfigError("kind", f"unknown observable kind {kind!r}")
