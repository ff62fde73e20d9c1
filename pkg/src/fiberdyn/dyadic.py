"""Dyadic fixed-point grid for fiber coordinates.

Fiber points are snapped to the grid (1/2^48)·Z on construction.  Integer
matrices with small entries then act *exactly* in float64: a product
``t*x`` with ``|t| <= 15`` and ``x`` carrying 48 fractional bits needs at
most 52 mantissa bits, so sums of two such products plus one more grid
value round to nothing.  Orbit identities (cocycle law, forward/backward
inversion, cancellation of the forcing term in orbit differences) hold
bit-for-bit instead of merely to rounding accuracy.
"""

import numpy as np

GRID_BITS = 48
SCALE = float(2**GRID_BITS)
ISCALE = 2**GRID_BITS

# integer matrices acting on the grid must keep |row| sums below this for
# float64 products/sums to stay exact (see module docstring)
MAX_EXACT_ROWSUM = 15


def snap(x):
    """Round to the nearest grid multiple of 2^-48, reduced into [0, 1)."""
    x = np.asarray(x, dtype=float)
    out = np.floor(x * SCALE + 0.5) / SCALE
    out = out - np.floor(out)
    return out if out.ndim else float(out)


def mod1(x):
    """Reduce into [0, 1); exact on grid values.

    Uses floor subtraction with a correction so the result never escapes
    the half-open interval by one ulp.
    """
    x = np.asarray(x, dtype=float)
    out = x - np.floor(x)
    out = np.where(out >= 1.0, out - 1.0, out)
    return out if out.ndim else float(out)


def wrap_half(d):
    """Wrap a coordinate difference into [-1/2, 1/2)."""
    d = np.asarray(d, dtype=float)
    out = d - np.floor(d + 0.5)
    return out if out.ndim else float(out)


def circle_dist(a, b):
    """Arc distance on R/Z."""
    return np.abs(wrap_half(np.asarray(a, dtype=float) - b))


def torus_dist(p, q):
    """Euclidean distance on the flat 2-torus (minimum over lattice translates).

    Because the lattice is the orthogonal Z^2, minimising over the nine
    nearest translates decomposes into per-coordinate wrapping.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    d = wrap_half(p - q)
    return np.sqrt(np.sum(np.square(d), axis=-1))


def check_exact_matrix(M, name="matrix"):
    """Validate that an integer matrix acts exactly on the dyadic grid."""
    M = np.asarray(M)
    if M.shape != (2, 2):
        raise ValueError(f"{name} must be 2x2, got {M.shape}")
    if not np.all(M == np.round(M)):
        raise ValueError(f"{name} must have integer entries")
    rowsum = np.abs(M).sum(axis=1).max()
    if rowsum > MAX_EXACT_ROWSUM:
        raise ValueError(
            f"{name} row sums exceed {MAX_EXACT_ROWSUM}; exact grid arithmetic not guaranteed"
        )
    return M.astype(np.int64)
