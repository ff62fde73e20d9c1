"""Pure-numpy implementations of the hot kernels.

Semantics (and IEEE arithmetic) mirror the Cython backend exactly: wrapped
per-coordinate differences, squared Euclidean norms per time step, strict
comparison against eps^2.  The native and fallback backends must return
identical results on identical inputs; tests enforce this.
"""

import numpy as np

BACKEND = "fallback"


def _wrap(d):
    return d - np.floor(d + 0.5)


def _sq_dists(orbits, i, sel_idx):
    """Squared wrapped distances of candidate i vs selected rows, per time."""
    d = _wrap(orbits[sel_idx] - orbits[i])
    return np.sum(d * d, axis=-1)         # (n_sel, n)


def greedy_separated(orbits, eps):
    """Greedy lexicographic maximal separated subset.

    orbits: (N, n, d) float64 array of fiber orbits.  A candidate is
    accepted when, against every already-selected point, some time step
    has squared distance > eps^2 (strict Bowen separation).
    Returns the selected indices (int64).
    """
    orbits = np.ascontiguousarray(orbits, dtype=np.float64)
    N = orbits.shape[0]
    eps2 = eps * eps
    selected = []
    sel_arr = None
    for i in range(N):
        if selected:
            sq = _sq_dists(orbits, i, sel_arr)
            # rejected if some selected point is eps-close at *every* time
            if np.any(np.max(sq, axis=1) <= eps2):
                continue
        selected.append(i)
        sel_arr = np.array(selected, dtype=np.intp)
    return np.array(selected, dtype=np.int64)


def cover_matrix(orbits, eps):
    """Closed Bowen-ball membership matrix: m[i, j] = 1 iff d_n(i, j) <= eps."""
    orbits = np.ascontiguousarray(orbits, dtype=np.float64)
    N = orbits.shape[0]
    eps2 = eps * eps
    out = np.zeros((N, N), dtype=np.uint8)
    for i in range(N):
        d = _wrap(orbits - orbits[i])
        sq = np.sum(d * d, axis=-1)        # (N, n)
        out[i] = (np.max(sq, axis=1) <= eps2).astype(np.uint8)
    return out


def pairwise_bowen(orbits, pairs):
    """Bowen distances for an explicit (k, 2) array of index pairs."""
    orbits = np.ascontiguousarray(orbits, dtype=np.float64)
    pairs = np.asarray(pairs, dtype=np.int64)
    d = _wrap(orbits[pairs[:, 0]] - orbits[pairs[:, 1]])
    sq = np.sum(d * d, axis=-1)
    return np.sqrt(np.max(sq, axis=1))


def min_pairwise_bowen(orbits):
    """Minimum Bowen distance over all unordered pairs."""
    orbits = np.ascontiguousarray(orbits, dtype=np.float64)
    N = orbits.shape[0]
    best = np.inf
    for i in range(N - 1):
        d = _wrap(orbits[i + 1:] - orbits[i])
        sq = np.sum(d * d, axis=-1)
        m = np.max(sq, axis=1).min()
        if m < best:
            best = m
    return float(np.sqrt(best)) if np.isfinite(best) else float("inf")
