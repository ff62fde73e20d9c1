"""Kernel backend selection.

The compiled Cython extension is preferred; the pure-numpy fallback is
used when the extension is missing or when FIBERDYN_PURE_PYTHON=1 is set.
Both expose the same functions with identical numerical semantics:
`greedy_separated`, `cover_matrix`, `pairwise_bowen`, `min_pairwise_bowen`.
"""

import os

from . import _fallback

if os.environ.get("FIBERDYN_PURE_PYTHON") == "1":
    _impl = _fallback
else:
    try:
        from . import _native as _impl
    except ImportError:
        _impl = _fallback

BACKEND = _impl.BACKEND
greedy_separated = _impl.greedy_separated
cover_matrix = _impl.cover_matrix
pairwise_bowen = _impl.pairwise_bowen
min_pairwise_bowen = _impl.min_pairwise_bowen


def backends():
    """All importable backends, for parity tests and benchmarks."""
    out = {"fallback": _fallback}
    try:
        from . import _native
        out["native"] = _native
    except ImportError:
        pass
    return out
