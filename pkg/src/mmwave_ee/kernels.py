"""Kernel dispatch: compiled extension when importable, NumPy otherwise.

Set ``MMWAVE_EE_PURE_PYTHON=1`` before import to force the fallback.
"""
import os

import numpy as np

from . import _kernels_py

try:
    if os.environ.get("MMWAVE_EE_PURE_PYTHON"):
        raise ImportError("compiled kernels disabled by environment")
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

BACKEND = "compiled" if _compiled is not None else "python"


def scaled_moments(u, w, m: int, nmax: int, backend: str | None = None):
    """Dispatch to the compiled or NumPy kernel.

    Complex input always goes to NumPy.  ``backend`` forces a choice
    ("compiled" or "python") and is used by tests and the benchmark.
    """
    use = backend or BACKEND
    if use == "compiled" and _compiled is None:
        raise RuntimeError("compiled kernels are not available")
    if use == "compiled" and not (np.iscomplexobj(u) or np.iscomplexobj(w)):
        u2 = np.ascontiguousarray(u, dtype=np.float64)
        w2 = np.ascontiguousarray(w, dtype=np.float64)
        shape = u2.shape
        out = _compiled.scaled_moments(
            u2.reshape(-1, shape[-1]), w2.reshape(-1, shape[-1]), int(m), int(nmax)
        )
        return out.reshape(shape[:-1] + (nmax + 1,))
    return _kernels_py.scaled_moments(u, w, m, nmax)
