"""NumPy implementation of the interference-moment kernel.

Also the only path for complex input (complex-step tilt derivatives).
"""
import numpy as np


def scaled_moments(u, w, m, nmax):
    """Weighted sums of the Nakagami interference kernel and its scaled derivatives.

    For each row, with ``u = z c(x)`` at the quadrature nodes::

        S_0 = sum_j w_j (1 - (1 + u_j)^-m)
        S_n = sum_j w_j u_j^n (1 + u_j)^-(m+n),   n = 1..nmax

    Parameters
    ----------
    u, w : ndarray, shape (rows, nodes)
        Kernel arguments and quadrature weights.  Zero-weight entries are
        padding.
    m : int
        Nakagami shape of the interfering links.
    nmax : int
        Highest derivative order.

    Returns
    -------
    ndarray, shape (rows, nmax + 1)
    """
    u = np.asarray(u)
    w = np.asarray(w)
    dtype = np.result_type(u, w, np.float64)
    lt = np.log1p(u)
    out = np.empty(u.shape[:-1] + (nmax + 1,), dtype=dtype)
    out[..., 0] = -np.sum(w * np.expm1(-m * lt), axis=-1)
    if nmax:
        base = w * np.exp(-m * lt)
        q = u / (1.0 + u)
        for n in range(1, nmax + 1):
            base = base * q
            out[..., n] = base.sum(axis=-1)
    return out
