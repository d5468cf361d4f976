"""Numpy implementation of the fractional-Euler segment kernel.

This is the fallback used when the compiled extension is unavailable; the
two backends must agree to ~1e-12 (enforced in tests).  The history
contraction ``weights[n::-1] @ hist[:n+1]`` is the O(E^2) term of the
scheme and runs through BLAS here.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

BACKEND = "numpy"


def segment_grand(indptr, indices, data, z0, weights, scale,
                  return_history=False):
    """One memory segment of the explicit fractional Euler scheme.

    Computes, for n = 0 .. E-1 with E = len(weights):

        F_n     = A z_n - z_n              (A given in CSR form)
        z_{n+1} = z_0 + scale * sum_{j<=n} weights[n-j] * F_j

    and returns z_E (plus the stored history when requested).
    """
    n_nodes, width = z0.shape
    a = sp.csr_matrix((data, indices, indptr), shape=(n_nodes, n_nodes))
    n_steps = len(weights)
    w = np.asarray(weights, dtype=float)
    z0_flat = np.ascontiguousarray(z0, dtype=float).reshape(-1)
    hist = np.empty((n_steps, n_nodes * width))
    z = z0_flat.copy()
    # overflow is legal here: the caller checks finiteness and fails fast
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(n_steps):
            zm = z.reshape(n_nodes, width)
            hist[n] = (a @ zm - zm).reshape(-1)
            z = z0_flat + scale * (w[n::-1] @ hist[:n + 1])
    out = z.reshape(n_nodes, width)
    if return_history:
        return out, hist.reshape(n_steps, n_nodes, width)
    return out
