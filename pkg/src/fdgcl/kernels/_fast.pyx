# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: language_level=3
"""Compiled twin of kernels._pure.segment_grand.

Same contract as the numpy fallback: explicit fractional Euler over one
memory segment with the right-hand side F(Z) = A Z - Z, A in CSR form.
The CSR product and the O(E^2) history contraction run as flat C loops.
"""

import numpy as np

cimport cython

ctypedef fused itype:
    int
    long
    long long


def segment_grand(itype[:] indptr, itype[:] indices, const double[:] data,
                  double[:, :] z0, const double[:] weights, double scale,
                  bint return_history=False):
    cdef Py_ssize_t n_nodes = z0.shape[0]
    cdef Py_ssize_t width = z0.shape[1]
    cdef Py_ssize_t n_steps = weights.shape[0]
    cdef Py_ssize_t flat = n_nodes * width

    hist_arr = np.empty((n_steps, flat), dtype=np.float64)
    z_arr = np.ascontiguousarray(z0, dtype=np.float64).reshape(-1).copy()
    z0_arr = z_arr.copy()
    acc_arr = np.empty(flat, dtype=np.float64)

    cdef double[:, ::1] hist = hist_arr
    cdef double[::1] z = z_arr
    cdef double[::1] zinit = z0_arr
    cdef double[::1] acc = acc_arr

    cdef Py_ssize_t n, i, k, l, j, p
    cdef double w, wj

    for n in range(n_steps):
        # F_n = A z_n - z_n, written into hist[n]
        for i in range(n_nodes):
            for k in range(width):
                acc[i * width + k] = 0.0
            for p in range(indptr[i], indptr[i + 1]):
                j = indices[p]
                w = data[p]
                for k in range(width):
                    acc[i * width + k] += w * z[j * width + k]
        for l in range(flat):
            hist[n, l] = acc[l] - z[l]
        # z_{n+1} = z_0 + scale * sum_{j<=n} weights[n-j] * F_j
        for l in range(flat):
            acc[l] = 0.0
        for j in range(n + 1):
            wj = weights[n - j]
            for l in range(flat):
                acc[l] += wj * hist[j, l]
        for l in range(flat):
            z[l] = zinit[l] + scale * acc[l]

    out = z_arr.reshape(n_nodes, width)
    if return_history:
        return out, hist_arr.reshape(n_steps, n_nodes, width)
    return out
