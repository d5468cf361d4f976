"""Shared fixtures and independent oracles.

The decay-law oracles here deliberately avoid the production code paths:
``ml_series_oracle`` sums the Maclaurin series in 60-digit arithmetic and
``ml_quadrature_oracle`` integrates the complete-monotonicity spectral
representation, so either can certify the other and both can certify the
package.
"""

import numpy as np
import pytest
from scipy.integrate import quad

from fdgcl import datagen
from fdgcl.datagen import SbmSpec


def ml_series_oracle(alpha, lam, t, terms=500):
    """Maclaurin series in high-precision arithmetic (mpmath)."""
    from mpmath import mp

    with mp.workdps(60):
        a, lm, tt = mp.mpf(alpha), mp.mpf(lam), mp.mpf(t)
        total = mp.mpf(0)
        for n in range(terms):
            total += (-1) ** n * lm ** n * tt ** (a * n) / mp.gamma(a * n + 1)
        return float(total)


def ml_quadrature_oracle(alpha, lam, t):
    """Spectral-representation integral, valid for 0 < alpha < 1:

        e_alpha(lam, t) = sin(pi a)/(pi a) *
            int_0^inf exp(-(u*x)**(1/a)) / (u^2 + 2 u cos(pi a) + 1) du,

    with x = lam * t**alpha.
    """
    x = lam * t ** alpha
    if x == 0:
        return 1.0
    ca = np.cos(np.pi * alpha)
    inv_a = 1.0 / alpha

    def integrand(u):
        return np.exp(-((u * x) ** inv_a)) / (u * u + 2 * u * ca + 1.0)

    val, _ = quad(integrand, 0.0, np.inf, limit=400)
    return float(np.sin(np.pi * alpha) / (np.pi * alpha) * val)


def scalar_mode_reference(alpha, lam, tau, h):
    """The production scheme transcribed for a single scalar mode.

    Used to certify that the matrix solver acts diagonally on
    eigenvectors; shares no code with the package.
    """
    from math import gamma as _gamma

    n_steps = int(round(tau / h))
    scale = h ** alpha / _gamma(alpha + 1.0)
    k = np.arange(n_steps + 1, dtype=float)
    w = k[1:] ** alpha - k[:-1] ** alpha
    z = 1.0
    hist = np.empty(n_steps)
    zs = np.empty(n_steps + 1)
    zs[0] = z
    for n in range(n_steps):
        hist[n] = -lam * zs[n]
        zs[n + 1] = 1.0 + scale * float(w[n::-1] @ hist[: n + 1])
    return zs[-1]


@pytest.fixture(scope="session")
def dense_sbm_graphs():
    """Ten connected dense SBM graphs with compact spectra (N=30)."""
    graphs = []
    for seed in range(10):
        ds = datagen.generate_sbm(SbmSpec(n=30, classes=2, p_in=0.9,
                                          p_out=0.7, d_in=8, seed=seed))
        graphs.append(ds.graph)
    return graphs


@pytest.fixture(scope="session")
def sparse_sbm_dataset():
    """One connected homophilic SBM dataset (N=40) for cheap smoke tests."""
    return datagen.generate_sbm(SbmSpec(n=40, classes=2, p_in=0.3,
                                        p_out=0.05, d_in=8, seed=11))
