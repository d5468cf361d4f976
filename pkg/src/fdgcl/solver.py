"""Fractional diffusion of node features with skip connections.

The state Z(t) follows  D^alpha Z = F(Z)  inside each memory segment of
length tau, discretized by the explicit fractional Euler scheme

    Z_{n+1} = Z_0 + (h^alpha / Gamma(alpha+1))
              * sum_{j=0}^{n} [(n+1-j)^alpha - (n-j)^alpha] F(Z_j),

whose alpha = 1 limit is exactly forward Euler (all quadrature weights
collapse to 1).  After each segment the original input is added back and
the memory restarts, so the full run of m segments applies

    Z_k = segment(Z_{k-1}) + Z_0,   k = 1 .. m.

For the linear right-hand side (variant "grand", F = -(I - A_bar) Z) the
total propagator is a polynomial in the normalized Laplacian and hence
self-adjoint; ``diffuse_adjoint`` exploits that.

Stability note: the scheme is explicit, and for the scalar mode problem
D^alpha z = -lam z its stability region shrinks as alpha decreases.  The
per-step weight of the newest F value is h^alpha / Gamma(alpha+1), which
for small alpha stays near 1 regardless of h, so modes with lam above
roughly Gamma(alpha+1) / h^alpha grow instead of decaying.  Growth is
mild over short segments; long segments at small alpha on graphs with
spectral radius above that bound overflow and raise NonFiniteError.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConfigError, NonFiniteError, ShapeError, VariantError
from .graph import Graph
from .special import gamma

VARIANTS = ("grand", "gread")


@dataclass(frozen=True)
class DiffusionConfig:
    """Schedule of one diffusion run: order, time, step, skip segments."""

    alpha: float
    T: float
    h: float
    m: int = 1
    variant: str = "grand"
    gread_gamma: float = 1.0
    gread_nu: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.alpha <= 1.0):
            raise ConfigError(f"alpha must be in (0, 1], got {self.alpha}")
        if self.h <= 0.0:
            raise ConfigError(f"h must be positive, got {self.h}")
        if self.T <= 0.0:
            raise ConfigError(f"T must be positive, got {self.T}")
        if self.m < 1:
            raise ConfigError(f"m must be >= 1, got {self.m}")
        if self.variant not in VARIANTS:
            raise ConfigError(f"variant must be one of {VARIANTS}, "
                              f"got {self.variant!r}")
        steps = self.tau / self.h
        if abs(steps - round(steps)) > 1e-6 * max(steps, 1.0) or round(steps) < 1:
            raise ConfigError(
                f"tau/h = {self.tau}/{self.h} must be a positive integer "
                f"(got {steps})")

    @property
    def tau(self) -> float:
        return self.T / self.m

    @property
    def steps_per_segment(self) -> int:
        return int(round(self.tau / self.h))

    def with_alpha(self, alpha: float) -> "DiffusionConfig":
        return DiffusionConfig(alpha=alpha, T=self.T, h=self.h, m=self.m,
                               variant=self.variant,
                               gread_gamma=self.gread_gamma,
                               gread_nu=self.gread_nu)


def quadrature_weights(alpha: float, n_steps: int) -> np.ndarray:
    """w[k] = (k+1)^alpha - k^alpha for k = 0 .. n_steps-1."""
    k = np.arange(n_steps + 1, dtype=float)
    return k[1:] ** alpha - k[:-1] ** alpha


def rhs(variant: str, graph: Graph, z: np.ndarray,
        gread_gamma: float = 1.0, gread_nu: float = 1.0) -> np.ndarray:
    """Right-hand side F(Z) of the diffusion equation.

    grand: -(I - A_bar) Z, i.e. A_bar Z - Z.
    gread: -gamma (I - A_bar) Z + nu r(Z) with the blurring-sharpening
           reaction  r(Z) = P Z - Z * (P Z)  where P is the row-stochastic
           adjacency (element-wise product).
    """
    z = np.asarray(z, dtype=float)
    if z.ndim == 1:
        z = z[:, None]
    if z.shape[0] != graph.num_nodes:
        raise ShapeError(f"state has {z.shape[0]} rows, graph has "
                         f"{graph.num_nodes} nodes")
    if variant == "grand":
        return graph.norm_adjacency @ z - z
    if variant == "gread":
        diff = graph.norm_adjacency @ z - z
        pz = graph.rw_adjacency() @ z
        reaction = pz - z * pz
        return gread_gamma * diff + gread_nu * reaction
    raise VariantError(f"unknown variant {variant!r}")


def _check_finite(z: np.ndarray, context: str) -> None:
    if not np.isfinite(z).all():
        raise NonFiniteError(f"non-finite values during {context} "
                             "(explicit scheme unstable at this alpha/h "
                             "for this graph's spectrum)")


def segment(variant: str, graph: Graph, z0: np.ndarray, alpha: float,
            tau: float, h: float, gread_gamma: float = 1.0,
            gread_nu: float = 1.0) -> np.ndarray:
    """Integrate one memory segment of length tau from state z0.

    History is local to the segment: each call starts a fresh fractional
    integral at its own initial condition.
    """
    z0 = np.ascontiguousarray(z0, dtype=float)
    squeeze = z0.ndim == 1
    if squeeze:
        z0 = z0[:, None]
    if z0.shape[0] != graph.num_nodes:
        raise ShapeError(f"state has {z0.shape[0]} rows, graph has "
                         f"{graph.num_nodes} nodes")
    n_steps = int(round(tau / h))
    if n_steps < 1 or abs(tau / h - n_steps) > 1e-6 * max(tau / h, 1.0):
        raise ConfigError(f"tau/h = {tau}/{h} must be a positive integer")
    scale = h ** alpha / gamma(alpha + 1.0)
    if variant == "grand":
        a = graph.norm_adjacency
        out = kernels.segment_grand(a.indptr, a.indices, a.data, z0,
                                    quadrature_weights(alpha, n_steps), scale)
    elif variant == "gread":
        out = _segment_generic(
            lambda z: rhs("gread", graph, z, gread_gamma, gread_nu),
            z0, alpha, n_steps, scale)
    else:
        raise VariantError(f"unknown variant {variant!r}")
    _check_finite(out, f"segment(alpha={alpha}, tau={tau})")
    return out[:, 0] if squeeze else out


def _segment_generic(f, z0, alpha, n_steps, scale):
    """Python-level fractional Euler for nonlinear right-hand sides."""
    w = quadrature_weights(alpha, n_steps)
    flat = z0.size
    hist = np.empty((n_steps, flat))
    z = z0
    z0_flat = z0.reshape(-1)
    # overflow is legal here: the segment wrapper fails fast on non-finites
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(n_steps):
            hist[n] = f(z).reshape(-1)
            z = (z0_flat + scale * (w[n::-1] @ hist[:n + 1])).reshape(z0.shape)
    return z


def diffuse(variant: str, graph: Graph, z0: np.ndarray,
            cfg: DiffusionConfig) -> np.ndarray:
    """Run the full skip-connection schedule: m segments, re-adding the
    original z0 after each."""
    if variant != cfg.variant:
        cfg = DiffusionConfig(alpha=cfg.alpha, T=cfg.T, h=cfg.h, m=cfg.m,
                              variant=variant, gread_gamma=cfg.gread_gamma,
                              gread_nu=cfg.gread_nu)
    z0 = np.ascontiguousarray(z0, dtype=float)
    z = z0
    for _ in range(cfg.m):
        z = segment(cfg.variant, graph, z, cfg.alpha, cfg.tau, cfg.h,
                    cfg.gread_gamma, cfg.gread_nu) + z0
    return z


def diffuse_adjoint(graph: Graph, g: np.ndarray,
                    cfg: DiffusionConfig) -> np.ndarray:
    """Apply the transpose of the total linear propagator to g.

    Valid for the grand variant only: its propagator is a polynomial in
    the symmetric normalized Laplacian, hence self-adjoint, so the
    adjoint equals a forward diffusion of g.
    """
    if cfg.variant != "grand":
        raise VariantError("adjoint diffusion requires the linear grand "
                           f"variant, got {cfg.variant!r}")
    return diffuse("grand", graph, g, cfg)
