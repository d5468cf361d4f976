"""Contrastive losses over paired node embeddings, with analytic gradients.

All losses take the two view matrices Z1, Z2 (N x F) and return a
:class:`LossValueGrad` carrying the scalar value and exact gradients with
respect to both inputs.  Gradient correctness is pinned by central
finite-difference tests.

The collapse regularizer used by ``regularized_cosmean`` adds
eta * |<c1, c2>| where c_l is the unit dominant principal direction of
view l.  Its gradient flows through the directions via the closed-form
derivative of a simple top eigenvector,

    d c / d S = (mu1 I - S)^+ dS c,

applied to the feature covariance S; near-degenerate top spectra (gap
below ``SPECTRAL_GAP_TOL`` relative) fall back to a zero regularizer
gradient since the direction itself is then ill-defined.  Pass
``grad_through_directions=False`` to freeze c1, c2 entirely (stop-gradient
ablation; the regularizer then contributes value only).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (DegenerateColumnError, DegenerateError, ShapeError,
                     ZeroRowError)

SPECTRAL_GAP_TOL = 1e-9
_POWER_ITERS = 200
_POWER_ANGLE_TOL = 1e-8


@dataclass(frozen=True)
class LossValueGrad:
    value: float
    grad1: np.ndarray
    grad2: np.ndarray
    reg_term: float = 0.0


@dataclass(frozen=True)
class DominantDirection:
    direction: np.ndarray   # unit vector in feature space
    rayleigh: float         # explained variance along it


def _check_pair(z1, z2):
    z1 = np.asarray(z1, dtype=float)
    z2 = np.asarray(z2, dtype=float)
    if z1.shape != z2.shape:
        raise ShapeError(f"view shapes differ: {z1.shape} vs {z2.shape}")
    if z1.ndim != 2 or z1.shape[0] < 1:
        raise ShapeError(f"expected N x F matrices, got shape {z1.shape}")
    return z1, z2


def euclidean(z1, z2) -> LossValueGrad:
    """(1/N) sum_i ||z1_i - z2_i||^2."""
    z1, z2 = _check_pair(z1, z2)
    n = z1.shape[0]
    diff = z1 - z2
    value = float((diff * diff).sum() / n)
    g1 = 2.0 * diff / n
    return LossValueGrad(value=value, grad1=g1, grad2=-g1)


def cosmean(z1, z2) -> LossValueGrad:
    """1 - (1/N) sum_i cos(z1_i, z2_i); value in [0, 2]."""
    z1, z2 = _check_pair(z1, z2)
    n = z1.shape[0]
    n1 = np.linalg.norm(z1, axis=1)
    n2 = np.linalg.norm(z2, axis=1)
    for which, norms in (("Z1", n1), ("Z2", n2)):
        zero = np.nonzero(norms == 0.0)[0]
        if zero.size:
            raise ZeroRowError(int(zero[0]), which=which)
    dot = (z1 * z2).sum(axis=1)
    cos = dot / (n1 * n2)
    value = float(1.0 - cos.mean())
    g1 = -(z2 / (n1 * n2)[:, None] - (cos / n1 ** 2)[:, None] * z1) / n
    g2 = -(z1 / (n1 * n2)[:, None] - (cos / n2 ** 2)[:, None] * z2) / n
    return LossValueGrad(value=value, grad1=g1, grad2=g2)


def _standardize(z):
    """Column z-score with population (1/N) variance."""
    mu = z.mean(axis=0)
    var = ((z - mu) ** 2).mean(axis=0)
    dead = np.nonzero(var <= 1e-24)[0]
    if dead.size:
        raise DegenerateColumnError(dead.tolist())
    sd = np.sqrt(var)
    return (z - mu) / sd, sd


def _destandardize_grad(g, zhat, sd):
    """Backprop through the column z-score (population stats)."""
    return (g - g.mean(axis=0) - zhat * (g * zhat).mean(axis=0)) / sd


def barlow_twins(z1, z2, lambda_bt: float = 5e-3) -> LossValueGrad:
    """Redundancy-reduction loss on the cross-correlation matrix.

    C = Z1_hat^T Z2_hat / N over column-standardized views, with loss
    sum_i (1 - C_ii)^2 + lambda * sum_{i != j} C_ij^2.
    """
    z1, z2 = _check_pair(z1, z2)
    n = z1.shape[0]
    if n < 2:
        raise ShapeError("barlow_twins needs N >= 2 rows")
    if lambda_bt < 0:
        raise ShapeError(f"lambda_bt must be >= 0, got {lambda_bt}")
    zh1, sd1 = _standardize(z1)
    zh2, sd2 = _standardize(z2)
    c = zh1.T @ zh2 / n
    diag = np.diagonal(c)
    off = c - np.diag(diag)
    value = float(((1.0 - diag) ** 2).sum() + lambda_bt * (off ** 2).sum())
    gc = 2.0 * lambda_bt * off
    np.fill_diagonal(gc, -2.0 * (1.0 - diag))
    g_zh1 = zh2 @ gc.T / n
    g_zh2 = zh1 @ gc / n
    return LossValueGrad(value=value,
                         grad1=_destandardize_grad(g_zh1, zh1, sd1),
                         grad2=_destandardize_grad(g_zh2, zh2, sd2))


def vicreg(z1, z2, eta1: float = 1.0, eta2: float = 1.0, eta3: float = 1.0,
           eps: float = 1.0) -> LossValueGrad:
    """Variance-invariance-covariance regularization.

    invariance: mean squared row distance; variance: hinge
    max(0, eps - sqrt(Var)) averaged over columns, both views; covariance:
    (1/F) sum of squared off-diagonal covariance entries, both views.
    The hinge subgradient at the kink (and at zero variance) is 0.
    """
    z1, z2 = _check_pair(z1, z2)
    n, f = z1.shape
    if n < 2:
        raise ShapeError("vicreg needs N >= 2 rows")
    diff = z1 - z2
    inv = float((diff * diff).sum() / n)
    g1 = eta1 * 2.0 * diff / n
    g2 = -g1.copy()

    var_total = 0.0
    grads = [g1, g2]
    for view, (z, g) in enumerate(((z1, g1), (z2, g2))):
        zc = z - z.mean(axis=0)
        var = (zc * zc).mean(axis=0)
        sd = np.sqrt(var)
        hinge = np.maximum(0.0, eps - sd)
        var_total += float(hinge.sum() / f)
        active = (sd < eps) & (var > 1e-24)
        if active.any():
            coef = np.zeros(f)
            coef[active] = -1.0 / (n * sd[active])
            g += eta2 * (zc * coef) / f

        cov = zc.T @ zc / n
        off = cov - np.diag(np.diagonal(cov))
        cov_term = float((off ** 2).sum() / f)
        if view == 0:
            cov_total = cov_term
        else:
            cov_total += cov_term
        g += eta3 * 4.0 * (zc @ off) / (n * f)

    value = eta1 * inv + eta2 * var_total + eta3 * cov_total
    return LossValueGrad(value=float(value), grad1=grads[0], grad2=grads[1])


def covariance(z) -> np.ndarray:
    """Column-centered population covariance Z_c^T Z_c / N."""
    z = np.asarray(z, dtype=float)
    zc = z - z.mean(axis=0)
    return zc.T @ zc / z.shape[0]


def dominant_direction(z) -> DominantDirection:
    """Top principal direction by power iteration on the covariance.

    Convergence: successive-direction angle below 1e-8, at most 200
    iterations.  Sign fixed by making the largest-magnitude entry
    positive.
    """
    z = np.asarray(z, dtype=float)
    if z.ndim != 2 or z.shape[0] < 2:
        raise ShapeError(f"expected N x F with N >= 2, got {z.shape}")
    s = covariance(z)
    total = np.trace(s)
    if total <= 1e-30:
        raise DegenerateError("all-constant input has no dominant direction")
    f = s.shape[0]
    # start from the heaviest column of S; overlaps the top eigenvector
    # unless the start is (measure-zero) orthogonal to it
    v = s[:, int(np.argmax(np.linalg.norm(s, axis=0)))].copy()
    nv = np.linalg.norm(v)
    v = v / nv if nv > 0 else np.ones(f) / np.sqrt(f)
    for _ in range(_POWER_ITERS):
        w = s @ v
        nw = np.linalg.norm(w)
        if nw <= 1e-300:
            break
        w /= nw
        if 1.0 - abs(float(w @ v)) < _POWER_ANGLE_TOL ** 2 / 2.0:
            v = w
            break
        v = w
    i = int(np.argmax(np.abs(v)))
    if v[i] < 0:
        v = -v
    return DominantDirection(direction=v, rayleigh=float(v @ s @ v))


def _direction_flow_grad(z, s, own_dir, other_dir):
    """d |<c_own, c_other>| / dZ through c_own, holding c_other fixed.

    Uses the top-eigenvector derivative on the covariance; returns None
    when the top spectral gap is too small to trust the direction.
    """
    vals, vecs = np.linalg.eigh(s)
    mu1 = vals[-1]
    if len(vals) < 2 or (mu1 - vals[-2]) <= SPECTRAL_GAP_TOL * max(mu1, 1e-30):
        return None
    coef = vecs.T @ other_dir
    denom = mu1 - vals
    inv = np.zeros_like(vals)
    keep = denom > SPECTRAL_GAP_TOL * max(mu1, 1e-30)
    inv[keep] = coef[keep] / denom[keep]
    gvec = vecs @ inv                       # (mu1 I - S)^+ c_other
    n = z.shape[0]
    zc = z - z.mean(axis=0)
    return (np.outer(zc @ own_dir, gvec)
            + np.outer(zc @ gvec, own_dir)) / n


def regularized_cosmean(z1, z2, eta: float = 0.15,
                        grad_through_directions: bool = True) -> LossValueGrad:
    """cosmean(Z1, Z2) + eta * |<c1, c2>| over dominant directions."""
    if eta < 0:
        raise ShapeError(f"eta must be >= 0, got {eta}")
    base = cosmean(z1, z2)
    if eta == 0.0:
        return base
    z1 = np.asarray(z1, dtype=float)
    z2 = np.asarray(z2, dtype=float)
    d1 = dominant_direction(z1)
    d2 = dominant_direction(z2)
    ip = float(d1.direction @ d2.direction)
    reg = eta * abs(ip)
    g1 = base.grad1.copy()
    g2 = base.grad2.copy()
    if grad_through_directions and ip != 0.0:
        sign = eta * np.sign(ip)
        flow1 = _direction_flow_grad(z1, covariance(z1), d1.direction,
                                     d2.direction)
        flow2 = _direction_flow_grad(z2, covariance(z2), d2.direction,
                                     d1.direction)
        if flow1 is not None:
            g1 += sign * flow1
        if flow2 is not None:
            g2 += sign * flow2
    return LossValueGrad(value=base.value + reg, grad1=g1, grad2=g2,
                         reg_term=reg)


LOSSES = {
    "euclidean": euclidean,
    "cosmean": cosmean,
    "barlow": barlow_twins,
    "vicreg": vicreg,
    "reg_cosmean": regularized_cosmean,
}
