"""Linear-probe evaluation and embedding-quality diagnostics.

The probe is plain multinomial logistic regression (softmax cross-entropy,
full-batch gradient descent, no regularization) trained on frozen
embeddings; test accuracy is the headline metric.

Diagnostics:

* ``clustering_ratio`` - per class c, the ratio of the mean inter-class
  distance to the mean intra-class pairwise distance; larger means better
  separated.
* ``collapse_report`` - per-view PCA spectrum of the feature covariance,
  its participation ratio (effective number of used dimensions), and the
  absolute inner product of the two views' dominant directions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateError, ShapeError, SingletonClassError
from .losses import covariance, dominant_direction
from .rng import Rng

_EXACT_PAIR_CAP = 5000
_PAIR_SAMPLE = 100_000


@dataclass
class ProbeModel:
    weights: np.ndarray   # F x C
    bias: np.ndarray      # C


def _softmax(logits):
    z = logits - logits.max(axis=1, keepdims=True)
    p = np.exp(z)
    p /= p.sum(axis=1, keepdims=True)
    return p


def train_probe(embeddings, labels, train_idx, lr: float = 0.01,
                epochs: int = 300, seed: int = 0) -> ProbeModel:
    """Fit the probe by full-batch gradient descent."""
    e = np.asarray(embeddings, dtype=float)
    y = np.asarray(labels, dtype=int)
    idx = np.asarray(train_idx, dtype=int)
    if e.ndim != 2 or len(y) != e.shape[0]:
        raise ShapeError(f"embeddings {e.shape} vs {len(y)} labels")
    if idx.size and (idx.min() < 0 or idx.max() >= e.shape[0]):
        raise ShapeError("train indices out of range")
    n_classes = int(y.max()) + 1
    if n_classes < 2:
        raise ShapeError(f"need >= 2 classes, got {n_classes}")
    f = e.shape[1]
    w = Rng(seed, 3).uniform(-0.01, 0.01, size=(f, n_classes))
    b = np.zeros(n_classes)
    xt = e[idx]
    onehot = np.eye(n_classes)[y[idx]]
    n = len(idx)
    for _ in range(epochs):
        p = _softmax(xt @ w + b)
        g = (p - onehot) / n
        w -= lr * (xt.T @ g)
        b -= lr * g.sum(axis=0)
    return ProbeModel(weights=w, bias=b)


def predict(probe: ProbeModel, embeddings) -> np.ndarray:
    """Argmax class; ties resolve to the lowest class index."""
    logits = np.asarray(embeddings, dtype=float) @ probe.weights + probe.bias
    return np.argmax(logits, axis=1)


def accuracy(probe: ProbeModel, embeddings, labels, idx) -> float:
    e = np.asarray(embeddings, dtype=float)
    y = np.asarray(labels, dtype=int)
    idx = np.asarray(idx, dtype=int)
    if len(y) != e.shape[0]:
        raise ShapeError(f"embeddings {e.shape} vs {len(y)} labels")
    if idx.size == 0:
        raise ShapeError("empty evaluation index set")
    if idx.min() < 0 or idx.max() >= e.shape[0]:
        raise ShapeError("evaluation indices out of range")
    pred = predict(probe, e[idx])
    return float((pred == y[idx]).mean())


def _sq_dists(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise squared distances via the Gram expansion (no dim axis)."""
    na = (a * a).sum(axis=1)
    nb = (b * b).sum(axis=1)
    d2 = na[:, None] + nb[None, :] - 2.0 * (a @ b.T)
    return np.clip(d2, 0.0, None)


def _pair_distances(a: np.ndarray, b: np.ndarray | None, rng: Rng | None):
    """Mean Euclidean distance over all pairs (within a, or across a/b).

    Exact when the pair count is small; otherwise a seeded uniform
    subsample of 100k pairs.
    """
    if b is None:
        n = len(a)
        if n <= _EXACT_PAIR_CAP:
            iu = np.triu_indices(n, k=1)
            return float(np.sqrt(_sq_dists(a, a)[iu]).mean())
        total = 0.0
        for _ in range(_PAIR_SAMPLE):
            i = rng.integer(n)
            j = rng.integer(n - 1)
            j = j + 1 if j >= i else j
            total += float(np.linalg.norm(a[i] - a[j]))
        return total / _PAIR_SAMPLE
    if len(a) * len(b) <= _EXACT_PAIR_CAP ** 2 // 4:
        return float(np.sqrt(_sq_dists(a, b)).mean())
    total = 0.0
    for _ in range(_PAIR_SAMPLE):
        total += float(np.linalg.norm(a[rng.integer(len(a))]
                                      - b[rng.integer(len(b))]))
    return total / _PAIR_SAMPLE


def clustering_ratio(embeddings, labels, seed: int = 0) -> dict:
    """r_c = mean inter-class distance / mean intra-class distance, per
    class."""
    e = np.asarray(embeddings, dtype=float)
    y = np.asarray(labels, dtype=int)
    if len(y) != e.shape[0]:
        raise ShapeError(f"embeddings {e.shape} vs {len(y)} labels")
    classes = np.unique(y)
    singles = [int(c) for c in classes if (y == c).sum() < 2]
    if singles:
        raise SingletonClassError(singles)
    rng = Rng(seed, 4)
    out = {}
    for c in classes:
        mask = y == c
        intra = _pair_distances(e[mask], None, rng)
        inter = _pair_distances(e[mask], e[~mask], rng)
        if intra <= 0.0:
            raise DegenerateError(
                f"class {int(c)}: zero intra-class spread, ratio undefined")
        out[int(c)] = inter / intra
    return out


@dataclass
class CollapseReport:
    spectrum1: np.ndarray          # PCA explained variances, descending
    spectrum2: np.ndarray
    participation1: float
    participation2: float
    direction_alignment: float     # |<c1, c2>|


def pca_spectrum(z) -> np.ndarray:
    """Descending eigenvalues of the column-centered covariance."""
    vals = np.linalg.eigvalsh(covariance(z))
    return np.clip(vals[::-1], 0.0, None)


def pca_participation(z) -> float:
    lam = pca_spectrum(z)
    total = lam.sum()
    if total <= 0.0:
        raise DegenerateError("constant input has no PCA spectrum")
    return float(total * total / (lam * lam).sum())


def collapse_report(z1, z2) -> CollapseReport:
    z1 = np.asarray(z1, dtype=float)
    z2 = np.asarray(z2, dtype=float)
    s1 = pca_spectrum(z1)
    s2 = pca_spectrum(z2)
    if s1.sum() <= 0.0 or s2.sum() <= 0.0:
        raise DegenerateError("constant view has no PCA spectrum")
    c1 = dominant_direction(z1).direction
    c2 = dominant_direction(z2).direction
    align = abs(float(c1 @ c2)) if len(c1) == len(c2) else float("nan")
    return CollapseReport(
        spectrum1=s1, spectrum2=s2,
        participation1=float(s1.sum() ** 2 / (s1 * s1).sum()),
        participation2=float(s2.sum() ** 2 / (s2 * s2).sum()),
        direction_alignment=align,
    )
