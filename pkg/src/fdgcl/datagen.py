"""Synthetic stochastic-block-model datasets.

Node classes are balanced; an edge is drawn independently with
probability p_in inside a class and p_out across classes.  Features are
the node's class mean (orthonormal means, built by Gram-Schmidt on seeded
Gaussians) plus isotropic Gaussian noise.  Generation retries until the
graph is connected.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ConnectivityError
from .graph import Dataset, Graph, build_graph, is_connected
from .rng import Rng

_MAX_ATTEMPTS = 100


@dataclass(frozen=True)
class SbmSpec:
    n: int
    classes: int
    p_in: float
    p_out: float
    d_in: int = 8
    noise: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.classes < 2 or self.n < self.classes:
            raise ConfigError(f"need n >= classes >= 2, got "
                              f"({self.n}, {self.classes})")
        for name in ("p_in", "p_out"):
            p = getattr(self, name)
            if not (0.0 <= p <= 1.0):
                raise ConfigError(f"{name} must be in [0, 1], got {p}")
        if self.d_in < self.classes:
            raise ConfigError(f"d_in ({self.d_in}) must be >= classes "
                              f"({self.classes}) for orthogonal means")
        if self.noise < 0:
            raise ConfigError(f"noise must be >= 0, got {self.noise}")


def _orthonormal_means(rng: Rng, classes: int, d_in: int) -> np.ndarray:
    """Gram-Schmidt on seeded Gaussian draws."""
    means = np.zeros((classes, d_in))
    for c in range(classes):
        v = rng.normal(size=d_in)
        for prev in means[:c]:
            v -= (v @ prev) * prev
        nv = np.linalg.norm(v)
        while nv < 1e-8:  # essentially impossible; redraw defensively
            v = rng.normal(size=d_in)
            for prev in means[:c]:
                v -= (v @ prev) * prev
            nv = np.linalg.norm(v)
        means[c] = v / nv
    return means


def _labels(n: int, classes: int) -> np.ndarray:
    """Balanced block labels 0,0,...,1,1,...; remainder spread from the
    first class."""
    base = n // classes
    rem = n % classes
    counts = [base + (1 if c < rem else 0) for c in range(classes)]
    return np.repeat(np.arange(classes), counts)


def _sample_graph(rng: Rng, labels: np.ndarray, p_in: float,
                  p_out: float, n: int) -> Graph:
    edges = []
    for i in range(n):
        li = labels[i]
        for j in range(i + 1, n):
            p = p_in if li == labels[j] else p_out
            if rng.random() < p:
                edges.append((i, j))
    return build_graph(edges, n)


def generate_sbm(spec: SbmSpec) -> Dataset:
    """Generate a connected SBM dataset with a seeded 60/20/20 split."""
    rng = Rng(spec.seed, 5)
    labels = _labels(spec.n, spec.classes)
    graph = None
    for _ in range(_MAX_ATTEMPTS):
        cand = _sample_graph(rng, labels, spec.p_in, spec.p_out, spec.n)
        if is_connected(cand):
            graph = cand
            break
    if graph is None:
        raise ConnectivityError(
            f"no connected graph in {_MAX_ATTEMPTS} attempts "
            f"(n={spec.n}, p_in={spec.p_in}, p_out={spec.p_out})")
    means = _orthonormal_means(rng, spec.classes, spec.d_in)
    features = means[labels] + spec.noise * rng.normal(
        size=(spec.n, spec.d_in))
    perm = rng.permutation(spec.n)
    n_train = int(round(0.6 * spec.n))
    n_val = int(round(0.2 * spec.n))
    split = {
        "train": np.sort(perm[:n_train]),
        "val": np.sort(perm[n_train:n_train + n_val]),
        "test": np.sort(perm[n_train + n_val:]),
    }
    return Dataset(graph=graph, features=features, labels=labels, split=split)


def homophily(dataset: Dataset) -> float:
    """Fraction of edges joining same-class endpoints."""
    a = dataset.graph.adjacency.tocoo()
    mask = a.row < a.col
    if not mask.any():
        return float("nan")
    same = dataset.labels[a.row[mask]] == dataset.labels[a.col[mask]]
    return float(same.mean())
