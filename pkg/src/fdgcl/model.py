"""The two-encoder contrastive model and its training loop.

Each encoder l = 1, 2 is: linear lift Y_l = X W_l, fractional diffusion
of Y_l at order alpha_l under the shared (T, h, m) schedule, then ReLU.
The two views feed a contrastive loss; the only learnable parameters are
W_1 and W_2.

Backpropagation exploits linearity of the grand diffusion: the propagator
P is self-adjoint (polynomial in the symmetric normalized Laplacian), so

    dW_l = X^T P_l (G_l * 1[pre_l > 0]) + weight_decay * W_l

with G_l the loss gradient on the ReLU output.  The ReLU derivative at
exactly 0 is taken as 0.  Weight decay is a decoupled additive gradient
term, not folded into the Adam moments.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import ConfigError, NonFiniteError, VariantError
from .graph import Dataset
from .losses import LOSSES, regularized_cosmean
from .rng import Rng
from .solver import DiffusionConfig, diffuse, diffuse_adjoint

# Rng stream ids for the two weight matrices
_STREAM_W1 = 1
_STREAM_W2 = 2


@dataclass(frozen=True)
class ModelConfig:
    alpha1: float
    alpha2: float
    T: float
    h: float
    m: int = 1
    d: int = 32
    beta: float = 0.5
    eta: float = 0.15
    lr: float = 0.01
    weight_decay: float = 5e-4
    epochs: int = 100
    seed: int = 0
    loss: str = "reg_cosmean"
    variant: str = "grand"
    allow_equal_alpha: bool = False

    def __post_init__(self):
        for name in ("alpha1", "alpha2"):
            a = getattr(self, name)
            if not (0.0 < a <= 1.0):
                raise ConfigError(f"{name} must be in (0, 1], got {a}")
        if self.alpha1 > self.alpha2 or (
                self.alpha1 == self.alpha2 and not self.allow_equal_alpha):
            raise ConfigError(
                f"need alpha1 < alpha2 (got {self.alpha1}, {self.alpha2}); "
                "pass allow_equal_alpha for the equal-order ablation")
        if not (0.0 <= self.beta <= 1.0):
            raise ConfigError(f"beta must be in [0, 1], got {self.beta}")
        if self.eta < 0:
            raise ConfigError(f"eta must be >= 0, got {self.eta}")
        if self.lr <= 0:
            raise ConfigError(f"lr must be positive, got {self.lr}")
        if self.weight_decay < 0:
            raise ConfigError(f"weight_decay must be >= 0, got "
                              f"{self.weight_decay}")
        if self.epochs < 0:
            raise ConfigError(f"epochs must be >= 0, got {self.epochs}")
        if self.d < 1:
            raise ConfigError(f"d must be >= 1, got {self.d}")
        if self.loss not in LOSSES:
            raise ConfigError(f"loss must be one of {sorted(LOSSES)}, "
                              f"got {self.loss!r}")
        # delegate schedule validation
        self.diffusion(self.alpha1)

    def diffusion(self, alpha: float) -> DiffusionConfig:
        return DiffusionConfig(alpha=alpha, T=self.T, h=self.h, m=self.m,
                               variant=self.variant)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, obj: dict) -> "ModelConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(obj) - known
        if unknown:
            raise ConfigError(f"unknown config key(s): {sorted(unknown)}")
        return cls(**obj)


@dataclass
class EncoderParams:
    w1: np.ndarray
    w2: np.ndarray


@dataclass
class AdamState:
    """First/second moments for both weight matrices."""

    m1: np.ndarray
    v1: np.ndarray
    m2: np.ndarray
    v2: np.ndarray

    @classmethod
    def zeros_like(cls, params: EncoderParams) -> "AdamState":
        return cls(m1=np.zeros_like(params.w1), v1=np.zeros_like(params.w1),
                   m2=np.zeros_like(params.w2), v2=np.zeros_like(params.w2))


@dataclass
class TrainRun:
    params: EncoderParams
    loss_history: np.ndarray
    reg_history: np.ndarray
    embeddings: np.ndarray
    seed: int
    config: ModelConfig
    z1: np.ndarray | None = None
    z2: np.ndarray | None = None
    pre1: np.ndarray | None = None
    pre2: np.ndarray | None = None


def init_params(d_in: int, d: int, seed: int) -> EncoderParams:
    """Uniform init on [-1/sqrt(d_in), 1/sqrt(d_in)], one Rng stream per
    weight matrix."""
    if d_in < 1 or d < 1:
        raise ConfigError(f"dimensions must be positive, got ({d_in}, {d})")
    bound = 1.0 / np.sqrt(d_in)
    w1 = Rng(seed, _STREAM_W1).uniform(-bound, bound, size=(d_in, d))
    w2 = Rng(seed, _STREAM_W2).uniform(-bound, bound, size=(d_in, d))
    return EncoderParams(w1=w1, w2=w2)


def forward(dataset: Dataset, params: EncoderParams, cfg: ModelConfig):
    """Both encoder branches; returns (Z1, Z2, pre1, pre2)."""
    x = dataset.features
    pre1 = diffuse(cfg.variant, dataset.graph, x @ params.w1,
                   cfg.diffusion(cfg.alpha1))
    pre2 = diffuse(cfg.variant, dataset.graph, x @ params.w2,
                   cfg.diffusion(cfg.alpha2))
    return np.maximum(pre1, 0.0), np.maximum(pre2, 0.0), pre1, pre2


def backward(dataset: Dataset, params: EncoderParams, cfg: ModelConfig,
             grads_on_z, pre1: np.ndarray, pre2: np.ndarray):
    """Exact gradients (dW1, dW2) given loss gradients on (Z1, Z2)."""
    if cfg.variant != "grand":
        raise VariantError("analytic backward requires the linear grand "
                           f"variant, got {cfg.variant!r}")
    g1, g2 = grads_on_z
    x = dataset.features
    d1 = diffuse_adjoint(dataset.graph, g1 * (pre1 > 0.0),
                         cfg.diffusion(cfg.alpha1))
    d2 = diffuse_adjoint(dataset.graph, g2 * (pre2 > 0.0),
                         cfg.diffusion(cfg.alpha2))
    dw1 = x.T @ d1 + cfg.weight_decay * params.w1
    dw2 = x.T @ d2 + cfg.weight_decay * params.w2
    return dw1, dw2


def adam_step(params: EncoderParams, grads, state: AdamState, lr: float,
              t: int, beta1: float = 0.9, beta2: float = 0.999,
              eps: float = 1e-8) -> None:
    """Standard bias-corrected Adam update, in place."""
    if t < 1:
        raise ConfigError(f"Adam step index must be >= 1, got {t}")
    dw1, dw2 = grads
    state.m1 = beta1 * state.m1 + (1 - beta1) * dw1
    state.v1 = beta2 * state.v1 + (1 - beta2) * dw1 * dw1
    state.m2 = beta1 * state.m2 + (1 - beta1) * dw2
    state.v2 = beta2 * state.v2 + (1 - beta2) * dw2 * dw2
    bc1 = 1 - beta1 ** t
    bc2 = 1 - beta2 ** t
    params.w1 -= lr * (state.m1 / bc1) / (np.sqrt(state.v1 / bc2) + eps)
    params.w2 -= lr * (state.m2 / bc1) / (np.sqrt(state.v2 / bc2) + eps)


def _loss_call(cfg: ModelConfig, z1, z2):
    if cfg.loss == "reg_cosmean":
        return regularized_cosmean(z1, z2, eta=cfg.eta)
    return LOSSES[cfg.loss](z1, z2)


def train(dataset: Dataset, cfg: ModelConfig,
          epoch_callback=None) -> TrainRun:
    """Full-graph contrastive training.

    ``epoch_callback(epoch, run_state)`` is invoked after each update with
    a dict of the current loss value and views (used by the ablation
    driver for accuracy-vs-epoch curves).
    """
    params = init_params(dataset.features.shape[1], cfg.d, cfg.seed)
    state = AdamState.zeros_like(params)
    loss_hist = np.zeros(cfg.epochs)
    reg_hist = np.zeros(cfg.epochs)
    for epoch in range(1, cfg.epochs + 1):
        z1, z2, pre1, pre2 = forward(dataset, params, cfg)
        out = _loss_call(cfg, z1, z2)
        if not np.isfinite(out.value):
            raise NonFiniteError(f"loss became non-finite at epoch {epoch}")
        loss_hist[epoch - 1] = out.value
        reg_hist[epoch - 1] = out.reg_term
        grads = backward(dataset, params, cfg, (out.grad1, out.grad2),
                         pre1, pre2)
        adam_step(params, grads, state, cfg.lr, epoch)
        if epoch_callback is not None:
            epoch_callback(epoch, {"loss": out.value, "reg": out.reg_term,
                                   "params": params})
    z1, z2, pre1, pre2 = forward(dataset, params, cfg)
    emb = cfg.beta * z1 + (1.0 - cfg.beta) * z2
    return TrainRun(params=params, loss_history=loss_hist,
                    reg_history=reg_hist, embeddings=emb, seed=cfg.seed,
                    config=cfg, z1=z1, z2=z2, pre1=pre1, pre2=pre2)
