"""Shipped hyperparameter presets.

Training presets are JSON files in this directory whose keys mirror
:class:`fdgcl.model.ModelConfig` (plus an optional human-oriented
``note``).  Synthetic-data presets for the SBM generator live in
``SBM_PRESETS``.
"""

from __future__ import annotations

import json
from importlib import resources

from ..datagen import SbmSpec
from ..errors import ConfigError
from ..model import ModelConfig

SBM_PRESETS = {
    # homophilic: wide features (d_in > N) so PCA diagnostics resolve the
    # per-mode amplification profile
    "homo": dict(n=100, classes=2, p_in=0.3, p_out=0.02, d_in=256,
                 noise=1.0),
    # heterophilic: sparse cross-class wiring
    "hetero": dict(n=300, classes=3, p_in=0.02, p_out=0.2, d_in=8,
                   noise=1.0),
    # dense blocks with a compact Laplacian spectrum; keeps the explicit
    # solver stable down to alpha ~ 0.1 in the spectral harness
    "dense": dict(n=30, classes=2, p_in=0.9, p_out=0.7, d_in=8, noise=1.0),
}


def available_presets() -> list:
    files = resources.files(__name__)
    return sorted(p.name[:-5] for p in files.iterdir()
                  if p.name.endswith(".json"))


def load_preset(name: str, **overrides) -> ModelConfig:
    """Load a training preset by name; keyword overrides win."""
    try:
        raw = resources.files(__name__).joinpath(f"{name}.json").read_text()
    except FileNotFoundError:
        raise ConfigError(
            f"unknown preset {name!r}; available: {available_presets()}"
        ) from None
    obj = json.loads(raw)
    obj.pop("note", None)
    obj.update(overrides)
    return ModelConfig.from_dict(obj)


def sbm_preset(name: str, n: int | None = None, seed: int = 0) -> SbmSpec:
    """SBM data preset by name, with optional node-count override."""
    if name not in SBM_PRESETS:
        raise ConfigError(f"unknown SBM preset {name!r}; available: "
                          f"{sorted(SBM_PRESETS)}")
    kw = dict(SBM_PRESETS[name])
    if n is not None:
        kw["n"] = int(n)
    return SbmSpec(seed=seed, **kw)
