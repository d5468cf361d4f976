"""fdgcl: augmentation-free graph contrastive learning with
fractional-order graph diffusion encoders, plus a numerical harness for
their spectral amplification behaviour."""

__version__ = "0.1.0"

from .errors import FdgclError
from .graph import Dataset, Graph, build_graph, load_dataset
from .model import ModelConfig, TrainRun, train
from .solver import DiffusionConfig, diffuse
from .special import MLParams, gamma, mittag_leffler, ml_asymptotic, order_index

__all__ = [
    "__version__",
    "FdgclError",
    "Dataset", "Graph", "build_graph", "load_dataset",
    "ModelConfig", "TrainRun", "train",
    "DiffusionConfig", "diffuse",
    "MLParams", "gamma", "mittag_leffler", "ml_asymptotic", "order_index",
]
