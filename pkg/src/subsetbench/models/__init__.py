"""From-scratch classifier zoo sharing one fit/predict interface.

Kinds: gnb (Gaussian naive Bayes), knn (k-nearest neighbors by RMSD),
rforest (random forest of CART trees), mlp (multilayer perceptron of
depth 0-3, depth 0 being multinomial softmax regression).
"""

from dataclasses import dataclass

MODEL_KINDS = ("gnb", "knn", "rforest", "mlp")


@dataclass(frozen=True)
class ModelConfig:
    kind: str
    mlp_depth: int = 1  # hidden layers; 0 = softmax regression
    mlp_width: int = 128
    knn_k: int = 5
    forest_trees: int = 100

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.kind == "mlp" and not 0 <= self.mlp_depth <= 3:
            raise ValueError(f"mlp_depth must be 0..3, got {self.mlp_depth}")

    @property
    def model_id(self) -> str:
        if self.kind == "mlp":
            return f"mlp-{self.mlp_depth}"
        return self.kind

    @classmethod
    def from_id(cls, model_id: str, **overrides) -> "ModelConfig":
        """Parse ids like "gnb", "knn", "rforest", "mlp-2"."""
        if model_id.startswith("mlp-"):
            return cls(kind="mlp", mlp_depth=int(model_id.split("-", 1)[1]), **overrides)
        return cls(kind=model_id, **overrides)


from .gnb import GnbParams, gnb_fit, gnb_predict  # noqa: E402
from .knn import knn_predict  # noqa: E402
from .forest import ForestParams, forest_fit, forest_predict  # noqa: E402
from .mlp import (  # noqa: E402
    AdamState,
    MlpParams,
    adam_init,
    adam_step,
    mlp_backward,
    mlp_forward,
    mlp_init,
    mlp_predict,
)

__all__ = [
    "MODEL_KINDS",
    "ModelConfig",
    "GnbParams",
    "gnb_fit",
    "gnb_predict",
    "knn_predict",
    "ForestParams",
    "forest_fit",
    "forest_predict",
    "MlpParams",
    "AdamState",
    "mlp_init",
    "mlp_forward",
    "mlp_backward",
    "mlp_predict",
    "adam_init",
    "adam_step",
]
