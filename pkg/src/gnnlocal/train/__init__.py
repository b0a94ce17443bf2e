"""Learned message-passing networks."""
from .attributes import SCHEMES, AttributeEncoder, AttributeScheme, assign_attributes
from .estimator import GinClassifier
from .gin import GinNetwork, forward_train, init_network
from .trainer import TrainConfig, TrainResult, train
from .wl import wl_equivalent, wl_refinement

__all__ = [
    "SCHEMES", "AttributeEncoder", "AttributeScheme", "GinClassifier", "GinNetwork",
    "TrainConfig", "TrainResult", "assign_attributes", "forward_train", "init_network",
    "train", "wl_equivalent", "wl_refinement",
]
