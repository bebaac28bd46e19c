"""Masked-reconstruction keypoint detector: data, model, training, checks."""

from .checkpoint import load_model, save_model
from .dataset import Dataset, Sequence, load_dataset, make_dataset, save_dataset
from .gradcheck import grad_check
from .masking import mask_patches
from .model import DetectorModel
from .train import Adam, TrainConfig, evaluate_detector, pretrain_reconstruction, train_keypoint_head

__all__ = [
    "DetectorModel", "TrainConfig", "Adam",
    "pretrain_reconstruction", "train_keypoint_head", "evaluate_detector",
    "make_dataset", "save_dataset", "load_dataset", "Dataset", "Sequence",
    "mask_patches", "grad_check", "save_model", "load_model",
]
