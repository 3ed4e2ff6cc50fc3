"""Attention-based surrogates mapping circuit parameters to quantum states."""

from .checkpoint import load_model, save_model
from .gradcheck import grad_check
from .model import EncoderDecoderRegressor, ModelConfig, SurrogateModel
from .training import (
    Adam,
    TrainingDiverged,
    TrainReport,
    forward,
    predict,
    predict_batch,
    train,
    worker_count,
)

__all__ = [
    "Adam",
    "EncoderDecoderRegressor",
    "ModelConfig",
    "SurrogateModel",
    "TrainingDiverged",
    "TrainReport",
    "forward",
    "grad_check",
    "load_model",
    "predict",
    "predict_batch",
    "save_model",
    "train",
    "worker_count",
]
