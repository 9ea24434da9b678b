from .dense_mlp import Activation, DenseLayer, Mlp, forward  # isort:skip
from .build_from_checkpoint import load_mlp, save_mlp
from .predesigned_modules import *
from .training import (
    TrainConfig,
    loss_and_gradients,
    matched_reconstruction_loss,
    shuffled_batches,
    train,
)
