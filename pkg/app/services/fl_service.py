"""
From-scratch FedAvg on dense softmax/MLP classifiers.

Flop rule: 6 x param_count per sample for a training step (2 forward, 4 backward),
2 x param_count per sample for a forward-only pass.
"""

from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import log_softmax, softmax

from app.core.exceptions import ConfigurationError, DimensionMismatchError
from app.core.logger import logger
from app.models.dataset_model import ClientDataset
from app.models.training_model import ModelArch, ModelParams, TrainConfig
from app.utils.rng import stream

TRAIN_FLOPS_PER_PARAM = 6
FORWARD_FLOPS_PER_PARAM = 2


def count_flops_per_sample(arch: ModelArch) -> int:
    return TRAIN_FLOPS_PER_PARAM * arch.param_count


def count_forward_flops_per_sample(arch: ModelArch) -> int:
    return FORWARD_FLOPS_PER_PARAM * arch.param_count


def unpack(arch: ModelArch, theta: np.ndarray) -> List[Tuple[np.ndarray, np.ndarray]]:
    """Split a flat vector into (W, b) views per layer."""
    out, offset = [], 0
    for fan_in, fan_out in arch.layers:
        W = theta[offset: offset + fan_in * fan_out].reshape(fan_in, fan_out)
        offset += fan_in * fan_out
        b = theta[offset: offset + fan_out]
        offset += fan_out
        out.append((W, b))
    return out


def init_model(arch: ModelArch, seed: int) -> ModelParams:
    """Weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)), biases zero."""
    rng = stream(seed, "model")
    chunks = []
    for fan_in, fan_out in arch.layers:
        bound = 1.0 / np.sqrt(fan_in)
        chunks.append(rng.uniform(-bound, bound, size=fan_in * fan_out))
        chunks.append(np.zeros(fan_out))
    return ModelParams(arch, np.concatenate(chunks))


def _check_inputs(arch: ModelArch, X: np.ndarray, y: np.ndarray):
    if X.ndim != 2 or X.shape[1] != arch.input_dim:
        raise DimensionMismatchError(f"Features of shape {X.shape} do not fit input_dim={arch.input_dim}")
    if X.shape[0] != y.shape[0]:
        raise DimensionMismatchError("Features and labels differ in length")


def forward(arch: ModelArch, theta: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Logits for a batch."""
    a = X
    layers = unpack(arch, theta)
    for i, (W, b) in enumerate(layers):
        a = a @ W + b
        if i < len(layers) - 1:
            a = np.maximum(a, 0.0)
    return a


def loss_and_grad(arch: ModelArch, theta: np.ndarray, X: np.ndarray, y: np.ndarray) -> Tuple[float, np.ndarray]:
    """Mean cross-entropy over the batch and its gradient w.r.t. the flat theta."""
    _check_inputs(arch, X, y)
    layers = unpack(arch, theta)
    n = X.shape[0]

    # forward, keeping each layer's input and pre-activation
    inputs, pre = [], []
    a = X
    for i, (W, b) in enumerate(layers):
        inputs.append(a)
        z = a @ W + b
        pre.append(z)
        a = np.maximum(z, 0.0) if i < len(layers) - 1 else z

    logp = log_softmax(a, axis=1)
    loss = float(-logp[np.arange(n), y].mean())

    dz = softmax(a, axis=1)
    dz[np.arange(n), y] -= 1.0
    dz /= n

    grads: List[np.ndarray] = []
    for i in range(len(layers) - 1, -1, -1):
        W, _ = layers[i]
        grads.append(dz.sum(axis=0))
        grads.append((inputs[i].T @ dz).ravel())
        if i > 0:
            dz = (dz @ W.T) * (pre[i - 1] > 0)
    return loss, np.concatenate(grads[::-1])


def mean_loss(model: ModelParams, data: ClientDataset) -> float:
    """Forward-only cross-entropy over a whole dataset (PowerD candidate probe)."""
    if data.n_samples == 0:
        raise ConfigurationError(f"Client {data.client_id} has no samples")
    logits = forward(model.arch, model.theta, data.features)
    return float(-log_softmax(logits, axis=1)[np.arange(data.n_samples), data.labels].mean())


def local_train(
    model: ModelParams, data: ClientDataset, cfg: TrainConfig, seed: int
) -> Tuple[ModelParams, float, int]:
    """
    E epochs of mini-batch SGD with heavy-ball momentum:
        v <- momentum * v - lr * grad;  theta <- theta + v
    Returns (updated params, mean loss of the last epoch, counted flops).
    """
    if data.n_samples == 0:
        raise ConfigurationError(f"Client {data.client_id} has no training samples")
    arch = model.arch
    _check_inputs(arch, data.features, data.labels)
    rng = stream(seed, "train", data.client_id)

    theta = model.theta.copy()
    velocity = np.zeros_like(theta)
    n = data.n_samples
    epoch_loss = 0.0
    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = order[start: start + cfg.batch_size]
            loss, grad = loss_and_grad(arch, theta, data.features[idx], data.labels[idx])
            velocity = cfg.momentum * velocity - cfg.learning_rate * grad
            theta = theta + velocity
            total += loss * idx.size
        epoch_loss = total / n

    flops = count_flops_per_sample(arch) * n * cfg.epochs
    return ModelParams(arch, theta), epoch_loss, flops


def fedavg_aggregate(updates: Sequence[Tuple[ModelParams, int]]) -> ModelParams:
    """Sample-size weighted mean of client models; weights normalised over the given updates."""
    if not updates:
        raise ConfigurationError("fedavg_aggregate needs at least one update")
    arch = updates[0][0].arch
    if any(p.arch != arch for p, _ in updates):
        raise DimensionMismatchError("All updates must share one architecture")
    sizes = np.array([n for _, n in updates], dtype=np.float64)
    if np.any(sizes <= 0):
        raise ConfigurationError("Every update needs a positive sample count")
    weights = sizes / sizes.sum()

    theta = np.zeros(arch.param_count)
    for w, (params, _) in zip(weights, updates):
        theta += w * params.theta
    return ModelParams(arch, theta)


def evaluate(model: ModelParams, test: ClientDataset) -> Tuple[float, float]:
    """(accuracy, mean cross-entropy); argmax ties go to the lowest class."""
    if test.n_samples == 0:
        raise ConfigurationError("Cannot evaluate on an empty test set")
    logits = forward(model.arch, model.theta, test.features)
    accuracy = float(np.mean(np.argmax(logits, axis=1) == test.labels))
    loss = float(-log_softmax(logits, axis=1)[np.arange(test.n_samples), test.labels].mean())
    logger.debug(f"Evaluated {model.arch.kind} on {test.n_samples} samples: acc={accuracy:.4f} loss={loss:.4f}")
    return accuracy, loss


def arch_for(input_dim: int, n_classes: int, hidden: Optional[Sequence[int]] = None) -> ModelArch:
    return ModelArch(input_dim=input_dim, n_classes=n_classes, hidden=tuple(hidden or ()))
