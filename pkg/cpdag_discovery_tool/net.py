"""Building, running and training the CPDAG network"""
from __future__ import annotations

import logging
import math
import time
from typing import Dict, Sequence, Tuple, Union

import numpy as np
import pandas as pd
import torch
from tqdm.auto import tqdm

from cpdag_discovery_tool.config import LOSS_EPSILON
from cpdag_discovery_tool.errors import NumericError, ValidationError
from cpdag_discovery_tool.models.network import CpdagNet, Hyperparameters
from cpdag_discovery_tool.models.pdag import PdagMatrix
from cpdag_discovery_tool.models.sem import TrainingPair

logger = logging.getLogger(__name__)

Corpus = Union[Sequence[TrainingPair], Tuple[np.ndarray, np.ndarray]]

LOG_COLUMNS = ["epoch", "mean_loss", "wall_seconds"]


def build_network(hyper: Hyperparameters, seed: int = 0,
                  dtype: torch.dtype = torch.float32) -> CpdagNet:
    """Create a network with Glorot-uniform weights and zero biases

    The initial weights depend only on `seed`; the global torch RNG state is
    left untouched.
    """
    net = CpdagNet(hyper)
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed)
        net.reset_parameters()
    return net.to(dtype)


def parameter_count(net: CpdagNet) -> int:
    """Number of trainable scalars"""
    return sum(param.numel() for param in net.parameters() if param.requires_grad)


def _as_tensor(values, net: CpdagNet) -> torch.Tensor:
    dtype = next(net.parameters()).dtype
    tensor = torch.as_tensor(np.asarray(values), dtype=dtype)
    if not torch.isfinite(tensor).all():
        raise NumericError("network input contains non-finite values")
    return tensor


def forward(net: CpdagNet, feature, mode: str = "infer",
            generator: torch.Generator = None) -> np.ndarray:
    """Edge-mark probabilities for one p x p correlation matrix or a batch

    `infer` mode disables dropout and is a pure function of the weights and
    the input. `train` mode draws dropout masks from `generator`.

    Returns:
        np.ndarray: Probabilities strictly inside (0, 1), same leading shape
            as `feature`
    """
    if mode not in ("train", "infer"):
        raise ValidationError(f"mode must be 'train' or 'infer', got {mode!r}")
    x = _as_tensor(feature, net)
    p = net.hyper.p
    if x.shape[-2:] != (p, p):
        raise ValidationError(f"network expects {p} x {p} inputs, got {tuple(x.shape)}")
    was_training = net.training
    net.train(mode == "train")
    try:
        with torch.no_grad():
            logits = net.logits(x, generator).double()
    finally:
        net.train(was_training)
    probabilities = torch.sigmoid(logits).clamp(LOSS_EPSILON, 1 - LOSS_EPSILON).numpy()
    return probabilities.reshape(x.shape)


def bce_loss(o: torch.Tensor, label, epsilon: float = LOSS_EPSILON) -> torch.Tensor:
    """Mean binary cross-entropy over every entry, probabilities clamped to [eps, 1-eps]

    Args:
        o (torch.Tensor): Probabilities, (p, p) or (batch, p, p)
        label: Matching 0/1 targets (tensor, array or PdagMatrix)

    Returns:
        torch.Tensor: Scalar loss
    """
    if isinstance(label, PdagMatrix):
        label = label.m
    if torch.is_tensor(label):
        y = label.to(o.dtype)
    else:
        y = torch.as_tensor(np.asarray(label), dtype=o.dtype)
    if y.shape != o.shape:
        raise ValidationError(f"loss shapes differ: output {tuple(o.shape)}, label {tuple(y.shape)}")
    o = o.clamp(epsilon, 1 - epsilon)
    return -(y * torch.log(o) + (1 - y) * torch.log(1 - o)).mean()


def _as_arrays(corpus: Corpus) -> Tuple[np.ndarray, np.ndarray]:
    if isinstance(corpus, tuple):
        features, labels = corpus
        return np.asarray(features), np.asarray(labels)
    if not corpus:
        raise ValidationError("the corpus is empty")
    return (np.stack([pair.feature for pair in corpus]),
            np.stack([pair.label.m for pair in corpus]))


def gradient(net: CpdagNet, batch: Corpus, generator: torch.Generator = None
             ) -> Dict[str, torch.Tensor]:
    """Gradient of the batch-mean loss for every named parameter

    Dropout is active and its masks come from `generator`, so reseeding the
    generator reproduces the same masks.
    """
    features, labels = _as_arrays(batch)
    if len(features) == 0:
        raise ValidationError("gradient needs a nonempty batch")
    x = _as_tensor(features, net)
    y = torch.as_tensor(labels, dtype=x.dtype)
    names, params = zip(*net.named_parameters())
    net.train()
    loss = bce_loss(net(x, generator), y)
    grads = torch.autograd.grad(loss, params)
    return dict(zip(names, grads))


def train(corpus: Corpus, hyper: Hyperparameters, seed: int = 0,
          progress: bool = False) -> Tuple[CpdagNet, pd.DataFrame]:
    """Fit the network with Adam on mini-batches of the corpus

    Weights, batch order and dropout masks all derive from `seed`.

    Returns:
        Tuple[CpdagNet, pd.DataFrame]: The trained network and one log row
            per epoch (epoch, mean_loss, wall_seconds)
    """
    features, labels = _as_arrays(corpus)
    if features.ndim != 3 or features.shape[1:] != (hyper.p, hyper.p):
        raise ValidationError(
            f"corpus holds {features.shape[1:]} matrices but the network is built for p={hyper.p}")
    if labels.shape != features.shape:
        raise ValidationError("corpus features and labels differ in shape")

    net = build_network(hyper, seed)
    x_all = _as_tensor(features, net)
    y_all = torch.as_tensor(labels, dtype=x_all.dtype)
    generator = torch.Generator().manual_seed(seed)
    optimizer = torch.optim.Adam(net.parameters(), lr=hyper.learning_rate)
    count = len(x_all)

    rows = []
    start = time.perf_counter()
    net.train()
    for epoch in tqdm(range(hyper.epochs), desc="train", unit="epoch", disable=not progress):
        order = torch.randperm(count, generator=generator)
        total = 0.0
        for first in range(0, count, hyper.batch_size):
            idx = order[first:first + hyper.batch_size]
            optimizer.zero_grad()
            loss = bce_loss(net(x_all[idx], generator), y_all[idx])
            loss.backward()
            optimizer.step()
            total += loss.item() * len(idx)
        mean_loss = total / count
        if not math.isfinite(mean_loss):
            raise NumericError(f"non-finite training loss at epoch {epoch}")
        rows.append((epoch, mean_loss, time.perf_counter() - start))
        if epoch % 10 == 0 or epoch == hyper.epochs - 1:
            logger.info("epoch %d: mean loss %.5f", epoch, mean_loss)
    net.eval()
    return net, pd.DataFrame(rows, columns=LOG_COLUMNS)
