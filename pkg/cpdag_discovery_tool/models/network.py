from __future__ import annotations

from dataclasses import asdict, dataclass, replace
from typing import Optional

import torch
from torch import nn

from cpdag_discovery_tool.config import (
    BATCH_SIZE,
    DROPOUT_RATE,
    EPOCHS,
    FILTERS,
    LEARNING_RATE,
    POOL,
)
from cpdag_discovery_tool.errors import ValidationError


@dataclass(frozen=True)
class Hyperparameters:
    """Shape and training settings of the network

    `dense_units` defaults to 4p^2: 54,593 parameters at p=5 and
    1,321,588 at p=10.
    """
    p: int
    filters: int = FILTERS
    pool: int = POOL
    dense_units: Optional[int] = None
    dropout_rate: float = DROPOUT_RATE
    epochs: int = EPOCHS
    batch_size: int = BATCH_SIZE
    learning_rate: float = LEARNING_RATE

    def __post_init__(self):
        if self.p < 3:
            raise ValidationError(f"the network needs p >= 3 for its 3x3 kernel, got {self.p}")
        if self.dense_units is None:
            object.__setattr__(self, "dense_units", 4 * self.p ** 2)
        if self.dense_units < 1:
            raise ValidationError(f"dense_units must be positive, got {self.dense_units}")
        if self.filters < 1 or self.pool < 1 or self.p // self.pool < 1:
            raise ValidationError(
                f"filters={self.filters}, pool={self.pool} leave no units for p={self.p}")
        if not 0 <= self.dropout_rate < 1:
            raise ValidationError(f"dropout_rate must lie in [0, 1), got {self.dropout_rate}")
        if self.epochs < 0 or self.batch_size < 1 or self.learning_rate <= 0:
            raise ValidationError("epochs, batch_size and learning_rate must be positive")

    def override(self, **changes) -> Hyperparameters:
        """A copy with some fields replaced; None values are ignored"""
        return replace(self, **{k: v for k, v in changes.items() if v is not None})

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def pooled_size(self) -> int:
        return self.p // self.pool

    def expected_parameter_count(self) -> int:
        """Trainable scalars by the layer-count formula"""
        branch_kernels = self.p + self.p + 1 + 9
        convolutions = self.filters * branch_kernels + 4 * self.filters
        flat = self.pooled_size ** 2 * 4 * self.filters
        dense = flat * self.dense_units + self.dense_units
        output = self.dense_units * self.p ** 2 + self.p ** 2
        return convolutions + dense + output


class CpdagNet(nn.Module):
    """Correlation matrix in, matrix of edge-mark probabilities out

    Four parallel same-padded convolutions (column (p,1), row (1,p),
    entry (1,1), local (3,3)) with ReLU, concatenated channel-wise, 2x2
    max-pooled, flattened, dropout, dense ReLU, dropout, dense to p^2 with a
    sigmoid. Dropout is inverted (kept units scaled by 1/(1-rate) in
    training) and draws its masks from the generator passed to `forward`.
    """

    def __init__(self, hyper: Hyperparameters) -> None:
        super().__init__()
        self.hyper = hyper
        p, filters = hyper.p, hyper.filters
        self.column_conv = nn.Conv2d(1, filters, (p, 1), padding="same")
        self.row_conv = nn.Conv2d(1, filters, (1, p), padding="same")
        self.entry_conv = nn.Conv2d(1, filters, (1, 1))
        self.local_conv = nn.Conv2d(1, filters, (3, 3), padding="same")
        self.pool = nn.MaxPool2d(hyper.pool, stride=hyper.pool)
        flat = hyper.pooled_size ** 2 * 4 * filters
        self.dense = nn.Linear(flat, hyper.dense_units)
        self.output = nn.Linear(hyper.dense_units, p * p)

    def reset_parameters(self):
        """Glorot-uniform weights, zero biases"""
        for module in (self.column_conv, self.row_conv, self.entry_conv,
                       self.local_conv, self.dense, self.output):
            nn.init.xavier_uniform_(module.weight)
            nn.init.zeros_(module.bias)

    def _dropout(self, h: torch.Tensor, generator: Optional[torch.Generator]) -> torch.Tensor:
        rate = self.hyper.dropout_rate
        if not self.training or rate == 0:
            return h
        keep = 1.0 - rate
        mask = torch.bernoulli(torch.full_like(h, keep), generator=generator)
        return h * mask / keep

    def logits(self, x: torch.Tensor, generator: Optional[torch.Generator] = None) -> torch.Tensor:
        """Pre-sigmoid outputs, shape (batch, p, p)"""
        p = self.hyper.p
        x = x.reshape(-1, 1, p, p)
        branches = [torch.relu(conv(x)) for conv in
                    (self.column_conv, self.row_conv, self.entry_conv, self.local_conv)]
        h = self.pool(torch.cat(branches, dim=1)).flatten(start_dim=1)
        h = self._dropout(h, generator)
        h = self._dropout(torch.relu(self.dense(h)), generator)
        return self.output(h).reshape(-1, p, p)

    def forward(self, x: torch.Tensor, generator: Optional[torch.Generator] = None) -> torch.Tensor:
        return torch.sigmoid(self.logits(x, generator))
