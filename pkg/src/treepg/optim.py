from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class CenteredRMSProp:
    """Centred RMSProp with momentum, written as a descent step.

    Per coordinate::

        sq  <- decay * sq  + (1 - decay) * g**2
        avg <- decay * avg + (1 - decay) * g
        mom <- momentum * mom + lr * g / sqrt(sq - avg**2 + eps)
        theta <- theta - mom
    """

    lr: float = 0.005
    decay: float = 0.9
    momentum: float = 0.9
    eps: float = 1e-8
    sq: np.ndarray = field(default_factory=lambda: np.zeros(0))
    avg: np.ndarray = field(default_factory=lambda: np.zeros(0))
    mom: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def resize(self, n: int) -> None:
        for name in ("sq", "avg", "mom"):
            v = getattr(self, name)
            if len(v) < n:
                setattr(self, name, np.concatenate([v, np.zeros(n - len(v))]))

    def step(self, params: np.ndarray, grad: np.ndarray) -> np.ndarray:
        grad = np.asarray(grad, dtype=np.float64)
        if grad.shape != params.shape:
            raise ValueError(f"gradient shape {grad.shape} does not match parameters {params.shape}")
        if not np.all(np.isfinite(grad)):
            raise FloatingPointError("non-finite gradient; update aborted")
        self.resize(len(params))
        sq = self.decay * self.sq + (1 - self.decay) * grad**2
        avg = self.decay * self.avg + (1 - self.decay) * grad
        mom = self.momentum * self.mom + self.lr * grad / np.sqrt(sq - avg**2 + self.eps)
        self.sq, self.avg, self.mom = sq, avg, mom
        return params - mom
