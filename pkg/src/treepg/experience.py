from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

import numpy as np

from .features import SparseFeatureVector
from .games import GameState


@dataclass(eq=False)
class ExperienceEntry:
    """One self-play state with its search targets.

    ``visit_dist`` (M_s) and ``q_values`` (Q_s) are aligned with ``actions``;
    ``features`` are frozen at ``feature_version``.
    """

    state: GameState
    actions: tuple[int, ...]
    features: list[SparseFeatureVector]
    visit_dist: np.ndarray
    q_values: Optional[np.ndarray]
    feature_version: int = 0
    flat_indices: np.ndarray = field(init=False, repr=False)
    segments: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.visit_dist = np.asarray(self.visit_dist, dtype=np.float64)
        if self.q_values is not None:
            self.q_values = np.asarray(self.q_values, dtype=np.float64)
        n = len(self.actions)
        if len(self.features) != n or self.visit_dist.shape != (n,):
            raise ValueError("features and visit distribution must align with the actions")
        if self.q_values is not None and self.q_values.shape != (n,):
            raise ValueError("value estimates must align with the actions")
        self.flat_indices = np.concatenate([f.indices for f in self.features]) if n else np.zeros(0, np.int64)
        self.segments = np.repeat(np.arange(n), [len(f.indices) for f in self.features])

    @property
    def dimension(self) -> int:
        return max((f.dimension for f in self.features), default=0)


class ReplayBuffer:
    """FIFO experience buffer; appending past capacity drops the oldest entry."""

    def __init__(self, capacity: int = 400):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self._entries: deque = deque(maxlen=capacity)

    def add(self, entry: ExperienceEntry) -> None:
        self._entries.append(entry)

    def __len__(self):
        return len(self._entries)

    def __iter__(self) -> Iterator[ExperienceEntry]:
        return iter(self._entries)

    def __getitem__(self, i) -> ExperienceEntry:
        return self._entries[i]

    def sample(self, rng: np.random.Generator, batch_size: int, replace_when_small: bool = False) -> list[ExperienceEntry]:
        n = len(self._entries)
        if n == 0:
            return []
        if n < batch_size and replace_when_small:
            idx = rng.integers(n, size=batch_size)
        else:
            idx = rng.choice(n, size=min(batch_size, n), replace=False)
        return [self._entries[i] for i in idx]

    def tail(self, k: int) -> Sequence[ExperienceEntry]:
        return list(self._entries)[-k:] if k else []
