"""Softmax-linear policies, cross-entropy and tree-search policy gradients."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .features import FeatureSet, SparseFeatureVector, extract_all
from .games import GameState

PROB_FLOOR = 1e-300


def extend(weights: np.ndarray, size: int) -> np.ndarray:
    """Pad a parameter vector with zeros up to ``size``."""
    if len(weights) >= size:
        return weights
    return np.concatenate([weights, np.zeros(size - len(weights))])


@dataclass
class PolicySpec:
    """Logits are ``(base + offset) . phi``; a missing offset counts as zero."""

    base: np.ndarray
    offset: Optional[np.ndarray] = None

    def __post_init__(self):
        self.base = np.asarray(self.base, dtype=np.float64)
        if self.offset is not None:
            self.offset = np.asarray(self.offset, dtype=np.float64)
            if self.offset.shape != self.base.shape:
                raise ValueError("offset and base parameters must have the same length")

    @classmethod
    def zeros(cls, n: int, with_offset: bool = False) -> "PolicySpec":
        return cls(np.zeros(n), np.zeros(n) if with_offset else None)

    @property
    def weights(self) -> np.ndarray:
        return self.base if self.offset is None else self.base + self.offset

    def __len__(self):
        return len(self.base)


def softmax(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    e = np.exp(z - z.max())
    return e / e.sum()


def logits(ps: PolicySpec, feats: Sequence[SparseFeatureVector]) -> np.ndarray:
    w = ps.weights
    for f in feats:
        if f.dimension > len(w):
            raise ValueError(f"feature dimension {f.dimension} exceeds parameter length {len(w)}")
    return np.array([w[f.indices].sum() for f in feats], dtype=np.float64)


def distribution(ps: PolicySpec, state: GameState, actions: Sequence[int], fs: FeatureSet) -> np.ndarray:
    return softmax(logits(ps, extract_all(state, actions, fs)))


def _entry_logits(w: np.ndarray, entry) -> np.ndarray:
    return np.bincount(entry.segments, weights=w[entry.flat_indices], minlength=len(entry.actions))


def _scatter(coef: np.ndarray, entry, size: int) -> np.ndarray:
    return np.bincount(entry.flat_indices, weights=coef[entry.segments], minlength=size)


def entry_probs(ps: PolicySpec, entry) -> np.ndarray:
    return softmax(_entry_logits(ps.weights, entry))


def ce_loss(ps: PolicySpec, entry) -> float:
    p = np.maximum(entry_probs(ps, entry), PROB_FLOOR)
    return float(-(entry.visit_dist * np.log(p)).sum())


def ce_gradient(ps: PolicySpec, entry) -> np.ndarray:
    """Gradient of the cross-entropy loss: ``sum_a (pi(a) - M(a)) phi(a)``.

    Valid for either the base or the offset vector, since both enter the logits
    linearly.
    """
    m = entry.visit_dist
    if abs(m.sum() - 1.0) > 1e-6:
        raise ValueError(f"visit distribution sums to {m.sum()}, not 1")
    return _scatter(entry_probs(ps, entry) - m, entry, len(ps))


def ce_batch_gradient(ps: PolicySpec, batch) -> np.ndarray:
    g = np.zeros(len(ps))
    for entry in batch:
        g += ce_gradient(ps, entry)
    return g / max(len(batch), 1)


def softmax_jacobian(probs: np.ndarray, feats: Sequence[SparseFeatureVector], size: int) -> np.ndarray:
    """Rows ``a``: d pi(a) / d theta = pi(a) * sum_a' (delta_aa' - pi(a')) phi(a')."""
    phi = np.zeros((len(feats), size))
    for a, f in enumerate(feats):
        phi[a, f.indices] = 1.0
    mean_phi = probs @ phi
    return probs[:, None] * (phi - mean_phi[None, :])


def tspg_surrogate(ps: PolicySpec, entry) -> float:
    """``sum_a pi(a) Q(a)`` for one stored state."""
    return float(entry_probs(ps, entry) @ entry.q_values)


def tspg_gradient(ps: PolicySpec, batch) -> np.ndarray:
    """Batch estimate ``1/|B| sum_s sum_a grad pi(s,a) Q(s,a)`` (an ascent direction).

    With the softmax gradient expanded this is
    ``sum_a pi(a) (Q(a) - sum_b pi(b) Q(b)) phi(a)`` per state.
    """
    if not batch:
        raise ValueError("empty batch")
    g = np.zeros(len(ps))
    for entry in batch:
        q = entry.q_values
        if q is None or len(q) != len(entry.actions) or not np.all(np.isfinite(q)):
            raise ValueError("every entry needs a value estimate for each legal action")
        p = entry_probs(ps, entry)
        g += _scatter(p * (q - p @ q), entry, len(ps))
    return g / len(batch)


def sample_action(dist: np.ndarray, rng: np.random.Generator) -> int:
    cdf = np.cumsum(dist)
    i = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
    return min(i, len(dist) - 1)


def greedy_action(dist: np.ndarray) -> int:
    return int(np.argmax(dist))


def normalized_entropy(dist: np.ndarray) -> float:
    dist = np.asarray(dist, dtype=np.float64)
    if len(dist) <= 1:
        return 0.0
    p = dist[dist > 0]
    return float(min(max(-(p * np.log(p)).sum() / np.log(len(dist)), 0.0), 1.0))
