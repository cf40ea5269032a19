"""Bootstrap intervals, entropy profiles and weight-distribution export."""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .checkpoint import Checkpoint
from .evaluation import GameResult, MoveRecord
from .policy import normalized_entropy


def bootstrap_ci(estimates: Sequence[float], confidence: float = 0.95, resamples: int = 10000,
                 rng: Optional[np.random.Generator] = None) -> tuple[float, float]:
    """Percentile bootstrap interval for the mean of ``estimates``."""
    x = np.asarray(estimates, dtype=np.float64)
    if x.size == 0:
        raise ValueError("need at least one estimate")
    if not 0 < confidence < 1:
        raise ValueError("confidence must lie in (0, 1)")
    rng = rng if rng is not None else np.random.default_rng()
    idx = rng.integers(x.size, size=(resamples, x.size))
    means = x[idx].mean(axis=1)
    tail = 100 * (1 - confidence) / 2
    lo, hi = np.percentile(means, [tail, 100 - tail])
    return float(lo), float(hi)


@dataclass
class EntropyBin:
    center: float
    mean: float
    std: float
    count: int


@dataclass
class EntropyProfile:
    label: str
    bins: list[EntropyBin]

    def mean_over(self, lo: float = 0.0, hi: float = 1.0) -> float:
        """Average of the per-bin means for bins centred in ``[lo, hi]``."""
        vals = [b.mean for b in self.bins if lo <= b.center <= hi and b.count]
        return float(np.mean(vals)) if vals else float("nan")


def entropy_profile(records: Iterable[GameResult], bins: int = 20, label: Optional[str] = None) -> EntropyProfile:
    """Normalised entropy of ``label``'s distributions against game time ``t / T``."""
    samples = [[] for _ in range(bins)]
    for rec in records:
        total = max(rec.length, 1)
        for mv in rec.moves:
            dist = mv.distributions.get(label) if label is not None else next(iter(mv.distributions.values()))
            if dist is None:
                continue
            k = min(int(mv.turn / total * bins), bins - 1)
            samples[k].append(normalized_entropy(dist))
    out = []
    for k, vals in enumerate(samples):
        c = (k + 0.5) / bins
        if vals:
            out.append(EntropyBin(c, float(np.mean(vals)), float(np.std(vals)), len(vals)))
        else:
            out.append(EntropyBin(c, float("nan"), float("nan"), 0))
    return EntropyProfile(label or "", out)


def profile_labels(records: Iterable[GameResult]) -> list[str]:
    seen = []
    for rec in records:
        for mv in rec.moves:
            for k in mv.distributions:
                if k not in seen:
                    seen.append(k)
    return seen


def write_entropy_csv(profiles: Sequence[EntropyProfile], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["label", "bin_center", "mean_entropy", "std_entropy", "count"])
        for p in profiles:
            for b in p.bins:
                w.writerow([p.label, f"{b.center:.9g}", f"{b.mean:.9g}", f"{b.std:.9g}", b.count])


def save_records(records: Iterable[GameResult], path, repetition: int = 0) -> None:
    with open(path, "a") as fh:
        for r in records:
            fh.write(json.dumps({"repetition": repetition, "index": r.index, "a_seat": int(r.a_seat),
                                 "length": r.length, "winner": r.winner,
                                 "moves": [[m.turn, m.mover, m.n_actions, m.distributions] for m in r.moves]}))
            fh.write("\n")


def load_records(path) -> list[GameResult]:
    from .games import Player
    out = []
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        d = json.loads(line)
        moves = [MoveRecord(t, m, n, dists) for t, m, n, dists in d["moves"]]
        out.append(GameResult(d["index"], Player(d["a_seat"]), d["length"], d["winner"], moves))
    return out


def weight_summary(values: np.ndarray) -> dict:
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        return {"n": 0, "mean": 0.0, "std": 0.0, "frac_near_zero": 1.0}
    return {"n": int(v.size), "mean": float(v.mean()), "std": float(v.std()),
            "frac_near_zero": float(np.mean(np.abs(v) < 0.01))}


def weight_distribution_export(ckpt: Checkpoint, path=None) -> dict:
    """Export the cross-entropy weights and the TSPG-boosted (base + offset) weights.

    Returns ``{label: summary}``; rows are written to ``path`` as
    ``objective,value`` when given.
    """
    vectors = {"ce": ckpt.base}
    if "tspg" in ckpt.offsets:
        vectors["ce+tspg"] = ckpt.base + ckpt.offsets["tspg"]
    if path is not None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["objective", "value"])
            for label, vec in vectors.items():
                for x in vec:
                    w.writerow([label, f"{x:.9g}"])
    summary = {label: weight_summary(vec) for label, vec in vectors.items()}
    if "ce+tspg" in summary:
        summary["std_ratio_tspg_vs_ce"] = (summary["ce+tspg"]["std"] / summary["ce"]["std"]
                                           if summary["ce"]["std"] > 0 else float("nan"))
    return summary
