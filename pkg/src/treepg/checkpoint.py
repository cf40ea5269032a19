"""Line-text checkpoints; floats are stored in hex so loading is bit-exact."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .features import FeatureSet
from .games import Game, make_game
from .policy import PolicySpec

MAGIC = "treepg-checkpoint 1"


class CheckpointError(ValueError):
    pass


@dataclass(eq=False)
class Checkpoint:
    """Parameters after ``games`` self-play games.

    ``offsets`` maps objective name (``"tspg"``, ``"double"``) to an offset
    vector trained on top of the frozen cross-entropy base.
    """

    game: Game
    features: FeatureSet
    base: np.ndarray
    offsets: dict[str, np.ndarray] = field(default_factory=dict)
    games: int = 0
    steps: int = 0

    def policy(self, name: str = "ce") -> PolicySpec:
        if name == "ce":
            return PolicySpec(self.base.copy())
        if name not in self.offsets:
            raise KeyError(f"checkpoint has no {name!r} offsets")
        return PolicySpec(self.base.copy(), self.offsets[name].copy())

    def to_text(self) -> str:
        lines = [MAGIC, f"game {self.game.game_id}", f"games {self.games}", f"steps {self.steps}",
                 f"feature_version {self.features.version}", f"features {len(self.features)}"]
        lines += self.features.to_lines()
        vectors = [("ce", self.base)] + sorted(self.offsets.items())
        for name, vec in vectors:
            lines.append(f"weights {name} {len(vec)}")
            lines.append(" ".join(float(x).hex() for x in vec))
        lines.append("end")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Checkpoint":
        lines = text.splitlines()
        try:
            if lines[0] != MAGIC:
                raise CheckpointError("not a checkpoint file")
            game = make_game(lines[1].split()[1])
            games = int(lines[2].split()[1])
            steps = int(lines[3].split()[1])
            version = int(lines[4].split()[1])
            nfeat = int(lines[5].split()[1])
            fs = FeatureSet.from_lines(game, lines[6:6 + nfeat], version)
            i = 6 + nfeat
            vectors = {}
            while lines[i] != "end":
                _, name, n = lines[i].split()
                vals = lines[i + 1].split()
                if len(vals) != int(n):
                    raise CheckpointError(f"vector {name} has {len(vals)} values, header says {n}")
                vectors[name] = np.array([float.fromhex(v) for v in vals], dtype=np.float64)
                i += 2
        except (IndexError, ValueError) as exc:
            raise CheckpointError(f"malformed checkpoint: {exc}") from exc
        if "ce" not in vectors:
            raise CheckpointError("checkpoint has no cross-entropy weights")
        base = vectors.pop("ce")
        return cls(game, fs, base, vectors, games, steps)

    def save(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_text())
        return path

    @classmethod
    def load(cls, path) -> "Checkpoint":
        return cls.from_text(Path(path).read_text())


def find_checkpoint(run_dir, games: Optional[int] = None) -> Path:
    """Checkpoint of ``run_dir`` after ``games`` games (latest when ``None``)."""
    run_dir = Path(run_dir)
    found = sorted(run_dir.glob("*.ckpt"), key=lambda p: int(p.stem))
    if games is not None:
        found = [p for p in found if int(p.stem) == games]
    if not found:
        raise FileNotFoundError(f"no checkpoint in {run_dir}" + (f" for game {games}" if games else ""))
    return found[-1]
