"""Run configuration: a flat ``key = value`` file with dotted section keys.

Every key has a default matching the published protocol, so a file holding
only ``game = connect4`` (or none at all, with ``--game``) reproduces it.
Lines are ``key = value``; ``#`` starts a comment; lists are comma separated;
an empty value keeps the default.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Optional

from .games import GAME_IDS
from .training import TrainConfig


class ConfigError(ValueError):
    pass


def _bool(text: str) -> bool:
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in _strs(text))


def _strs(text: str) -> tuple[str, ...]:
    return tuple(x.strip() for x in text.split(",") if x.strip())


def _opt_int(text: str) -> Optional[int]:
    return int(text) if text else None


def _game(text: str) -> str:
    if text not in GAME_IDS and not (text.startswith("hex") and text[3:].isdigit()):
        raise ValueError(f"unknown game {text!r} (choose from {', '.join(GAME_IDS)})")
    return text


_T = TrainConfig()

# key -> (parser, default); ``None`` defaults mean "derive" or "not set"
SCHEMA: dict[str, tuple[Callable[[str], Any], Any]] = {
    "game": (_game, None),
    "seed": (int, 0),
    "out": (str, None),
    "hex_size": (int, _T.hex_size),
    "train.games": (int, _T.games),
    "train.iterations": (int, _T.mcts_iterations),
    "train.exploration": (float, _T.exploration),
    "train.batch_size": (int, _T.batch_size),
    "train.learning_rate": (float, _T.learning_rate),
    "train.rms_decay": (float, _T.rms_decay),
    "train.momentum": (float, _T.momentum),
    "train.epsilon": (float, _T.epsilon),
    "train.buffer_capacity": (int, _T.buffer_capacity),
    "train.move_cap": (int, _T.move_cap),
    "train.playout_cap": (int, _T.playout_cap),
    "train.checkpoints": (_ints, None),
    "train.objectives": (_strs, _T.objectives),
    "train.playout": (str, _T.playout),
    "train.replace_when_small": (_bool, _T.replace_when_small),
    "eval.games": (int, 40),
    "eval.agent_a": (str, "raw:tspg"),
    "eval.agent_b": (str, "raw:ce"),
    "eval.iterations": (int, _T.mcts_iterations),
    "eval.exploration": (float, _T.exploration),
    "eval.sampled": (_bool, False),
    "eval.checkpoints": (_strs, ()),
    "eval.checkpoint_games": (_opt_int, None),
    "eval.observe": (_strs, ()),
    "eval.move_cap": (int, _T.move_cap),
    "eval.playout_cap": (int, _T.playout_cap),
    "eval.resamples": (int, 10000),
    "eval.confidence": (float, 0.95),
    "analyze.bins": (int, 20),
    "analyze.records": (_strs, ()),
    "analyze.checkpoint": (str, None),
}

PUBLISHED_CHECKPOINTS = (1, 25, 50, 100, 200)


@dataclass
class RunConfig:
    values: dict[str, Any]

    @classmethod
    def defaults(cls) -> "RunConfig":
        return cls({k: default for k, (_, default) in SCHEMA.items()})

    @classmethod
    def parse(cls, text: str, source: str = "<config>") -> "RunConfig":
        cfg = cls.defaults()
        seen: dict[str, int] = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in SCHEMA:
                raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
            if key in seen:
                raise ConfigError(f"{source}:{lineno}: {key!r} already set on line {seen[key]}")
            seen[key] = lineno
            if not value:
                continue  # empty means "use the default"
            try:
                cfg.values[key] = SCHEMA[key][0](value)
            except ValueError as exc:
                raise ConfigError(f"{source}:{lineno}: bad value for {key!r}: {exc}") from None
        return cfg

    @classmethod
    def load(cls, path) -> "RunConfig":
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
        return cls.parse(text, str(path))

    def override(self, **kw) -> "RunConfig":
        """Apply command-line values (``None`` means "not given")."""
        for key, value in kw.items():
            if value is None:
                continue
            if key not in SCHEMA:
                raise ConfigError(f"unknown key {key!r}")
            self.values[key] = value
        return self

    def __getitem__(self, key: str):
        return self.values[key]

    def require(self, *keys: str) -> None:
        missing = [k for k in keys if self.values.get(k) is None]
        if missing:
            raise ConfigError(f"missing required key: {', '.join(missing)}")

    def checkpoints(self) -> tuple[int, ...]:
        """Configured checkpoints, or the published ones up to ``train.games`` plus the last game."""
        if self["train.checkpoints"]:
            return self["train.checkpoints"]
        games = self["train.games"]
        return tuple(sorted({c for c in PUBLISHED_CHECKPOINTS if c <= games} | {games}))

    def train_config(self) -> TrainConfig:
        self.require("game")
        v = self.values
        try:
            return TrainConfig(
                game=v["game"], games=v["train.games"], mcts_iterations=v["train.iterations"],
                exploration=v["train.exploration"], batch_size=v["train.batch_size"],
                learning_rate=v["train.learning_rate"], rms_decay=v["train.rms_decay"],
                momentum=v["train.momentum"], epsilon=v["train.epsilon"],
                buffer_capacity=v["train.buffer_capacity"], move_cap=v["train.move_cap"],
                playout_cap=v["train.playout_cap"], checkpoints=self.checkpoints(),
                objectives=v["train.objectives"], playout=v["train.playout"],
                replace_when_small=v["train.replace_when_small"], hex_size=v["hex_size"], seed=v["seed"])
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def to_text(self) -> str:
        """Fully resolved configuration, in the file format."""
        lines = []
        for key, value in self.values.items():
            if key == "train.checkpoints" and value is None and self.values.get("train.games"):
                value = self.checkpoints()
            if value is None:
                text = ""
            elif isinstance(value, bool):
                text = str(value).lower()
            elif isinstance(value, tuple):
                text = ",".join(str(x) for x in value)
            else:
                text = str(value)
            lines.append(f"{key} = {text}".rstrip())
        return "\n".join(lines) + "\n"
