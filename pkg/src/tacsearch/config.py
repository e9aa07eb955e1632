"""Search and learning configuration, loadable from flat ``key = value`` files."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path


@dataclass(frozen=True)
class SearchConfig:
    c_policy: float = 0.5
    c_exploration: float = 2.0
    eval_radius: int = 10
    tactic_timeout: float = 0.05
    auto_timeout: float = 0.1
    auto_premises: int = 32
    global_timeout: float = 60.0
    preselect_n: int = 500
    ortho_radius: int = 20
    abs_radius: int = 16
    # feature switches used for ablations
    orthogonalization: bool = True
    abstraction: bool = True
    evaluation: bool = True
    auto_priority: bool = True
    learned_policy: bool = True
    learned_order: bool = True
    # optional hard cap on MCTS steps (deterministic budgets)
    max_steps: int | None = None
    minimize: bool = True

    def __post_init__(self):
        for name in ("c_exploration", "eval_radius", "tactic_timeout", "auto_timeout", "auto_premises",
                     "preselect_n", "ortho_radius", "abs_radius"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.c_policy < 1:
            raise ValueError("c_policy must lie in (0, 1)")
        if self.global_timeout < 0:
            raise ValueError("global_timeout must be nonnegative")
        if self.max_steps is not None and self.max_steps < 0:
            raise ValueError("max_steps must be nonnegative")

    def with_(self, **kw) -> SearchConfig:
        return replace(self, **kw)

    def as_dict(self) -> dict:
        return asdict(self)


BASELINE = dict(
    orthogonalization=False,
    abstraction=False,
    evaluation=False,
    auto_priority=False,
    learned_policy=False,
    learned_order=False,
)


def baseline(cfg: SearchConfig | None = None) -> SearchConfig:
    """No learning: uniform priors, corpus-order tactics, no abstraction or evaluation."""
    return (cfg or SearchConfig()).with_(**BASELINE)


_FIELDS = {f.name: f for f in fields(SearchConfig)}


def coerce(key: str, raw: str):
    if key not in _FIELDS:
        raise ValueError(f"unknown config key {key!r}")
    default = getattr(SearchConfig(), key)
    raw = raw.strip()
    if key == "max_steps":
        return None if raw.lower() in ("", "none") else int(raw)
    if isinstance(default, bool):
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"{key}: expected a boolean, got {raw!r}")
    return type(default)(raw)


def parse_kv(text: str) -> dict[str, str]:
    out = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {n}: expected key = value")
        k, v = line.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def load_config(path: str | Path, base: SearchConfig | None = None) -> SearchConfig:
    kv = parse_kv(Path(path).read_text())
    return (base or SearchConfig()).with_(**{k: coerce(k, v) for k, v in kv.items()})


def load_grid(path: str | Path) -> dict[str, list]:
    """Grid file: ``key = v1, v2, ...`` per line; every value is validated upfront."""
    kv = parse_kv(Path(path).read_text())
    grid = {k: [coerce(k, x) for x in v.split(",")] for k, v in kv.items()}
    for k, vals in grid.items():
        for v in vals:
            SearchConfig().with_(**{k: v})
    return grid
