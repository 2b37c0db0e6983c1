"""Node configuration.

Single key-value text file (``key = value``, ``#`` comments); every setting
can be overridden by an environment variable named ``FACTLEDGER_<KEY>``.
List values are comma-separated.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields, replace
from typing import Mapping, Optional

from .errors import ConfigError

_DEF_ORGS = ("org1", "org2", "org3")


@dataclass(frozen=True)
class NodeConfig:
    # topology
    orgs: tuple[str, ...] = _DEF_ORGS
    endorsements_required: int = 2
    votes_collection_orgs: tuple[str, ...] = ()   # empty = all orgs
    # ordering
    max_block_txs: int = 10
    cut_timeout_ms: int = 500
    cut_on_idle: bool = True
    # consensus / incentives
    quorum: int = 3
    consensus_mode: str = "simple_majority"
    reward_per_aligned_vote: int = 10
    credibility_step: float = 0.1
    # scoring
    suspicion_threshold: float = 0.7
    lexicon_path: str = ""                        # empty = packaged default
    # service
    host: str = "127.0.0.1"
    port: int = 8370
    session_ttl_hours: float = 8.0
    request_log: bool = True
    ui_dir: str = ""                              # optional static SPA mount
    # identity
    curator_id: str = "curator"
    curator_credential: str = "curator-secret"
    # persistence / determinism
    data_dir: str = "./factledger-data"
    deterministic_time: bool = False
    time_start_ms: int = 1_600_000_000_000
    time_step_ms: int = 1000
    rng_seed: int = -1                            # -1 = non-deterministic
    trace: bool = False

    def check(self) -> "NodeConfig":
        if not self.orgs or len(set(self.orgs)) != len(self.orgs):
            raise ConfigError("orgs must be unique and non-empty")
        if not 1 <= self.endorsements_required <= len(self.orgs):
            raise ConfigError(
                f"endorsements_required {self.endorsements_required} not "
                f"satisfiable with {len(self.orgs)} orgs")
        unknown = set(self.votes_collection_orgs) - set(self.orgs)
        if unknown:
            raise ConfigError(f"votes collection names unknown orgs {sorted(unknown)}")
        if self.max_block_txs < 1:
            raise ConfigError("max_block_txs must be positive")
        if self.quorum < 1:
            raise ConfigError("quorum must be at least 1")
        if not 0.0 <= self.suspicion_threshold <= 1.0:
            raise ConfigError("suspicion_threshold must be in [0, 1]")
        return self

    @property
    def votes_members(self) -> tuple[str, ...]:
        return self.votes_collection_orgs or self.orgs

    @property
    def seeded(self) -> bool:
        return self.rng_seed >= 0


_BOOL_TRUE = {"1", "true", "yes", "on"}
_BOOL_FALSE = {"0", "false", "no", "off"}


def _convert(name: str, text: str, kind: type):
    text = text.strip()
    if kind is bool:
        low = text.lower()
        if low in _BOOL_TRUE:
            return True
        if low in _BOOL_FALSE:
            return False
        raise ConfigError(f"{name}: expected a boolean, got {text!r}")
    if kind is int:
        try:
            return int(text)
        except ValueError as exc:
            raise ConfigError(f"{name}: expected an integer, got {text!r}") from exc
    if kind is float:
        try:
            return float(text)
        except ValueError as exc:
            raise ConfigError(f"{name}: expected a number, got {text!r}") from exc
    if kind is tuple:
        return tuple(part.strip() for part in text.split(",") if part.strip())
    return text


def _field_kinds(cfg: NodeConfig) -> dict[str, type]:
    return {f.name: type(getattr(cfg, f.name)) for f in fields(NodeConfig)}


def parse_config(text: str, base: Optional[NodeConfig] = None) -> NodeConfig:
    cfg = base or NodeConfig()
    kinds = _field_kinds(cfg)
    updates = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected key = value")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in kinds:
            raise ConfigError(f"config line {lineno}: unknown key {key!r}")
        updates[key] = _convert(key, value, kinds[key])
    return replace(cfg, **updates)


def load_config(path: Optional[str] = None,
                env: Optional[Mapping[str, str]] = None) -> NodeConfig:
    """File settings (if any), then ``FACTLEDGER_*`` environment overrides."""
    cfg = NodeConfig()
    if path:
        if not os.path.exists(path):
            raise ConfigError(f"config file not found: {path}", path=path)
        with open(path, "r", encoding="utf-8") as fh:
            cfg = parse_config(fh.read(), cfg)
    env = os.environ if env is None else env
    kinds = _field_kinds(cfg)
    updates = {}
    for name, kind in kinds.items():
        raw = env.get(f"FACTLEDGER_{name.upper()}")
        if raw is not None:
            updates[name] = _convert(name, raw, kind)
    if updates:
        cfg = replace(cfg, **updates)
    return cfg.check()
