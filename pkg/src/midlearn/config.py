"""Run configuration shared by the CLI and the JSON config file.

The config file is a flat JSON object whose keys are the field names of
:class:`RunConfig`. Unknown keys are rejected; command-line flags override
values read from the file.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from typing import List, Optional

from .middleware import EXTENSIONS, NONSTRICT, OBSERVATIONS, STANDARD, STRICT, PortKind
from .teacher import EqConfig

KIND_ALIASES = {
    "standard": STANDARD,
    "port": STANDARD,
    "nonstrict": NONSTRICT,
    "buffered-nonstrict": NONSTRICT,
    NONSTRICT: NONSTRICT,
    "strict": STRICT,
    "buffered-strict": STRICT,
    STRICT: STRICT,
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    # port under learning
    kind: str = "standard"
    n: Optional[int] = None
    extensions: List[str] = field(default_factory=list)
    observation: str = "delivery"
    interrupt_mode: str = "actual"
    # equivalence testing
    extra_states: int = 2
    random_words: int = 100
    max_word_len: int = 20
    seed: int = 0
    use_cache: bool = True
    # case studies
    case: str = "case1"
    port: str = "strict"
    n1: int = 100
    n2: int = 100
    n3: int = 100
    size: int = 1
    nonblocking_first: bool = False
    compress: bool = False
    order: str = "dfs"
    max_states: Optional[int] = None
    max_time: Optional[float] = None
    # outputs
    out: Optional[str] = None
    dot: Optional[str] = None
    witness: Optional[str] = None
    json_report: Optional[str] = None

    def validate(self) -> "RunConfig":
        if self.kind not in KIND_ALIASES:
            raise ConfigError(f"unknown port kind {self.kind!r}")
        if self.port not in KIND_ALIASES:
            raise ConfigError(f"unknown port kind {self.port!r}")
        bad = set(self.extensions) - set(EXTENSIONS)
        if bad:
            raise ConfigError(f"unknown extensions {sorted(bad)}")
        if self.observation not in OBSERVATIONS:
            raise ConfigError(f"unknown observation map {self.observation!r}")
        if self.case not in ("case1", "case2"):
            raise ConfigError(f"unknown case study {self.case!r}")
        if self.order not in ("dfs", "bfs"):
            raise ConfigError(f"unknown search order {self.order!r}")
        try:
            self.eq_config()
            self.port_kind()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        for name in ("n1", "n2", "n3", "size"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be at least 1")
        return self

    def port_kind(self) -> PortKind:
        variant = KIND_ALIASES[self.kind]
        cap = self.n
        if variant == STRICT and cap is None:
            cap = 3
        if variant == STANDARD:
            cap = None
        return PortKind(variant, cap, frozenset(self.extensions), self.interrupt_mode)

    def eq_config(self) -> EqConfig:
        return EqConfig(self.extra_states, self.random_words, self.max_word_len, self.seed)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        return cls(**data)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def loads(cls, text: str) -> "RunConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(data)
