"""Experiment grid configuration: JSON parsing, validation and serialization."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .constellation import ConfigError, ConstellationConfig
from .joint import DEMAND_MODES, PER_GRAPH
from .mcf import ROUTING_MODES, SPLITTABLE

UNIFORM_DISTINCT = "uniform_distinct"
PAIR_POLICIES = (UNIFORM_DISTINCT,)


class ConfigSyntaxError(ValueError):
    """The configuration text is not valid JSON."""


class SchemaError(ConfigError):
    """Unknown key or wrongly typed value."""


class InvariantError(ConfigError):
    """Well-typed values that violate a grid invariant."""


@dataclass(frozen=True)
class DemandPolicy:
    """Either ``fixed`` (one value for every commodity) or ``uniform`` integers in ``[low, high]``.

    A fixed policy without a value uses the permanent-link bandwidth ``B_p``.
    """

    kind: str = "fixed"
    value: float | None = None
    low: int | None = None
    high: int | None = None

    def to_dict(self) -> dict:
        if self.kind == "fixed":
            return {"fixed": self.value}
        return {"uniform": [self.low, self.high]}

    @classmethod
    def from_dict(cls, doc) -> "DemandPolicy":
        if not isinstance(doc, dict) or len(doc) != 1:
            raise SchemaError("demand_policy", 'expected {"fixed": value} or {"uniform": [lo, hi]}')
        (kind, val), = doc.items()
        if kind == "fixed":
            if val is not None and (isinstance(val, bool) or not isinstance(val, (int, float))):
                raise SchemaError("demand_policy.fixed", f"must be a number or null, got {val!r}")
            if val is not None and not val > 0:
                raise InvariantError("demand_policy.fixed", f"demand must be > 0, got {val}")
            return cls("fixed", value=val)
        if kind == "uniform":
            if (not isinstance(val, list) or len(val) != 2
                    or any(isinstance(v, bool) or not isinstance(v, int) for v in val)):
                raise SchemaError("demand_policy.uniform", f"must be [lo, hi] integers, got {val!r}")
            lo, hi = val
            if not 1 <= lo <= hi:
                raise InvariantError("demand_policy.uniform", f"need 1 <= lo <= hi, got [{lo}, {hi}]")
            return cls("uniform", low=lo, high=hi)
        raise SchemaError("demand_policy", f"unknown policy {kind!r}; expected 'fixed' or 'uniform'")


@dataclass(frozen=True)
class ExperimentGrid:
    base: ConstellationConfig = field(default_factory=ConstellationConfig)
    k_values: tuple[int, ...] = (3, 5, 7, 9)
    T_values: tuple[int, ...] = (4, 6, 8, 10, 12)
    trials: int = 5
    demand_policy: DemandPolicy = field(default_factory=DemandPolicy)
    pair_policy: str = UNIFORM_DISTINCT
    demand_mode: str = PER_GRAPH
    routing_mode: str = SPLITTABLE
    master_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "k_values", tuple(self.k_values))
        object.__setattr__(self, "T_values", tuple(self.T_values))
        self.validate()

    def validate(self) -> None:
        for key in ("k_values", "T_values"):
            vals = getattr(self, key)
            if not vals:
                raise InvariantError(key, "must be nonempty")
            for v in vals:
                if isinstance(v, bool) or not isinstance(v, int):
                    raise SchemaError(key, f"entries must be integers, got {v!r}")
                if v < 1:
                    raise InvariantError(key, f"entries must be >= 1, got {v}")
        if isinstance(self.trials, bool) or not isinstance(self.trials, int):
            raise SchemaError("trials", f"must be an integer, got {self.trials!r}")
        if self.trials < 1:
            raise InvariantError("trials", f"must be >= 1, got {self.trials}")
        nodes = self.base.n * self.base.m
        if max(self.k_values) > nodes * (nodes - 1):
            raise InvariantError("k_values", f"k={max(self.k_values)} exceeds the {nodes * (nodes - 1)} "
                                             "distinct ordered node pairs")
        if self.pair_policy not in PAIR_POLICIES:
            raise InvariantError("pair_policy", f"must be one of {PAIR_POLICIES}")
        if self.demand_mode not in DEMAND_MODES:
            raise InvariantError("demand_mode", f"must be one of {DEMAND_MODES}")
        if self.routing_mode not in ROUTING_MODES:
            raise InvariantError("routing_mode", f"must be one of {ROUTING_MODES}")
        if isinstance(self.master_seed, bool) or not isinstance(self.master_seed, int):
            raise SchemaError("master_seed", f"must be an integer, got {self.master_seed!r}")
        if not 0 <= self.master_seed < 2**64:
            raise InvariantError("master_seed", "must fit in 64 unsigned bits")

    @property
    def T_max(self) -> int:
        return max(self.T_values)

    def demand_for(self, rng, k: int) -> list[float]:
        pol = self.demand_policy
        if pol.kind == "fixed":
            return [float(self.base.B_p if pol.value is None else pol.value)] * k
        return [float(v) for v in rng.integers(pol.low, pol.high + 1, size=k)]

    def to_dict(self) -> dict:
        base = self.base.to_dict()
        base.pop("T")
        base.pop("seed")
        return {
            "base": base,
            "k_values": list(self.k_values),
            "T_values": list(self.T_values),
            "trials": self.trials,
            "demand_policy": self.demand_policy.to_dict(),
            "pair_policy": self.pair_policy,
            "demand_mode": self.demand_mode,
            "routing_mode": self.routing_mode,
            "master_seed": self.master_seed,
        }

    def with_(self, **changes) -> "ExperimentGrid":
        data = {f: getattr(self, f) for f in self.__dataclass_fields__}
        data.update(changes)
        return ExperimentGrid(**data)


_GRID_KEYS = ("base", "k_values", "T_values", "trials", "demand_policy", "pair_policy",
              "demand_mode", "routing_mode", "master_seed")


def grid_from_dict(doc) -> ExperimentGrid:
    if not isinstance(doc, dict):
        raise SchemaError("<root>", "configuration must be a JSON object")
    for key in doc:
        if key not in _GRID_KEYS:
            raise SchemaError(key, "unknown configuration key")
    kwargs = {}
    if "base" in doc:
        base = doc["base"]
        if not isinstance(base, dict):
            raise SchemaError("base", "must be an object")
        for key in ("T", "seed"):
            if key in base:
                raise SchemaError(f"base.{key}", "set by the grid (T_values, master_seed), not the base")
        for key in base:
            if key not in ConstellationConfig.__dataclass_fields__:
                raise SchemaError(f"base.{key}", "unknown configuration key")
        try:
            kwargs["base"] = ConstellationConfig.from_dict(base)
        except ConfigError as exc:
            raise InvariantError(f"base.{exc.key}", str(exc).split(": ", 1)[-1]) from None
    for key in ("k_values", "T_values"):
        if key in doc:
            if not isinstance(doc[key], list):
                raise SchemaError(key, "must be a list of integers")
            kwargs[key] = tuple(doc[key])
    if "demand_policy" in doc:
        kwargs["demand_policy"] = DemandPolicy.from_dict(doc["demand_policy"])
    for key in ("pair_policy", "demand_mode", "routing_mode"):
        if key in doc:
            if not isinstance(doc[key], str):
                raise SchemaError(key, "must be a string")
            kwargs[key] = doc[key]
    for key in ("trials", "master_seed"):
        if key in doc:
            kwargs[key] = doc[key]
    return ExperimentGrid(**kwargs)


def parse_config(text: str) -> ExperimentGrid:
    """Parse and validate a JSON grid description; missing keys take the defaults."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigSyntaxError(f"invalid JSON: {exc}") from None
    return grid_from_dict(doc)


def serialize_config(grid: ExperimentGrid) -> str:
    return json.dumps(grid.to_dict(), indent=2, sort_keys=True) + "\n"
