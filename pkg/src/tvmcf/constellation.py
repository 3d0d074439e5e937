"""Time-varying constellation graphs.

Satellites sit on ``n`` orbits of ``m`` slots; satellite ``(i, j)`` is node
``i * m + j``. Links are undirected in geometry but every link becomes two
directed edges whose capacities are drawn independently per step.

Capacity draws use a counter-style derivation: the stream for directed
edge ``(u, v)`` at step ``t`` is ``PCG64(SeedSequence(seed, spawn_key=(t, u, v)))``.
A draw therefore depends only on ``(seed, t, u, v)``, never on the order in
which edges or steps are generated, and the first ``T`` steps of a network
are identical for every horizon ``T' >= T``.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

PERMANENT = "permanent"
TEMPORARY = "temporary"

Edge = tuple[int, int]


class ConfigError(ValueError):
    """Invalid configuration value; ``key`` names the offending field."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass(frozen=True)
class ConstellationConfig:
    n: int = 5
    m: int = 5
    p: int = 1
    q: int = 1
    T: int = 4
    B_p: int = 3
    B_t: int = 2
    seed: int = 0
    in_orbit_links: bool = True
    wrap_orbits: bool = True
    wrap_within_orbit: bool = True
    capacity_mode: str = "sampled"
    tx_count: int | list[int] = 1
    rx_count: int | list[int] = 1

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        for key in ("n", "m", "p", "q", "T", "B_p", "B_t", "seed"):
            val = getattr(self, key)
            if isinstance(val, bool) or not isinstance(val, int):
                raise ConfigError(key, f"must be an integer, got {val!r}")
        for key in ("in_orbit_links", "wrap_orbits", "wrap_within_orbit"):
            if not isinstance(getattr(self, key), bool):
                raise ConfigError(key, "must be a boolean")
        for key in ("n", "m", "T", "B_p"):
            if getattr(self, key) < 1:
                raise ConfigError(key, "must be >= 1")
        for key in ("p", "q", "B_t"):
            if getattr(self, key) < 0:
                raise ConfigError(key, "must be >= 0")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed", "must fit in 64 unsigned bits")
        if self.B_t >= self.B_p:
            raise ConfigError("B_t", f"temporary bandwidth {self.B_t} must be < B_p={self.B_p}")
        if self.p + 2 * self.q > self.m:
            raise ConfigError("q", f"p + 2q = {self.p + 2 * self.q} exceeds m = {self.m}")
        if self.capacity_mode not in ("sampled", "transceiver"):
            raise ConfigError("capacity_mode", "must be 'sampled' or 'transceiver'")
        for key in ("tx_count", "rx_count"):
            val = getattr(self, key)
            vals = val if isinstance(val, list) else [val]
            if isinstance(val, list) and len(val) != self.n * self.m:
                raise ConfigError(key, f"per-node list needs {self.n * self.m} entries")
            if any(isinstance(v, bool) or not isinstance(v, int) or v < 0 for v in vals):
                raise ConfigError(key, "counts must be nonnegative integers")

    @classmethod
    def from_dict(cls, data: Mapping) -> "ConstellationConfig":
        known = {f.name for f in fields(cls)}
        for key in data:
            if key not in known:
                raise ConfigError(key, "unknown key")
        return cls(**dict(data))

    def to_dict(self) -> dict:
        return asdict(self)

    def with_(self, **changes) -> "ConstellationConfig":
        data = self.to_dict()
        data.update(changes)
        return ConstellationConfig(**data)


@dataclass(frozen=True)
class NodeSpec:
    node_id: int
    tx_count: int | None = None
    rx_count: int | None = None


@dataclass(frozen=True)
class StepGraph:
    """One snapshot: directed edges with positive capacity."""

    num_nodes: int
    edges: tuple[Edge, ...]
    capacity: tuple[int, ...]

    @cached_property
    def cap(self) -> dict[Edge, int]:
        return dict(zip(self.edges, self.capacity))

    @cached_property
    def out_neighbors(self) -> list[list[int]]:
        nbrs: list[list[int]] = [[] for _ in range(self.num_nodes)]
        for u, v in self.edges:
            nbrs[u].append(v)
        return nbrs

    @cached_property
    def in_neighbors(self) -> list[list[int]]:
        nbrs: list[list[int]] = [[] for _ in range(self.num_nodes)]
        for u, v in self.edges:
            nbrs[v].append(u)
        return nbrs

    def restricted(self, keep: Iterable[Edge]) -> "StepGraph":
        keep = set(keep)
        pairs = [(e, c) for e, c in zip(self.edges, self.capacity) if e in keep]
        return StepGraph(self.num_nodes, tuple(e for e, _ in pairs), tuple(c for _, c in pairs))


@dataclass(frozen=True, eq=False)
class TimeVaryingNetwork:
    """Fixed node set with one directed capacity map per step.

    ``capacities[t, k]`` is the capacity of ``edges[k]`` at step ``t``; an
    edge with capacity zero is absent at that step.
    """

    nodes: tuple[NodeSpec, ...]
    edges: tuple[Edge, ...]
    link_class: Mapping[Edge, str]
    capacities: np.ndarray = field(repr=False)

    def __post_init__(self):
        caps = np.array(self.capacities, dtype=np.int64)
        if caps.ndim != 2:
            caps = caps.reshape(-1, len(self.edges))
        if caps.shape[1] != len(self.edges):
            raise ValueError("capacity rows must have one entry per edge")
        caps.setflags(write=False)
        object.__setattr__(self, "capacities", caps)
        if caps.shape[0] < 1:
            raise ValueError("a network needs at least one step")
        if (caps < 0).any():
            raise ValueError("capacities must be nonnegative")
        n = len(self.nodes)
        for u, v in self.edges:
            if not (0 <= u < n and 0 <= v < n) or u == v:
                raise ValueError(f"bad edge {(u, v)} for {n} nodes")
        if len(set(self.edges)) != len(self.edges):
            raise ValueError("duplicate edges")

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    @property
    def T(self) -> int:
        return self.capacities.shape[0]

    def step(self, t: int) -> StepGraph:
        row = self.capacities[t]
        keep = np.flatnonzero(row > 0)
        return StepGraph(self.num_nodes, tuple(self.edges[k] for k in keep),
                         tuple(int(row[k]) for k in keep))

    def steps(self) -> list[StepGraph]:
        return [self.step(t) for t in range(self.T)]

    def capacity_map(self, t: int) -> dict[Edge, int]:
        return {e: int(c) for e, c in zip(self.edges, self.capacities[t])}

    def prefix(self, T: int) -> "TimeVaryingNetwork":
        if not 1 <= T <= self.T:
            raise ValueError(f"prefix length {T} outside 1..{self.T}")
        return TimeVaryingNetwork(self.nodes, self.edges, self.link_class, self.capacities[:T])

    def with_steps(self, rows: Sequence[Sequence[int]]) -> "TimeVaryingNetwork":
        return TimeVaryingNetwork(self.nodes, self.edges, self.link_class, np.asarray(rows))

    @classmethod
    def from_steps(cls, num_nodes: int, steps: Sequence[Mapping[Edge, int]],
                   link_class: Mapping[Edge, str] | None = None) -> "TimeVaryingNetwork":
        """Build from per-step ``{(u, v): capacity}`` maps (missing edges are 0)."""
        edges = sorted({e for s in steps for e in s})
        caps = [[int(s.get(e, 0)) for e in edges] for s in steps]
        if link_class is None:
            link_class = {e: PERMANENT if all(r[k] > 0 for r in caps) else TEMPORARY
                          for k, e in enumerate(edges)}
        nodes = tuple(NodeSpec(i) for i in range(num_nodes))
        return cls(nodes, tuple(edges), dict(link_class), np.array(caps, dtype=np.int64))

    def out_neighbors(self, t: int, u: int) -> list[int]:
        return self.step(t).out_neighbors[u]

    def in_neighbors(self, t: int, u: int) -> list[int]:
        return self.step(t).in_neighbors[u]

    def __eq__(self, other) -> bool:
        if not isinstance(other, TimeVaryingNetwork):
            return NotImplemented
        return (self.nodes == other.nodes and self.edges == other.edges
                and dict(self.link_class) == dict(other.link_class)
                and np.array_equal(self.capacities, other.capacities))

    # topology dump: {"nodes": [...], "steps": [{"edges": [{u, v, cap, class}]}]}
    def to_json(self) -> str:
        nodes = []
        for spec in self.nodes:
            entry = {"id": spec.node_id}
            if spec.tx_count is not None:
                entry["tx_count"] = spec.tx_count
            if spec.rx_count is not None:
                entry["rx_count"] = spec.rx_count
            nodes.append(entry)
        steps = [
            {"edges": [{"u": u, "v": v, "cap": int(c), "class": self.link_class[(u, v)]}
                       for (u, v), c in zip(self.edges, row)]}
            for row in self.capacities
        ]
        return json.dumps({"nodes": nodes, "steps": steps}, indent=1) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "TimeVaryingNetwork":
        doc = json.loads(text)
        nodes = tuple(NodeSpec(d["id"], d.get("tx_count"), d.get("rx_count")) for d in doc["nodes"])
        if [nd.node_id for nd in nodes] != list(range(len(nodes))):
            raise ValueError("node ids must be 0..N-1 in order")
        if not doc["steps"]:
            raise ValueError("topology dump has no steps")
        first = doc["steps"][0]["edges"]
        edges = tuple((d["u"], d["v"]) for d in first)
        link_class = {(d["u"], d["v"]): d["class"] for d in first}
        rows = []
        for step in doc["steps"]:
            if tuple((d["u"], d["v"]) for d in step["edges"]) != edges:
                raise ValueError("every step must list the same edges in the same order")
            rows.append([d["cap"] for d in step["edges"]])
        return cls(nodes, edges, link_class, np.array(rows, dtype=np.int64))


def slot_offsets(count: int) -> list[int]:
    """Centered slot offsets ``0, +1, -1, +2, -2, ...`` truncated to ``count``."""
    out = []
    k = 0
    while len(out) < count:
        if k == 0:
            out.append(0)
        else:
            out.append(k)
            if len(out) < count:
                out.append(-k)
        k += 1
    return out


def undirected_links(config: ConstellationConfig) -> dict[frozenset, str]:
    """Undirected links of the constellation, keyed by node pair, valued by class."""
    n, m = config.n, config.m
    links: dict[frozenset, str] = {}

    def add(a: int, b: int, cls: str) -> None:
        if a == b:
            return
        key = frozenset((a, b))
        if links.get(key) != PERMANENT:
            links[key] = cls

    if config.in_orbit_links:
        for i in range(n):
            for j in range(m):
                if j + 1 < m:
                    add(i * m + j, i * m + j + 1, PERMANENT)
                elif config.wrap_within_orbit:
                    add(i * m + j, i * m, PERMANENT)

    offsets = slot_offsets(config.p + 2 * config.q)
    for i in range(n):
        nxt = i + 1
        if nxt == n:
            if not config.wrap_orbits:
                continue
            nxt = 0
        if nxt == i:
            continue
        for j in range(m):
            for k, off in enumerate(offsets):
                cls = PERMANENT if k < config.p else TEMPORARY
                add(i * m + j, nxt * m + (j + off) % m, cls)
    return links


def _stream(seed: int, step: int, u: int, v: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(step, u, v))))


def edge_stream(seed: int, step: int, edge: Edge) -> np.random.Generator:
    """The RNG stream that decides ``edge``'s capacity at ``step``."""
    return _stream(seed, step, edge[0], edge[1])


def sample_capacity(link_class: str, rng: np.random.Generator, B_p: int, B_t: int) -> int:
    """Uniform integer in ``1..B_p`` (permanent) or ``0..B_t`` (temporary)."""
    if link_class == PERMANENT:
        return int(rng.integers(1, B_p, endpoint=True))
    if link_class == TEMPORARY:
        return int(rng.integers(0, B_t, endpoint=True))
    raise ValueError(f"unknown link class {link_class!r}")


def _count(val, node: int) -> int:
    return val[node] if isinstance(val, list) else val


def generate_network(config: ConstellationConfig) -> TimeVaryingNetwork:
    config.validate()
    links = undirected_links(config)
    link_class: dict[Edge, str] = {}
    for pair, cls in links.items():
        a, b = sorted(pair)
        link_class[(a, b)] = cls
        link_class[(b, a)] = cls
    edges = tuple(sorted(link_class))
    N = config.n * config.m

    if config.capacity_mode == "transceiver":
        nodes = tuple(NodeSpec(u, _count(config.tx_count, u), _count(config.rx_count, u)) for u in range(N))
        row = [min(nodes[u].tx_count, nodes[v].rx_count) for u, v in edges]
        caps = np.tile(np.array(row, dtype=np.int64), (config.T, 1))
    else:
        nodes = tuple(NodeSpec(u) for u in range(N))
        caps = np.empty((config.T, len(edges)), dtype=np.int64)
        for t in range(config.T):
            for k, e in enumerate(edges):
                caps[t, k] = sample_capacity(link_class[e], edge_stream(config.seed, t, e),
                                             config.B_p, config.B_t)
    return TimeVaryingNetwork(nodes, edges, link_class, caps)


def common_support(network: TimeVaryingNetwork) -> set[Edge]:
    """Directed edges with capacity at least one in every step."""
    keep = network.capacities.min(axis=0) >= 1
    return {e for e, k in zip(network.edges, keep) if k}
