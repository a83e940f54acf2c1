"""Cascade networks: random and hand-built graphs, thresholds, statistics, files.

Networks are immutable simple graphs. Each node carries a labeling rule and
a threshold ``phi``; thresholds may be floats (random or constant draws) or
exact ``Fraction`` values (compiler-assigned), and the engine compares them
exactly in either case.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from pathlib import Path
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from ._seeds import make_rng

PhiValue = Union[float, Fraction]

UNIFORM = "uniform"


class Rule(Enum):
    """Per-node labeling rule; values are the on-disk names."""

    MONOTONE = "gcm"  # fires when the labeled-neighbor fraction nu >= phi
    ANTAGONISTIC = "agcm"  # fires when nu < phi


@dataclass(frozen=True)
class NodeSpec:
    """One node: dense integer id, labeling rule, threshold in [0, 1]."""

    id: int
    rule: Rule
    phi: PhiValue

    def __post_init__(self):
        if self.id < 0:
            raise ValueError(f"node id must be non-negative, got {self.id}")
        if not isinstance(self.rule, Rule):
            raise ValueError(f"rule must be a Rule, got {self.rule!r}")
        if not 0 <= self.phi <= 1:
            raise ValueError(f"phi must lie in [0, 1], got {self.phi}")


@dataclass(frozen=True)
class Network:
    """An immutable simple graph with per-node rules and thresholds.

    Undirected edges are stored once as (u, v) with u < v (the constructor
    normalizes); directed edges are (source, destination) pairs. Self-loops
    and duplicate edges are rejected. ``thresholds_assigned`` is False for
    freshly generated graphs until :func:`assign_thresholds` runs; the engine
    refuses to cascade on unassigned networks. Instances are safe to share
    read-only across workers.
    """

    nodes: tuple[NodeSpec, ...]
    directed: bool
    edges: tuple[tuple[int, int], ...]
    seeds: frozenset[int] = frozenset()
    thresholds_assigned: bool = field(default=True, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "seeds", frozenset(int(s) for s in self.seeds))
        n = len(self.nodes)
        if n == 0:
            raise ValueError("network must have at least one node")
        for i, spec in enumerate(self.nodes):
            if spec.id != i:
                raise ValueError(
                    f"node ids must be dense and ordered: position {i} holds id {spec.id}"
                )
        normalized = []
        seen = set()
        for u, v in self.edges:
            u, v = int(u), int(v)
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) references a missing node")
            if u == v:
                raise ValueError(f"self-loop at node {u}")
            if not self.directed and u > v:
                u, v = v, u
            if (u, v) in seen:
                raise ValueError(f"duplicate edge ({u}, {v})")
            seen.add((u, v))
            normalized.append((u, v))
        object.__setattr__(self, "edges", tuple(normalized))
        for s in self.seeds:
            if not 0 <= s < n:
                raise ValueError(f"seed {s} is not a node id")

    @property
    def n(self) -> int:
        return len(self.nodes)

    @cached_property
    def in_neighbors(self) -> tuple[tuple[int, ...], ...]:
        """Per node, the nodes whose labels count toward its fraction.

        For undirected networks this is the plain neighbor list.
        """
        acc: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            acc[v].append(u)
            if not self.directed:
                acc[u].append(v)
        return tuple(tuple(a) for a in acc)

    @cached_property
    def out_neighbors(self) -> tuple[tuple[int, ...], ...]:
        """Per node, the nodes whose fraction changes when it gets labeled."""
        if not self.directed:
            return self.in_neighbors
        acc: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            acc[u].append(v)
        return tuple(tuple(a) for a in acc)

    @cached_property
    def in_degrees(self) -> tuple[int, ...]:
        return tuple(len(a) for a in self.in_neighbors)


@dataclass(frozen=True)
class NetworkStats:
    n: int
    edge_count: int
    mean_degree: float
    clustering_coefficient: float


def _bernoulli_positions(m: int, p: float, rng: np.random.Generator) -> np.ndarray:
    """Indices of successes among m independent Bernoulli(p) trials.

    Uses geometric gap-skipping, so cost scales with the number of successes
    rather than m.
    """
    if m <= 0 or p <= 0.0:
        return np.empty(0, dtype=np.int64)
    if p >= 1.0:
        return np.arange(m, dtype=np.int64)
    log_q = math.log1p(-p)
    chunks = []
    last = -1
    while True:
        want = int((m - last) * p * 1.1) + 16
        u = rng.random(want)
        gaps = np.floor(np.log1p(-u) / log_q)
        gaps = np.minimum(gaps, float(m)).astype(np.int64)  # avoid cumsum overflow
        pos = last + np.cumsum(gaps + 1)
        inside = pos[pos < m]
        chunks.append(inside)
        if inside.size < pos.size:
            break
        last = int(pos[-1])
    return np.concatenate(chunks)


def _pair_from_linear(idx: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Invert the lexicographic linearization of pairs (u, v), u < v."""
    if idx.size == 0:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty
    b = 2 * n - 1
    u = np.floor((b - np.sqrt(b * b - 8.0 * idx.astype(np.float64))) / 2.0).astype(np.int64)
    # float rounding can land one row off; nudge into place
    row_start = u * (2 * n - u - 1) // 2
    u = np.where(row_start > idx, u - 1, u)
    next_start = (u + 1) * (2 * n - u - 2) // 2
    u = np.where(idx >= next_start, u + 1, u)
    row_start = u * (2 * n - u - 1) // 2
    v = idx - row_start + u + 1
    return u, v


def generate_er(n: int, p: float, rng_seed: int) -> Network:
    """Erdős–Rényi G(n, p): each of the n(n-1)/2 pairs kept with probability p.

    Deterministic for fixed (n, p, rng_seed). Nodes get placeholder
    thresholds (MONOTONE, phi=0) and the result is flagged unassigned;
    call :func:`assign_thresholds` before running cascades.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    m = n * (n - 1) // 2
    positions = _bernoulli_positions(m, p, make_rng(rng_seed))
    us, vs = _pair_from_linear(positions, n)
    nodes = tuple(NodeSpec(i, Rule.MONOTONE, 0.0) for i in range(n))
    edges = tuple(zip(us.tolist(), vs.tolist()))
    return Network(nodes=nodes, directed=False, edges=edges, seeds=frozenset(),
                   thresholds_assigned=False)


def assign_thresholds(network: Network, phi, rule: Rule,
                      rng_seed: Optional[int] = None) -> Network:
    """Return a copy of `network` with every node given `rule` and a threshold.

    ``phi=UNIFORM`` draws thresholds independently from U[0, 1) and requires
    an ``rng_seed``; a real value in [0, 1] (float or Fraction) is assigned
    as a constant. Pure: same arguments, same result.
    """
    if phi == UNIFORM:
        if rng_seed is None:
            raise ValueError("uniform threshold assignment requires rng_seed")
        values: Sequence[PhiValue] = make_rng(rng_seed).random(network.n).tolist()
    else:
        if not 0 <= phi <= 1:
            raise ValueError(f"constant phi must lie in [0, 1], got {phi}")
        values = [phi] * network.n
    nodes = tuple(NodeSpec(i, rule, values[i]) for i in range(network.n))
    return replace(network, nodes=nodes, thresholds_assigned=True)


def stats(network: Network) -> NetworkStats:
    """Node count, edge count, mean degree, and average clustering coefficient.

    Clustering averages, over all nodes, the fraction of neighbor pairs that
    are themselves connected; nodes of degree < 2 contribute 0. Undirected
    networks only.
    """
    if network.directed:
        raise ValueError("stats requires an undirected network")
    adj = network.in_neighbors
    adj_sets = [set(a) for a in adj]
    total = 0.0
    for u in range(network.n):
        nbrs = adj[u]
        d = len(nbrs)
        if d < 2:
            continue
        links = sum(1 for a, b in combinations(nbrs, 2) if b in adj_sets[a])
        total += links / (d * (d - 1) / 2)
    return NetworkStats(
        n=network.n,
        edge_count=len(network.edges),
        mean_degree=2 * len(network.edges) / network.n,
        clustering_coefficient=total / network.n,
    )


# --- file format ------------------------------------------------------------
#
# A network file is one JSON document:
#   {"directed": bool,
#    "nodes":    [{"id": int, "rule": "gcm"|"agcm", "phi": float}, ...],
#    "edges":    [[int, int], ...],
#    "seeds":    [int, ...],
#    "inputs":   {name: id, ...},   # optional; circuits only
#    "outputs":  {name: id, ...}}   # optional; circuits only
#
# Fraction thresholds are written as their nearest float; the canonical gate
# values survive this because the engine's float path rounds the labeled
# fraction the same way.


class NetworkFormatError(ValueError):
    """A network file is malformed; the message names the offending field."""


@dataclass(frozen=True)
class NetworkBundle:
    """A parsed network file: the network plus optional circuit port maps."""

    network: Network
    inputs: Optional[dict[str, int]]
    outputs: Optional[dict[str, int]]


_TOP_KEYS = {"directed", "nodes", "edges", "seeds", "inputs", "outputs"}
_NODE_KEYS = {"id", "rule", "phi"}
_RULE_NAMES = {r.value: r for r in Rule}


def save_network(network: Network, destination, *,
                 inputs: Optional[Mapping[str, int]] = None,
                 outputs: Optional[Mapping[str, int]] = None) -> None:
    """Write `network` as a JSON document to a path or open text file."""
    doc: dict = {
        "directed": network.directed,
        "nodes": [
            {"id": s.id, "rule": s.rule.value, "phi": float(s.phi)} for s in network.nodes
        ],
        "edges": [[u, v] for u, v in network.edges],
        "seeds": sorted(network.seeds),
    }
    if inputs is not None:
        doc["inputs"] = {str(k): int(v) for k, v in inputs.items()}
    if outputs is not None:
        doc["outputs"] = {str(k): int(v) for k, v in outputs.items()}
    text = json.dumps(doc, indent=1) + "\n"
    if hasattr(destination, "write"):
        destination.write(text)
    else:
        Path(destination).write_text(text, encoding="utf-8")


def _expect(cond: bool, message: str) -> None:
    if not cond:
        raise NetworkFormatError(message)


def _as_number(value, where: str) -> float:
    _expect(isinstance(value, (int, float)) and not isinstance(value, bool),
            f"{where} must be a number, got {value!r}")
    return float(value)


def _as_index(value, where: str) -> int:
    _expect(isinstance(value, int) and not isinstance(value, bool),
            f"{where} must be an integer, got {value!r}")
    return value


def _parse_ports(doc: dict, key: str) -> Optional[dict[str, int]]:
    if key not in doc:
        return None
    raw = doc[key]
    _expect(isinstance(raw, dict), f"{key} must be an object of name -> node id")
    return {str(name): _as_index(v, f"{key}[{name!r}]") for name, v in raw.items()}


def load_bundle(source) -> NetworkBundle:
    """Parse a network file (path or open text file), validating the schema."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        text = Path(source).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise NetworkFormatError(
            f"invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}"
        ) from None

    _expect(isinstance(doc, dict), "top level must be a JSON object")
    unknown = set(doc) - _TOP_KEYS
    _expect(not unknown, f"unknown top-level keys: {sorted(unknown)}")
    for key in ("directed", "nodes", "edges", "seeds"):
        _expect(key in doc, f"missing required key {key!r}")
    _expect(isinstance(doc["directed"], bool), "directed must be a boolean")
    _expect(isinstance(doc["nodes"], list) and doc["nodes"], "nodes must be a non-empty list")
    _expect(isinstance(doc["edges"], list), "edges must be a list")
    _expect(isinstance(doc["seeds"], list), "seeds must be a list")

    parsed: dict[int, NodeSpec] = {}
    for i, raw in enumerate(doc["nodes"]):
        where = f"nodes[{i}]"
        _expect(isinstance(raw, dict), f"{where} must be an object")
        _expect(set(raw) == _NODE_KEYS,
                f"{where} must have exactly the keys id, rule, phi")
        nid = _as_index(raw["id"], f"{where}.id")
        _expect(raw["rule"] in _RULE_NAMES,
                f"{where}.rule: unknown rule name {raw['rule']!r}")
        phi = _as_number(raw["phi"], f"{where}.phi")
        _expect(0.0 <= phi <= 1.0, f"{where}.phi must lie in [0, 1], got {phi}")
        _expect(nid not in parsed, f"{where}.id: duplicate node id {nid}")
        parsed[nid] = NodeSpec(nid, _RULE_NAMES[raw["rule"]], phi)
    n = len(parsed)
    _expect(set(parsed) == set(range(n)),
            f"node ids must be exactly 0..{n - 1}")
    nodes = tuple(parsed[i] for i in range(n))

    edges = []
    for i, raw in enumerate(doc["edges"]):
        where = f"edges[{i}]"
        _expect(isinstance(raw, list) and len(raw) == 2, f"{where} must be a pair [u, v]")
        edges.append((_as_index(raw[0], f"{where}[0]"), _as_index(raw[1], f"{where}[1]")))
    seeds = [_as_index(s, f"seeds[{i}]") for i, s in enumerate(doc["seeds"])]

    try:
        network = Network(nodes=nodes, directed=doc["directed"], edges=tuple(edges),
                          seeds=frozenset(seeds), thresholds_assigned=True)
    except ValueError as e:
        raise NetworkFormatError(str(e)) from None

    inputs = _parse_ports(doc, "inputs")
    outputs = _parse_ports(doc, "outputs")
    for key, ports in (("inputs", inputs), ("outputs", outputs)):
        if ports:
            for name, nid in ports.items():
                _expect(0 <= nid < n, f"{key}[{name!r}] references a missing node")
    return NetworkBundle(network=network, inputs=inputs, outputs=outputs)


def load_network(source) -> Network:
    """Load a network file; circuit port maps, if present, are validated and dropped."""
    return load_bundle(source).network
