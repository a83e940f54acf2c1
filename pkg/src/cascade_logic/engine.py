"""Cascade dynamics: labeling rules, pass-based schedules, runs to fixpoint.

A run starts from a set of seed nodes (labeled, exempt from examination) and
repeatedly examines unlabeled nodes. A MONOTONE node labels itself when its
labeled-neighbor fraction nu reaches its threshold (nu >= phi); an
ANTAGONISTIC node labels itself while the fraction is still below it
(nu < phi). Labels are never removed, and a node labeled mid-pass counts
toward the fractions seen later in the same pass.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from ._seeds import make_rng
from .net import Network, Rule

# A configuration is just the set of currently labeled node ids.
Configuration = frozenset


@dataclass(frozen=True)
class RandomSweep:
    """Each pass examines the currently-unlabeled nodes in a fresh random
    permutation; stops after the first pass that labels nothing."""

    rng_seed: int


@dataclass(frozen=True)
class ExplicitOrder:
    """Each pass examines nodes in the given fixed order (already-labeled
    entries are skipped) until a pass labels nothing. The order must mention
    every non-seed node at least once."""

    order: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "order", tuple(int(u) for u in self.order))


@dataclass(frozen=True)
class Topological:
    """One pass over the non-seed nodes in dependency order; only valid on
    directed acyclic networks. This is the combinational-circuit schedule."""


ScheduleMode = Union[RandomSweep, ExplicitOrder, Topological]


@dataclass(frozen=True)
class CascadeResult:
    """Outcome of a run.

    ``final`` is the labeled set, ``size_fraction`` its fraction of all
    nodes. ``labeling_order`` lists the nodes labeled during the run (seeds
    are labeled at time zero and not listed). ``passes`` counts examination
    passes including the final no-change pass.
    """

    final: Configuration
    size_fraction: float
    labeling_order: tuple[int, ...]
    passes: int


def neighbor_fraction(network: Network, config, u: int) -> float:
    """Fraction of u's neighbors (in-neighbors when directed) in `config`.

    Degree-0 nodes have fraction 0 by convention.
    """
    nbrs = network.in_neighbors[u]
    if not nbrs:
        return 0.0
    labeled = sum(1 for v in nbrs if v in config)
    return labeled / len(nbrs)


def fires(rule: Rule, nu, phi) -> bool:
    """The labeling predicate: MONOTONE fires at nu >= phi, ANTAGONISTIC at nu < phi.

    Mixed float/Fraction arguments compare exactly.
    """
    if rule is Rule.MONOTONE:
        return nu >= phi
    if rule is Rule.ANTAGONISTIC:
        return nu < phi
    raise ValueError(f"unknown rule {rule!r}")


def count_fires(rule: Rule, labeled: int, degree: int, phi) -> bool:
    """`fires` on the (labeled count, degree) pair, exact for Fraction phi."""
    if degree == 0:
        return (phi <= 0) if rule is Rule.MONOTONE else (phi > 0)
    if isinstance(phi, Fraction):
        lhs = labeled * phi.denominator
        rhs = phi.numerator * degree
        return lhs >= rhs if rule is Rule.MONOTONE else lhs < rhs
    nu = labeled / degree
    return nu >= phi if rule is Rule.MONOTONE else nu < phi


def tlu_fires(weights: Sequence[float], inputs: Sequence, degree: int, phi) -> bool:
    """Threshold-logic-unit form of the antagonistic rule.

    Fires when (w . x) / degree < phi, with x read as 0/1 bits. With unit
    weights this is exactly fires(ANTAGONISTIC, nu, phi) for nu the labeled
    fraction of `degree` neighbors.
    """
    if degree < 1:
        raise ValueError(f"degree must be >= 1, got {degree}")
    if len(weights) != degree or len(inputs) != degree:
        raise ValueError("weights and inputs must both have length `degree`")
    dot = sum(w * (1 if x else 0) for w, x in zip(weights, inputs))
    return dot / degree < phi


def topological_order(network: Network) -> tuple[int, ...]:
    """All node ids in dependency order (Kahn's algorithm, smallest id first).

    Raises ValueError for undirected or cyclic networks.
    """
    if not network.directed:
        raise ValueError("topological order requires a directed network")
    n = network.n
    indeg = list(network.in_degrees)
    ready = [u for u in range(n) if indeg[u] == 0]
    heapq.heapify(ready)
    out = network.out_neighbors
    order = []
    while ready:
        u = heapq.heappop(ready)
        order.append(u)
        for v in out[u]:
            indeg[v] -= 1
            if indeg[v] == 0:
                heapq.heappush(ready, v)
    if len(order) < n:
        raise ValueError("network contains a cycle")
    return tuple(order)


def run_cascade(network: Network, seeds: Optional[Iterable[int]],
                mode: ScheduleMode) -> CascadeResult:
    """Run the cascade from `seeds` (or the network's own seed set) to a fixpoint.

    Labeling takes effect immediately, so a node labeled mid-pass is visible
    to nodes examined after it. The run is deterministic given the mode,
    including RandomSweep's rng_seed.
    """
    if not network.thresholds_assigned:
        raise ValueError("thresholds not assigned; call assign_thresholds first")
    n = network.n
    seed_set = network.seeds if seeds is None else frozenset(int(s) for s in seeds)
    for s in seed_set:
        if not 0 <= s < n:
            raise ValueError(f"seed {s} is not a node id")

    mono = Rule.MONOTONE
    rules = [spec.rule for spec in network.nodes]
    phis = [spec.phi for spec in network.nodes]
    out = network.out_neighbors
    in_deg = network.in_degrees
    labels = [False] * n
    counts = [0] * n  # labeled in-neighbors, maintained incrementally
    labeling_order: list[int] = []

    for s in seed_set:
        labels[s] = True
    for s in seed_set:
        for v in out[s]:
            counts[v] += 1

    def examine(u: int) -> bool:
        deg = in_deg[u]
        phi = phis[u]
        if deg == 0:
            hit = (phi <= 0) if rules[u] is mono else (phi > 0)
        elif isinstance(phi, Fraction):
            lhs = counts[u] * phi.denominator
            rhs = phi.numerator * deg
            hit = (lhs >= rhs) if rules[u] is mono else (lhs < rhs)
        else:
            nu = counts[u] / deg
            hit = (nu >= phi) if rules[u] is mono else (nu < phi)
        if hit:
            labels[u] = True
            for v in out[u]:
                counts[v] += 1
            labeling_order.append(u)
        return hit

    passes = 0
    if isinstance(mode, RandomSweep):
        rng = make_rng(mode.rng_seed)
        while True:
            passes += 1
            pending = [u for u in range(n) if not labels[u]]
            changed = 0
            if pending:
                for u in rng.permutation(np.asarray(pending, dtype=np.int64)).tolist():
                    changed += examine(u)
            if changed == 0:
                break
    elif isinstance(mode, ExplicitOrder):
        missing = set(range(n)) - seed_set - set(mode.order)
        if missing:
            raise ValueError(
                f"explicit order must mention every non-seed node; missing {sorted(missing)}"
            )
        while True:
            passes += 1
            changed = 0
            for u in mode.order:
                if not 0 <= u < n:
                    raise ValueError(f"order entry {u} is not a node id")
                if labels[u]:
                    continue
                changed += examine(u)
            if changed == 0:
                break
    elif isinstance(mode, Topological):
        passes = 1
        for u in topological_order(network):
            if not labels[u]:
                examine(u)
    else:
        raise TypeError(f"unknown schedule mode {mode!r}")

    final = frozenset(u for u in range(n) if labels[u])
    return CascadeResult(
        final=final,
        size_fraction=len(final) / n,
        labeling_order=tuple(labeling_order),
        passes=passes,
    )


def is_global(result: CascadeResult, fraction_threshold: float = 0.5) -> bool:
    """Whether the cascade reached at least `fraction_threshold` of all nodes."""
    if not 0 < fraction_threshold <= 1:
        raise ValueError(
            f"fraction_threshold must lie in (0, 1], got {fraction_threshold}"
        )
    return result.size_fraction >= fraction_threshold
