"""Exhaustive reachable-fixpoint enumeration and schedule-sensitivity checks.

Enumeration branches on single labeling events: from each configuration,
every currently-fireable unlabeled node gives one successor. Every
pass-based schedule is a path in this tree, so a unique enumerated fixpoint
means a schedule-independent final state, and multiple fixpoints mean the
outcome depends on examination order.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Optional, Sequence

from ._seeds import make_rng, mix_seed
from .circuit import CompiledCircuit, evaluate, input_seeds
from .engine import RandomSweep, count_fires, run_cascade
from .net import Network, Rule, assign_thresholds, generate_er, UNIFORM

DEFAULT_STATE_CAP = 1 << 22


@dataclass(frozen=True)
class FixpointSet:
    """All reachable stable configurations (exhaustive unless truncated)."""

    fixpoints: frozenset[frozenset[int]]
    explored_states: int
    truncated: bool


def enumerate_fixpoints(network: Network, seeds: Optional[Iterable[int]] = None,
                        state_cap: int = DEFAULT_STATE_CAP,
                        child_order: str = "ascending") -> FixpointSet:
    """Depth-first search over configurations reachable from the seed set.

    Configurations are bit masks over node ids; a visited set makes the
    search exhaustive. If more than `state_cap` distinct configurations get
    explored the result is flagged truncated (never silently cut short).
    `child_order` picks the branching heuristic (ascending or descending
    node id); the fixpoint set does not depend on it.
    """
    if not network.thresholds_assigned:
        raise ValueError("thresholds not assigned; call assign_thresholds first")
    if child_order not in ("ascending", "descending"):
        raise ValueError(f"unknown child_order {child_order!r}")
    n = network.n
    seed_set = network.seeds if seeds is None else frozenset(int(s) for s in seeds)
    for s in seed_set:
        if not 0 <= s < n:
            raise ValueError(f"seed {s} is not a node id")

    rules = [spec.rule for spec in network.nodes]
    phis = [spec.phi for spec in network.nodes]
    degs = network.in_degrees
    nbr_mask = [0] * n
    for u in range(n):
        for v in network.in_neighbors[u]:
            nbr_mask[u] |= 1 << v

    start = 0
    for s in seed_set:
        start |= 1 << s
    descending = child_order == "descending"

    visited: set[int] = set()
    fixpoints: set[int] = set()
    truncated = False
    stack = [start]
    while stack:
        cfg = stack.pop()
        if cfg in visited:
            continue
        if len(visited) >= state_cap:
            truncated = True
            break
        visited.add(cfg)
        fireable = [
            u for u in range(n)
            if not (cfg >> u) & 1
            and count_fires(rules[u], (cfg & nbr_mask[u]).bit_count(), degs[u], phis[u])
        ]
        if not fireable:
            fixpoints.add(cfg)
            continue
        if descending:
            fireable.reverse()
        for u in fireable:
            nxt = cfg | (1 << u)
            if nxt not in visited:
                stack.append(nxt)

    as_sets = frozenset(
        frozenset(u for u in range(n) if (cfg >> u) & 1) for cfg in fixpoints
    )
    return FixpointSet(fixpoints=as_sets, explored_states=len(visited),
                       truncated=truncated)


@dataclass(frozen=True)
class SensitivityReport:
    """How often free-running random schedules reproduce a reference output."""

    trials: int
    agree_fraction: float
    reference_output: tuple[int, ...]
    distinct_outcomes: int


def outcome_sensitivity(network: Network, seeds: Iterable[int],
                        watched: Sequence[int], reference: Sequence[int],
                        trials: int, rng_seed: int) -> SensitivityReport:
    """Run `trials` random-sweep cascades and compare the watched nodes'
    final bits against `reference`. Trial seeds derive from rng_seed."""
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    ref = tuple(int(b) for b in reference)
    if len(ref) != len(watched):
        raise ValueError("reference must have one bit per watched node")
    seed_set = frozenset(seeds)
    agree = 0
    seen = set()
    for t in range(trials):
        result = run_cascade(network, seed_set, RandomSweep(mix_seed(rng_seed, t)))
        bits = tuple(int(u in result.final) for u in watched)
        seen.add(bits)
        agree += bits == ref
    return SensitivityReport(trials=trials, agree_fraction=agree / trials,
                             reference_output=ref, distinct_outcomes=len(seen))


def schedule_sensitivity(circuit: CompiledCircuit, assignment: Mapping[str, int],
                         trials: int, rng_seed: int,
                         reference: Optional[Sequence[int]] = None) -> SensitivityReport:
    """Sensitivity of a circuit's outputs to the examination schedule.

    The reference is the topological evaluation unless given explicitly
    (pass one when the network has no topological order). Each trial runs a
    free-running random sweep that ignores the topology.
    """
    out_names = tuple(circuit.outputs)
    if reference is None:
        ref_bits = evaluate(circuit, assignment)
        reference = tuple(ref_bits[name] for name in out_names)
    watched = [circuit.outputs[name] for name in out_names]
    return outcome_sensitivity(circuit.network, input_seeds(circuit, assignment),
                               watched, reference, trials, rng_seed)


class Verdict(Enum):
    UNIQUE = "unique"
    NON_UNIQUE = "non-unique"
    INCONCLUSIVE = "inconclusive"


def _instance_fixpoints(args) -> tuple[int, bool]:
    n, z, rule, instance_seed, state_cap = args
    p = z / (n - 1) if n > 1 else 0.0
    graph = generate_er(n, p, mix_seed(instance_seed, 0))
    network = assign_thresholds(graph, UNIFORM, rule,
                                rng_seed=mix_seed(instance_seed, 1))
    seed_node = int(make_rng(mix_seed(instance_seed, 2)).integers(n))
    found = enumerate_fixpoints(network, {seed_node}, state_cap=state_cap)
    return len(found.fixpoints), found.truncated


def verify_gcm_determinism(n: int, z: float, instances: int, rng_seed: int,
                           rule: Rule = Rule.MONOTONE,
                           state_cap: int = DEFAULT_STATE_CAP,
                           jobs: Optional[int] = None) -> Verdict:
    """Check final-state uniqueness over random instances by exhaustive search.

    Each instance is an ER graph with uniform-random thresholds, the given
    rule, and one random seed node. UNIQUE means every instance had exactly
    one reachable fixpoint; NON_UNIQUE that some instance provably had more;
    INCONCLUSIVE that a search was truncated before finishing. Instances may
    run across workers; per-instance seeds make the verdict independent of
    scheduling.
    """
    if instances < 1:
        raise ValueError(f"instances must be >= 1, got {instances}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if n > 1 and not 0 < z < n - 1:
        raise ValueError(f"z must lie in (0, n-1), got {z}")
    tasks = [(n, z, rule, mix_seed(rng_seed, i), state_cap) for i in range(instances)]
    if jobs and jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_instance_fixpoints, tasks, chunksize=8))
    else:
        outcomes = [_instance_fixpoints(t) for t in tasks]
    if any(count > 1 for count, _ in outcomes):
        return Verdict.NON_UNIQUE
    if any(truncated for _, truncated in outcomes):
        return Verdict.INCONCLUSIVE
    return Verdict.UNIQUE
