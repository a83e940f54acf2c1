from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # make oracles importable

from cascade_logic import (Network, NodeSpec, Rule, UNIFORM, assign_thresholds,
                           count_fires, generate_er, make_rng, mix_seed)

GOLDEN = Path(__file__).parent / "golden"


def triangle_network() -> Network:
    """Fully connected 3-node network, all antagonistic with phi=0.75, seed 0.

    Nodes 1 and 2 carry the two-input NAND threshold; whichever is examined
    first fires (fraction 1/2 < 0.75) and then blocks the other (1 >= 0.75),
    so the final state depends on the order.
    """
    nodes = tuple(NodeSpec(i, Rule.ANTAGONISTIC, 0.75) for i in range(3))
    return Network(nodes=nodes, directed=False, edges=((0, 1), (0, 2), (1, 2)),
                   seeds=frozenset({0}))


def random_instance(seed: int, n: int, z: float, rule: Rule,
                    num_seeds: int = 1):
    """A random assigned network plus a deterministic seed-node set."""
    p = z / (n - 1) if n > 1 else 0.0
    network = generate_er(n, p, mix_seed(seed, 0))
    network = assign_thresholds(network, UNIFORM, rule, rng_seed=mix_seed(seed, 1))
    picks = make_rng(mix_seed(seed, 2)).permutation(n)[:num_seeds]
    return network, frozenset(int(s) for s in picks)


def assert_stable(network, final) -> None:
    """One extra verification pass: no unlabeled node may fire."""
    for u in range(network.n):
        if u in final:
            continue
        spec = network.nodes[u]
        nbrs = network.in_neighbors[u]
        count = sum(1 for v in nbrs if v in final)
        assert not count_fires(spec.rule, count, len(nbrs), spec.phi), (
            f"node {u} still fires in the claimed fixpoint")


@pytest.fixture
def triangle() -> Network:
    return triangle_network()
