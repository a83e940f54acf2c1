"""Compile Boolean expressions into directed cascade networks.

A single node computes a gate through its threshold alone: with fan-in k it
is an OR for any phi in (0, 1/k] and an AND for phi in ((k-1)/k, 1] under
the monotone rule, and a NOR / NAND on the same intervals under the
antagonistic rule; a one-input antagonistic node is a NOT (any phi in
(0, 1]). Compiled thresholds are exact Fractions so the >=/< tie-breaks at
interval boundaries behave exactly.

Circuits are DAGs with named in-degree-0 input nodes; evaluating assigns the
1-inputs as cascade seeds and reads outputs as membership in the final
labeled set under the topological schedule.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from .engine import Topological, count_fires, run_cascade, topological_order
from .net import (Network, NetworkFormatError, NodeSpec, Rule, load_bundle,
                  save_network)
from .parser import And, Expr, Nand, Nor, Not, Or, Var, Xor, parse_expr

MAX_FAN_IN = 64
MAX_TABLE_INPUTS = 20


class GateKind(Enum):
    OR = "or"
    AND = "and"
    NOR = "nor"
    NAND = "nand"
    NOT = "not"
    BUF = "buf"


class Basis(Enum):
    MIXED = "mixed"
    NAND_ONLY = "nand"
    NOR_ONLY = "nor"


@dataclass(frozen=True)
class GateAssignment:
    """Rule and threshold realizing `kind` at the given fan-in."""

    kind: GateKind
    fan_in: int
    rule: Rule
    phi: Fraction


def phi_interval(kind: GateKind, fan_in: int) -> tuple[Fraction, Fraction]:
    """The half-open interval (lo, hi] of thresholds realizing the gate."""
    k = fan_in
    if kind in (GateKind.NOT, GateKind.BUF):
        if k != 1:
            raise ValueError(f"{kind.value} takes exactly one input, got {k}")
        return Fraction(0), Fraction(1)
    if k < 2:
        raise ValueError(f"{kind.value} needs fan-in >= 2, got {k}")
    if k > MAX_FAN_IN:
        raise ValueError(f"fan-in {k} exceeds the supported maximum {MAX_FAN_IN}")
    if kind in (GateKind.OR, GateKind.NOR):
        return Fraction(0), Fraction(1, k)
    if kind in (GateKind.AND, GateKind.NAND):
        return Fraction(k - 1, k), Fraction(1)
    raise ValueError(f"unknown gate kind {kind!r}")


_GATE_RULES = {
    GateKind.OR: Rule.MONOTONE,
    GateKind.AND: Rule.MONOTONE,
    GateKind.BUF: Rule.MONOTONE,
    GateKind.NOR: Rule.ANTAGONISTIC,
    GateKind.NAND: Rule.ANTAGONISTIC,
    GateKind.NOT: Rule.ANTAGONISTIC,
}


def phi_for_gate(kind: GateKind, fan_in: int) -> GateAssignment:
    """Canonical threshold assignment for a gate.

    OR/NOR take 1/k (the included interval endpoint), AND/NAND the midpoint
    (2k-1)/(2k), NOT/BUF 1/2.
    """
    lo, hi = phi_interval(kind, fan_in)
    if kind in (GateKind.OR, GateKind.NOR):
        phi = hi
    elif kind in (GateKind.AND, GateKind.NAND):
        phi = (lo + hi) / 2
    else:
        phi = Fraction(1, 2)
    return GateAssignment(kind=kind, fan_in=fan_in, rule=_GATE_RULES[kind], phi=phi)


@dataclass(frozen=True)
class CompiledCircuit:
    """A directed acyclic cascade network with named input and output nodes."""

    network: Network
    inputs: dict[str, int]
    outputs: dict[str, int]

    def __post_init__(self):
        if not self.network.directed:
            raise ValueError("a circuit network must be directed")
        topological_order(self.network)  # raises on cycles
        n = self.network.n
        in_deg = self.network.in_degrees
        if not self.inputs:
            raise ValueError("a circuit needs at least one input")
        if not self.outputs:
            raise ValueError("a circuit needs at least one output")
        for name, nid in self.inputs.items():
            if not 0 <= nid < n:
                raise ValueError(f"input {name!r} references a missing node")
            if in_deg[nid] != 0:
                raise ValueError(f"input {name!r} must have in-degree 0")
        reach = set(self.inputs.values())
        for u in topological_order(self.network):
            if any(v in reach for v in self.network.in_neighbors[u]):
                reach.add(u)
        for name, nid in self.outputs.items():
            if not 0 <= nid < n:
                raise ValueError(f"output {name!r} references a missing node")
            if nid not in reach:
                raise ValueError(f"output {name!r} is not reachable from any input")


class _Builder:
    """Accumulates nodes and edges with structural hashing, so identical
    sub-circuits share one node and the result is a DAG, not a tree."""

    def __init__(self):
        self.nodes: list[NodeSpec] = []
        self.edges: list[tuple[int, int]] = []
        self.inputs: dict[str, int] = {}
        self._memo: dict = {}

    def _new_node(self, rule: Rule, phi) -> int:
        nid = len(self.nodes)
        self.nodes.append(NodeSpec(nid, rule, phi))
        return nid

    def input_node(self, name: str) -> int:
        if name not in self.inputs:
            # inert placeholder: degree 0, monotone, 0 >= 1/2 never fires
            self.inputs[name] = self._new_node(Rule.MONOTONE, Fraction(1, 2))
        return self.inputs[name]

    def gate(self, kind: GateKind, children: Sequence[int]) -> int:
        children = tuple(dict.fromkeys(children))  # simple graph: one edge per child
        if len(children) == 1:
            if kind in (GateKind.AND, GateKind.OR):
                kind = GateKind.BUF
            elif kind in (GateKind.NAND, GateKind.NOR):
                kind = GateKind.NOT
        key = (kind, children)
        if key in self._memo:
            return self._memo[key]
        assign = phi_for_gate(kind, len(children))
        nid = self._new_node(assign.rule, assign.phi)
        for c in children:
            self.edges.append((c, nid))
        self._memo[key] = nid
        return nid

    def network(self) -> Network:
        return Network(nodes=tuple(self.nodes), directed=True,
                       edges=tuple(self.edges), seeds=frozenset(),
                       thresholds_assigned=True)


def _xor_as_nands(a: Expr, b: Expr) -> Expr:
    t = Nand((a, b))
    return Nand((Nand((a, t)), Nand((b, t))))


def _lower_mixed(e: Expr) -> Expr:
    if isinstance(e, Var):
        return e
    if isinstance(e, Not):
        return Not(_lower_mixed(e.arg))
    if isinstance(e, Xor):
        return _xor_as_nands(_lower_mixed(e.left), _lower_mixed(e.right))
    return type(e)(tuple(_lower_mixed(a) for a in e.args))


def _lower_nand(e: Expr) -> Expr:
    if isinstance(e, Var):
        return e
    if isinstance(e, Not):
        return Not(_lower_nand(e.arg))
    if isinstance(e, Xor):
        return _xor_as_nands(_lower_nand(e.left), _lower_nand(e.right))
    args = tuple(_lower_nand(a) for a in e.args)
    if isinstance(e, Nand):
        return Nand(args)
    if isinstance(e, And):
        return Not(Nand(args))
    if isinstance(e, Or):
        return Nand(tuple(Not(a) for a in args))
    if isinstance(e, Nor):
        return Not(Nand(tuple(Not(a) for a in args)))
    raise TypeError(f"unknown expression node {e!r}")


def _lower_nor(e: Expr) -> Expr:
    if isinstance(e, Var):
        return e
    if isinstance(e, Not):
        return Not(_lower_nor(e.arg))
    if isinstance(e, Xor):
        a, b = _lower_nor(e.left), _lower_nor(e.right)
        return _lower_nor(Or((And((a, Not(b))), And((Not(a), b)))))
    args = tuple(_lower_nor(a) for a in e.args)
    if isinstance(e, Nor):
        return Nor(args)
    if isinstance(e, Or):
        return Not(Nor(args))
    if isinstance(e, And):
        return Nor(tuple(Not(a) for a in args))
    if isinstance(e, Nand):
        return Not(Nor(tuple(Not(a) for a in args)))
    raise TypeError(f"unknown expression node {e!r}")


_LOWERERS = {
    Basis.MIXED: _lower_mixed,
    Basis.NAND_ONLY: _lower_nand,
    Basis.NOR_ONLY: _lower_nor,
}

_GATE_FOR_NODE = {And: GateKind.AND, Or: GateKind.OR,
                  Nand: GateKind.NAND, Nor: GateKind.NOR}


def _emit(e: Expr, builder: _Builder) -> int:
    if isinstance(e, Var):
        return builder.input_node(e.name)
    if isinstance(e, Not):
        return builder.gate(GateKind.NOT, (_emit(e.arg, builder),))
    kind = _GATE_FOR_NODE[type(e)]
    return builder.gate(kind, tuple(_emit(a, builder) for a in e.args))


def compile_expr(expr: Union[Expr, str], basis: Basis = Basis.MIXED) -> CompiledCircuit:
    """Compile an expression (or its source text) into a cascade circuit.

    MIXED maps every AST node to its gate directly; NAND_ONLY / NOR_ONLY
    rewrite the tree into the chosen universal basis first, with NOT kept as
    the one-input antagonistic node (the fan-in-1 degeneration of either
    gate). XOR is never a single node: it lowers to four NANDs (MIXED,
    NAND_ONLY) or the sum-of-products form (NOR_ONLY). The single output is
    named "out"; inputs keep first-appearance order.
    """
    if isinstance(expr, str):
        expr = parse_expr(expr)
    lowered = _LOWERERS[basis](expr)
    builder = _Builder()
    out = _emit(lowered, builder)
    return CompiledCircuit(network=builder.network(),
                           inputs=dict(builder.inputs), outputs={"out": out})


def build_gate(kind: GateKind, fan_in: int, phi=None,
               rule: Optional[Rule] = None) -> CompiledCircuit:
    """A single-gate circuit with inputs x0..x{k-1}, optionally overriding
    the gate node's threshold or rule (for boundary experiments)."""
    assign = phi_for_gate(kind, fan_in)
    gate_id = fan_in
    nodes = tuple(NodeSpec(i, Rule.MONOTONE, Fraction(1, 2)) for i in range(fan_in))
    nodes += (NodeSpec(gate_id, assign.rule if rule is None else rule,
                       assign.phi if phi is None else phi),)
    network = Network(nodes=nodes, directed=True,
                      edges=tuple((i, gate_id) for i in range(fan_in)),
                      seeds=frozenset(), thresholds_assigned=True)
    return CompiledCircuit(network=network,
                           inputs={f"x{i}": i for i in range(fan_in)},
                           outputs={"out": gate_id})


def compile_half_adder() -> CompiledCircuit:
    """Two-bit adder out of five inverting gates.

    Four two-input NAND-threshold nodes form the sum, and a one-input
    complement of the first NAND forms the carry. Outputs: sum, carry.
    """
    b = _Builder()
    a = b.input_node("a")
    bb = b.input_node("b")
    n1 = b.gate(GateKind.NAND, (a, bb))
    n2 = b.gate(GateKind.NAND, (a, n1))
    n3 = b.gate(GateKind.NAND, (bb, n1))
    s = b.gate(GateKind.NAND, (n2, n3))
    c = b.gate(GateKind.NOT, (n1,))
    return CompiledCircuit(network=b.network(), inputs=dict(b.inputs),
                           outputs={"sum": s, "carry": c})


def input_seeds(circuit: CompiledCircuit, assignment: Mapping[str, int]) -> frozenset[int]:
    """Seed set for an input assignment; the assignment must cover the inputs exactly."""
    missing = set(circuit.inputs) - set(assignment)
    extra = set(assignment) - set(circuit.inputs)
    if missing or extra:
        parts = []
        if missing:
            parts.append(f"missing {sorted(missing)}")
        if extra:
            parts.append(f"unexpected {sorted(extra)}")
        raise ValueError("assignment must cover the inputs exactly: " + ", ".join(parts))
    return frozenset(circuit.inputs[name] for name, bit in assignment.items() if bit)


def evaluate(circuit: CompiledCircuit, assignment: Mapping[str, int]) -> dict[str, int]:
    """Evaluate the circuit on one input assignment.

    Inputs assigned 1 become cascade seeds; the run uses the topological
    schedule, and each output bit is membership of its node in the final
    labeled set.
    """
    seeds = input_seeds(circuit, assignment)
    result = run_cascade(circuit.network, seeds, Topological())
    return {name: int(nid in result.final) for name, nid in circuit.outputs.items()}


@dataclass(frozen=True)
class TruthTable:
    """Output bits for all 2^m assignments, in binary counting order.

    Row index r assigns bit (r >> (m-1-j)) & 1 to input j, so the first
    input is the most significant counter bit.
    """

    input_names: tuple[str, ...]
    output_names: tuple[str, ...]
    rows: tuple[tuple[int, ...], ...]

    def column(self, name: str) -> "TruthTable":
        """Project onto a single output column."""
        j = self.output_names.index(name)
        return TruthTable(self.input_names, (name,),
                          tuple((row[j],) for row in self.rows))

    def to_csv(self) -> str:
        m = len(self.input_names)
        lines = [",".join(self.input_names + self.output_names)]
        for r, row in enumerate(self.rows):
            bits = [(r >> (m - 1 - j)) & 1 for j in range(m)]
            lines.append(",".join(str(b) for b in bits + list(row)))
        return "\n".join(lines) + "\n"


def truth_table(circuit: CompiledCircuit) -> TruthTable:
    """Evaluate all 2^m input assignments in binary counting order.

    Rows are computed in one vectorized pass per node along the same
    topological schedule `evaluate` uses, with exact threshold comparisons;
    the result equals calling `evaluate` row by row.
    """
    m = len(circuit.inputs)
    if m > MAX_TABLE_INPUTS:
        raise ValueError(f"{m} inputs would need 2^{m} rows; the limit is "
                         f"{MAX_TABLE_INPUTS} inputs")
    net = circuit.network
    names = tuple(circuit.inputs)
    n_rows = 1 << m
    row_ids = np.arange(n_rows, dtype=np.int64)
    values = np.zeros((n_rows, net.n), dtype=bool)
    for j, name in enumerate(names):
        values[:, circuit.inputs[name]] = (row_ids >> (m - 1 - j)) & 1
    input_ids = set(circuit.inputs.values())
    for u in topological_order(net):
        if u in input_ids:
            continue
        spec = net.nodes[u]
        nbrs = net.in_neighbors[u]
        deg = len(nbrs)
        if deg == 0:
            values[:, u] = count_fires(spec.rule, 0, 0, spec.phi)
            continue
        counts = values[:, list(nbrs)].sum(axis=1)
        phi = spec.phi
        if isinstance(phi, Fraction):
            lhs = counts * phi.denominator
            rhs = phi.numerator * deg
            col = lhs >= rhs if spec.rule is Rule.MONOTONE else lhs < rhs
        else:
            nu = counts / deg
            col = nu >= phi if spec.rule is Rule.MONOTONE else nu < phi
        values[:, u] = col
    out_names = tuple(circuit.outputs)
    out_ids = [circuit.outputs[name] for name in out_names]
    rows = tuple(tuple(int(b) for b in row) for row in values[:, out_ids])
    return TruthTable(input_names=names, output_names=out_names, rows=rows)


def _single_output_bits(table: TruthTable) -> list[int]:
    if len(table.output_names) != 1:
        raise ValueError("monotonicity checks take a single-output table; "
                         "use .column(name) first")
    return [row[0] for row in table.rows]


def is_monotone_increasing(table: TruthTable) -> bool:
    """True when flipping any input 0 -> 1 never drops the output."""
    bits = _single_output_bits(table)
    m = len(table.input_names)
    for r in range(len(bits)):
        for j in range(m):
            above = r | (1 << j)
            if above != r and bits[r] > bits[above]:
                return False
    return True


def is_monotone_decreasing(table: TruthTable) -> bool:
    """True when flipping any input 0 -> 1 never raises the output."""
    bits = _single_output_bits(table)
    m = len(table.input_names)
    for r in range(len(bits)):
        for j in range(m):
            above = r | (1 << j)
            if above != r and bits[r] < bits[above]:
                return False
    return True


def save_circuit(circuit: CompiledCircuit, destination) -> None:
    """Write the circuit in the network file format with its port maps."""
    save_network(circuit.network, destination,
                 inputs=circuit.inputs, outputs=circuit.outputs)


def load_circuit(source) -> CompiledCircuit:
    """Load a circuit file; requires the inputs/outputs maps and a valid DAG."""
    bundle = load_bundle(source)
    if bundle.inputs is None or bundle.outputs is None:
        raise NetworkFormatError("a circuit file needs 'inputs' and 'outputs' maps")
    try:
        return CompiledCircuit(network=bundle.network, inputs=bundle.inputs,
                               outputs=bundle.outputs)
    except ValueError as e:
        raise NetworkFormatError(str(e)) from None
