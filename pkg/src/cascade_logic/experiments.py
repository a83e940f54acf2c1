"""Cascade-frequency sweeps over mean degree.

For each mean degree z, many independent realizations are run: a fresh ER
graph with p = z/(n-1), a constant threshold for every node, a few random
seed nodes, and one random-sweep cascade. Per-z frequencies come from one of
two metrics: the fraction of runs whose cascade size reaches a fixed bound
(GlobalFraction), or the fraction strictly exceeding the median size that
the monotone rule produces on the same graphs (MedianExceedance).
Realization seeds derive from (master_seed, z index, realization index) with
SplitMix64 mixing, so results are byte-identical for any worker count.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from ._seeds import GENERATOR_NAME, make_rng, mix_seed
from .engine import RandomSweep, run_cascade
from .net import Rule, assign_thresholds, generate_er


@dataclass(frozen=True)
class GlobalFraction:
    """Count a realization when its cascade size reaches `threshold`."""

    threshold: float = 0.5

    def __post_init__(self):
        if not 0 < self.threshold <= 1:
            raise ValueError(f"threshold must lie in (0, 1], got {self.threshold}")


@dataclass(frozen=True)
class MedianExceedance:
    """Count a realization when its cascade size strictly exceeds the median
    cascade size at the same z.

    The median is taken from a reference sweep run with the MONOTONE rule on
    identical graphs and seed nodes (the sweep's own sizes when the sweep is
    already monotone). Measured against that baseline, antagonistic cascades
    score high exactly where monotone ones stay small, and vice versa.
    """


Metric = Union[GlobalFraction, MedianExceedance]


@dataclass(frozen=True)
class SweepSpec:
    n: int
    z_values: tuple[float, ...]
    phi_star: float
    rule: Rule
    realizations: int
    master_seed: int
    seeds_per_run: int = 1
    metric: Metric = field(default_factory=GlobalFraction)

    def __post_init__(self):
        object.__setattr__(self, "z_values", tuple(float(z) for z in self.z_values))
        if self.n < 2:
            raise ValueError(f"n must be >= 2, got {self.n}")
        if not self.z_values:
            raise ValueError("z_values must be non-empty")
        for z in self.z_values:
            if not 0 < z < self.n - 1:
                raise ValueError(f"z must lie in (0, n-1); got z={z} with n={self.n}")
        if not 0 <= self.phi_star <= 1:
            raise ValueError(f"phi_star must lie in [0, 1], got {self.phi_star}")
        if self.realizations < 1:
            raise ValueError(f"realizations must be >= 1, got {self.realizations}")
        if not 1 <= self.seeds_per_run <= self.n:
            raise ValueError(f"seeds_per_run must lie in [1, n], got {self.seeds_per_run}")


@dataclass(frozen=True)
class SweepRow:
    z: float
    frequency: float
    mean_size: float
    median_size: float
    realizations: int


def _realization_size(spec: SweepSpec, zi: int, r: int) -> float:
    base = mix_seed(spec.master_seed, zi, r)
    p = spec.z_values[zi] / (spec.n - 1)
    graph = generate_er(spec.n, p, mix_seed(base, 0))
    network = assign_thresholds(graph, spec.phi_star, spec.rule)
    seed_nodes = make_rng(mix_seed(base, 1)).permutation(spec.n)[: spec.seeds_per_run]
    result = run_cascade(network, (int(s) for s in seed_nodes),
                         RandomSweep(mix_seed(base, 2)))
    return result.size_fraction


def _size_task(args) -> float:
    spec, zi, r = args
    return _realization_size(spec, zi, r)


def cascade_sizes(spec: SweepSpec, jobs: Optional[int] = None) -> list[np.ndarray]:
    """Per z value, the cascade size of every realization, in realization order."""
    tasks = [(spec, zi, r)
             for zi in range(len(spec.z_values))
             for r in range(spec.realizations)]
    if jobs and jobs > 1:
        chunk = max(1, len(tasks) // (jobs * 4))
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            flat = list(pool.map(_size_task, tasks, chunksize=chunk))
    else:
        flat = [_size_task(t) for t in tasks]
    per_z = []
    for zi in range(len(spec.z_values)):
        start = zi * spec.realizations
        per_z.append(np.asarray(flat[start:start + spec.realizations]))
    return per_z


def reference_sizes(spec: SweepSpec, jobs: Optional[int] = None) -> list[np.ndarray]:
    """Sizes of the MONOTONE-rule reference sweep on the same graphs and seeds."""
    if spec.rule is Rule.MONOTONE:
        return cascade_sizes(spec, jobs)
    return cascade_sizes(replace(spec, rule=Rule.MONOTONE), jobs)


def rows_from_sizes(spec: SweepSpec, sizes: Sequence[np.ndarray],
                    reference: Optional[Sequence[np.ndarray]] = None) -> list[SweepRow]:
    """Aggregate raw sizes into per-z rows, ordered by ascending z.

    MedianExceedance needs the reference sweep's sizes (see
    :func:`reference_sizes`); GlobalFraction ignores them.
    """
    if isinstance(spec.metric, MedianExceedance) and reference is None:
        raise ValueError("MedianExceedance needs the reference sweep's sizes")
    rows = []
    for zi, z in enumerate(spec.z_values):
        arr = sizes[zi]
        if isinstance(spec.metric, GlobalFraction):
            freq = float(np.mean(arr >= spec.metric.threshold))
        else:
            freq = float(np.mean(arr > np.median(reference[zi])))
        rows.append(SweepRow(z=z, frequency=freq, mean_size=float(arr.mean()),
                             median_size=float(np.median(arr)), realizations=arr.size))
    rows.sort(key=lambda row: row.z)
    return rows


def run_sweep(spec: SweepSpec, jobs: Optional[int] = None) -> list[SweepRow]:
    """Run the whole sweep; identical output for any `jobs` value."""
    sizes = cascade_sizes(spec, jobs)
    if isinstance(spec.metric, MedianExceedance):
        return rows_from_sizes(spec, sizes, reference_sizes(spec, jobs))
    return rows_from_sizes(spec, sizes)


def metric_name(metric: Metric) -> str:
    if isinstance(metric, GlobalFraction):
        return f"global:{metric.threshold:.6g}"
    return "median"


_CSV_HEADER = "z,realizations,frequency,mean_size,median_size"


def emit_csv(rows: Sequence[SweepRow], destination, *, spec: SweepSpec) -> None:
    """Write sweep rows as CSV with a provenance comment line.

    Floating values carry 6 significant digits; the same spec always gives
    byte-identical files.
    """
    if not rows:
        raise ValueError("no rows to emit")
    lines = [
        f"# metric={metric_name(spec.metric)}, phi_star={spec.phi_star:.6g}, "
        f"n={spec.n}, rule={spec.rule.value}, master_seed={spec.master_seed}, "
        f"generator={GENERATOR_NAME}",
        _CSV_HEADER,
    ]
    for row in rows:
        lines.append(f"{row.z:.6g},{row.realizations},{row.frequency:.6g},"
                     f"{row.mean_size:.6g},{row.median_size:.6g}")
    text = "\n".join(lines) + "\n"
    if hasattr(destination, "write"):
        destination.write(text)
    else:
        Path(destination).write_text(text, encoding="utf-8")


def parse_csv(source) -> tuple[list[SweepRow], dict[str, str]]:
    """Read back an emitted CSV: (rows at printed precision, provenance map)."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        text = Path(source).read_text(encoding="utf-8")
    meta: dict[str, str] = {}
    rows: list[SweepRow] = []
    saw_header = False
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            for part in line[1:].split(","):
                if "=" in part:
                    key, value = part.split("=", 1)
                    meta[key.strip()] = value.strip()
            continue
        if not saw_header:
            if line != _CSV_HEADER:
                raise ValueError(f"unexpected CSV header {line!r}")
            saw_header = True
            continue
        z, realizations, freq, mean_size, median_size = line.split(",")
        rows.append(SweepRow(z=float(z), frequency=float(freq),
                             mean_size=float(mean_size),
                             median_size=float(median_size),
                             realizations=int(realizations)))
    if not saw_header:
        raise ValueError("missing CSV header")
    return rows, meta
