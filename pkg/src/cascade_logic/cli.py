"""Command-line front end.

One executable with subcommands; network files are the interchange currency,
so commands pipe through files (compile writes a circuit file, table reads
one). Every command is deterministic given its flags: all randomness sits
behind an explicit --seed, and --jobs never changes output bytes.

Exit codes: 0 success, 1 usage error, 2 input-file error, 3 resource cap.
Failures print one JSON object on stderr: {"error": {"kind", "message"}}.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional, Sequence

from ._seeds import GENERATOR_NAME, mix_seed
from .analyze import (DEFAULT_STATE_CAP, Verdict, enumerate_fixpoints,
                      schedule_sensitivity, verify_gcm_determinism)
from .circuit import (Basis, compile_expr, load_circuit, save_circuit,
                      truth_table, evaluate)
from .engine import ExplicitOrder, RandomSweep, Topological, is_global, run_cascade
from .experiments import (GlobalFraction, MedianExceedance, SweepSpec,
                          cascade_sizes, emit_csv, reference_sizes,
                          rows_from_sizes)
from .net import (NetworkFormatError, Rule, UNIFORM, assign_thresholds,
                  generate_er, load_network, save_network, stats)
from .parser import ParseError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_RESOURCE = 3

JOBS_ENV = "CASCADE_LOGIC_JOBS"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # route argparse failures to exit code 1
        raise UsageError(message)


def _fail(kind: str, message: str) -> None:
    print(json.dumps({"error": {"kind": kind, "message": message}}), file=sys.stderr)


def _print_json(doc, destination: Optional[str]) -> None:
    _write_text(json.dumps(doc, indent=1) + "\n", destination)


def _write_text(text: str, destination: Optional[str]) -> None:
    if destination is None:
        sys.stdout.write(text)
    else:
        with open(destination, "w", encoding="utf-8") as fh:
            fh.write(text)


def _parse_rule(text: str) -> Rule:
    try:
        return Rule(text)
    except ValueError:
        raise UsageError(f"unknown rule {text!r}; expected gcm or agcm") from None


def _parse_phi_flag(text: str):
    if text == "uniform":
        return UNIFORM
    if text.startswith("const:"):
        try:
            return float(text.split(":", 1)[1])
        except ValueError:
            raise UsageError(f"bad constant threshold in {text!r}") from None
    raise UsageError(f"--phi must be 'uniform' or 'const:<x>', got {text!r}")


def _parse_ids(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(",") if part != "")
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def _parse_mode(text: str):
    if text == "topo":
        return Topological()
    if text.startswith("sweep:"):
        try:
            return RandomSweep(int(text.split(":", 1)[1]))
        except ValueError:
            raise UsageError(f"bad sweep seed in {text!r}") from None
    if text.startswith("order:"):
        return ExplicitOrder(_parse_ids(text.split(":", 1)[1]))
    raise UsageError(
        f"--mode must be sweep:<seed>, order:<id,...>, or topo; got {text!r}")


def _parse_assignment(text: str) -> dict[str, int]:
    assignment = {}
    for part in text.split(","):
        if "=" not in part:
            raise UsageError(f"--assign entries look like name=bit, got {part!r}")
        name, value = part.split("=", 1)
        if value not in ("0", "1"):
            raise UsageError(f"assignment bit for {name!r} must be 0 or 1")
        assignment[name.strip()] = int(value)
    return assignment


def _parse_z_range(text: str) -> tuple[float, ...]:
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return (float(parts[0]),)
        if len(parts) == 3:
            start, stop, step = (float(p) for p in parts)
            if step <= 0:
                raise UsageError("--z step must be positive")
            count = int((stop - start) / step + 1e-9) + 1
            if count < 1:
                raise UsageError(f"empty z range {text!r}")
            return tuple(start + i * step for i in range(count))
    except ValueError:
        pass
    raise UsageError(f"--z must be a value or start:stop:step, got {text!r}")


def _parse_metric(text: str):
    if text == "median":
        return MedianExceedance()
    if text == "global":
        return GlobalFraction()
    if text.startswith("global:"):
        try:
            return GlobalFraction(float(text.split(":", 1)[1]))
        except ValueError:
            raise UsageError(f"bad global threshold in {text!r}") from None
    raise UsageError(f"--metric must be global[:<t>] or median, got {text!r}")


def _default_jobs() -> int:
    raw = os.environ.get(JOBS_ENV)
    if raw is None:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _basis(text: str) -> Basis:
    try:
        return Basis(text)
    except ValueError:
        raise UsageError(f"--basis must be mixed, nand, or nor; got {text!r}") from None


def _cmd_gen(args) -> int:
    if (args.z is None) == (args.p is None):
        raise UsageError("exactly one of --z or --p is required")
    if args.p is not None:
        p = args.p
    else:
        if args.n < 2:
            raise UsageError("--z needs n >= 2")
        p = args.z / (args.n - 1)
    network = generate_er(args.n, p, mix_seed(args.seed, "graph"))
    network = assign_thresholds(network, _parse_phi_flag(args.phi),
                                _parse_rule(args.rule),
                                rng_seed=mix_seed(args.seed, "phi"))
    if args.out is None:
        save_network(network, sys.stdout)
    else:
        save_network(network, args.out)
    return EXIT_OK


def _cmd_stats(args) -> int:
    result = stats(load_network(args.net))
    _print_json({
        "n": result.n,
        "edge_count": result.edge_count,
        "mean_degree": result.mean_degree,
        "clustering_coefficient": result.clustering_coefficient,
    }, None)
    return EXIT_OK


def _cmd_run(args) -> int:
    network = load_network(args.net)
    seeds = _parse_ids(args.seeds) if args.seeds is not None else None
    mode = _parse_mode(args.mode)
    result = run_cascade(network, seeds, mode)
    doc = {
        "final": sorted(result.final),
        "size_fraction": result.size_fraction,
        "global": is_global(result),
        "labeling_order": list(result.labeling_order),
        "passes": result.passes,
        "mode": ("topo" if isinstance(mode, Topological)
                 else "sweep" if isinstance(mode, RandomSweep) else "order"),
        "rng_seed": mode.rng_seed if isinstance(mode, RandomSweep) else None,
        "generator": GENERATOR_NAME,
    }
    _print_json(doc, None)
    return EXIT_OK


def _cmd_compile(args) -> int:
    circuit = compile_expr(args.expr, _basis(args.basis))
    if args.out is None:
        save_circuit(circuit, sys.stdout)
    else:
        save_circuit(circuit, args.out)
    return EXIT_OK


def _cmd_eval(args) -> int:
    circuit = load_circuit(args.net)
    bits = evaluate(circuit, _parse_assignment(args.assign))
    _print_json(bits, None)
    return EXIT_OK


def _cmd_table(args) -> int:
    _write_text(truth_table(load_circuit(args.net)).to_csv(), args.out)
    return EXIT_OK


def _cmd_fixpoints(args) -> int:
    network = load_network(args.net)
    seeds = _parse_ids(args.seeds) if args.seeds is not None else None
    found = enumerate_fixpoints(network, seeds, state_cap=args.cap)
    doc = {
        "fixpoints": sorted(sorted(fp) for fp in found.fixpoints),
        "explored": found.explored_states,
        "truncated": found.truncated,
    }
    _print_json(doc, None)
    if found.truncated:
        _fail("resource", f"state cap {args.cap} reached; fixpoint set incomplete")
        return EXIT_RESOURCE
    return EXIT_OK


def _cmd_sensitivity(args) -> int:
    circuit = load_circuit(args.net)
    report = schedule_sensitivity(circuit, _parse_assignment(args.assign),
                                  args.trials, args.seed)
    _print_json({
        "trials": report.trials,
        "agree_fraction": report.agree_fraction,
        "reference_output": list(report.reference_output),
        "distinct_outcomes": report.distinct_outcomes,
        "generator": GENERATOR_NAME,
    }, None)
    return EXIT_OK


def _cmd_verify_gcm(args) -> int:
    verdict = verify_gcm_determinism(args.n, args.z, args.instances, args.seed,
                                     rule=_parse_rule(args.rule), state_cap=args.cap,
                                     jobs=args.jobs)
    _print_json({
        "verdict": verdict.value,
        "n": args.n,
        "z": args.z,
        "instances": args.instances,
        "seed": args.seed,
    }, None)
    if verdict is Verdict.INCONCLUSIVE:
        _fail("resource", f"state cap {args.cap} reached in at least one instance")
        return EXIT_RESOURCE
    return EXIT_OK


def _cmd_sweep(args) -> int:
    spec = SweepSpec(
        n=args.n,
        z_values=_parse_z_range(args.z),
        phi_star=args.phi,
        rule=_parse_rule(args.rule),
        realizations=args.realizations,
        master_seed=args.seed,
        seeds_per_run=args.seeds_per_run,
        metric=_parse_metric(args.metric),
    )
    sizes = cascade_sizes(spec, jobs=args.jobs)
    reference = (reference_sizes(spec, jobs=args.jobs)
                 if isinstance(spec.metric, MedianExceedance) else None)
    rows = rows_from_sizes(spec, sizes, reference)
    if args.dump_sizes is not None:
        dump = [{"z": z, "sizes": sizes[zi].tolist()}
                for zi, z in enumerate(spec.z_values)]
        _print_json(dump, args.dump_sizes)
    if args.out is None:
        emit_csv(rows, sys.stdout, spec=spec)
    else:
        emit_csv(rows, args.out, spec=spec)
    return EXIT_OK


def _build_parser() -> _Parser:
    parser = _Parser(prog="cascade-logic",
                     description="Threshold-cascade networks: generate, run, "
                                 "compile, analyze, sweep.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate an ER network with thresholds")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--z", type=float, help="mean degree (p = z/(n-1))")
    p.add_argument("--p", type=float, help="edge probability")
    p.add_argument("--rule", default="gcm")
    p.add_argument("--phi", default="uniform", help="uniform or const:<x>")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("stats", help="network statistics as JSON")
    p.add_argument("--net", required=True)
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("run", help="run one cascade")
    p.add_argument("--net", required=True)
    p.add_argument("--seeds", help="comma-separated ids; default: file seeds")
    p.add_argument("--mode", required=True, help="sweep:<seed> | order:<id,...> | topo")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("compile", help="compile an expression to a circuit file")
    p.add_argument("--expr", required=True)
    p.add_argument("--basis", default="mixed", help="mixed | nand | nor")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_compile)

    p = sub.add_parser("eval", help="evaluate a circuit on one assignment")
    p.add_argument("--net", required=True)
    p.add_argument("--assign", required=True, help="a=1,b=0,...")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("table", help="truth table of a circuit as CSV")
    p.add_argument("--net", required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_table)

    p = sub.add_parser("fixpoints", help="enumerate reachable fixpoints")
    p.add_argument("--net", required=True)
    p.add_argument("--seeds", help="comma-separated ids; default: file seeds")
    p.add_argument("--cap", type=int, default=DEFAULT_STATE_CAP)
    p.set_defaults(func=_cmd_fixpoints)

    p = sub.add_parser("sensitivity", help="schedule sensitivity of circuit outputs")
    p.add_argument("--net", required=True)
    p.add_argument("--assign", required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=_cmd_sensitivity)

    p = sub.add_parser("verify-gcm", help="final-state uniqueness over random instances")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--z", type=float, required=True)
    p.add_argument("--instances", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--rule", default="gcm")
    p.add_argument("--cap", type=int, default=DEFAULT_STATE_CAP)
    p.add_argument("--jobs", type=int, default=_default_jobs())
    p.set_defaults(func=_cmd_verify_gcm)

    p = sub.add_parser("sweep", help="cascade-frequency sweep over mean degree")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--z", required=True, help="value or start:stop:step (inclusive)")
    p.add_argument("--phi", type=float, required=True)
    p.add_argument("--rule", required=True)
    p.add_argument("--realizations", type=int, required=True)
    p.add_argument("--metric", default="global:0.5", help="global[:<t>] | median")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--seeds-per-run", type=int, default=1)
    p.add_argument("--out")
    p.add_argument("--dump-sizes", help="also write raw sizes per z as JSON")
    p.add_argument("--jobs", type=int, default=_default_jobs())
    p.set_defaults(func=_cmd_sweep)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as e:
        _fail("usage", str(e))
        return EXIT_USAGE
    except ParseError as e:
        _fail("usage", str(e))
        return EXIT_USAGE
    except NetworkFormatError as e:
        _fail("input", str(e))
        return EXIT_INPUT
    except OSError as e:
        _fail("input", str(e))
        return EXIT_INPUT
    except ValueError as e:
        _fail("usage", str(e))
        return EXIT_USAGE


def run_main() -> None:
    sys.exit(main())
