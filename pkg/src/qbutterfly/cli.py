"""Command-line interface.

    qbutterfly accuracy  --n 2 --noise 0.01:0.10:0.01 --trials 1000 --seed 42 --out acc.csv
    qbutterfly eavesdrop --bits 3:8 --trials 500 --out eve.csv
    qbutterfly resources --n 2:10 --out res.csv

Range arguments are inclusive: START:STOP[:STEP].  A bare number is a
single-point range.
"""
from __future__ import annotations

import argparse
import sys
import time

from .experiments import (
    ExperimentConfig,
    run_accuracy_sweep,
    run_eavesdrop_sweep,
    run_resource_report,
    write_manifest,
    write_resource_csv,
    write_sweep_csv,
)
from .qsre import SignConvention, load_key_file
from .qstate import NOISE_ALL_GATES, NOISE_ENTANGLING
from .topology import build_butterfly, serialize_topology


def parse_float_range(text: str) -> tuple[float, ...]:
    parts = text.split(":")
    if len(parts) == 1:
        return (float(parts[0]),)
    if len(parts) == 2:
        start, stop, step = float(parts[0]), float(parts[1]), 0.01
    elif len(parts) == 3:
        start, stop, step = (float(p) for p in parts)
    else:
        raise ValueError(f"bad range {text!r}; expected START:STOP[:STEP]")
    if step <= 0 or stop < start:
        raise ValueError(f"bad range {text!r}; needs stop >= start and step > 0")
    count = int(round((stop - start) / step)) + 1
    return tuple(round(start + i * step, 10) for i in range(count))


def parse_int_range(text: str) -> tuple[int, ...]:
    parts = text.split(":")
    if len(parts) == 1:
        return (int(parts[0]),)
    if len(parts) == 2:
        start, stop, step = int(parts[0]), int(parts[1]), 1
    elif len(parts) == 3:
        start, stop, step = (int(p) for p in parts)
    else:
        raise ValueError(f"bad range {text!r}; expected START:STOP[:STEP]")
    if step <= 0 or stop < start:
        raise ValueError(f"bad range {text!r}; needs stop >= start and step > 0")
    return tuple(range(start, stop + 1, step))


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qbutterfly",
        description="Butterfly-network teleportation protocol simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    acc = sub.add_parser("accuracy", help="round accuracy versus gate-noise probability")
    acc.add_argument("--n", type=int, default=2, help="number of transceiver pairs")
    acc.add_argument("--noise", default="0.01:0.10:0.01",
                     help="noise probabilities, START:STOP[:STEP] or a single value")
    acc.add_argument("--trials", type=int, default=1000)
    acc.add_argument("--seed", type=int, default=42)
    acc.add_argument("--noise-model", choices=[NOISE_ENTANGLING, NOISE_ALL_GATES],
                     default=NOISE_ENTANGLING)
    acc.add_argument("--out", default="accuracy.csv", help="CSV output path")
    acc.add_argument("--json-manifest", default=None, help="also write a JSON run manifest")

    eve = sub.add_parser("eavesdrop", help="attack success rate versus key bits per message")
    eve.add_argument("--n", type=int, default=2, help="number of transceiver pairs")
    eve.add_argument("--bits", default="3:8",
                     help="total key bits per message (>= 3), START:STOP[:STEP]")
    eve.add_argument("--trials", type=int, default=500)
    eve.add_argument("--seed", type=int, default=42)
    eve.add_argument("--key-file", default=None,
                     help="file of 0/1 characters used as the shared key")
    eve.add_argument("--sign-convention", choices=[c.value for c in SignConvention],
                     default=SignConvention.FORMULA.value)
    eve.add_argument("--out", default="eavesdrop.csv", help="CSV output path")
    eve.add_argument("--json-manifest", default=None)

    res = sub.add_parser("resources", help="measured versus closed-form resource usage")
    res.add_argument("--n", default="2:10", help="network sizes, START:STOP[:STEP]")
    res.add_argument("--seed", type=int, default=42)
    res.add_argument("--out", default="resources.csv", help="CSV output path")
    res.add_argument("--dump-topology", action="store_true",
                     help="print each network's node and link list")
    res.add_argument("--json-manifest", default=None)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    started = time.perf_counter()
    try:
        if args.command == "accuracy":
            cfg = ExperimentConfig(
                experiment="accuracy", n_pairs=args.n,
                noise_levels=parse_float_range(args.noise),
                trials=args.trials, seed=args.seed, noise_model=args.noise_model,
                out=args.out, manifest=args.json_manifest)
            rows = run_accuracy_sweep(cfg)
            write_sweep_csv(rows, cfg.out)
            for row in rows:
                print(f"noise={row.x:.4f}  accuracy={row.estimate:.3f} "
                      f"+/- {row.ci_half_width:.3f}  ({row.successes}/{row.trials})")
        elif args.command == "eavesdrop":
            key_bits = load_key_file(args.key_file) if args.key_file else None
            cfg = ExperimentConfig(
                experiment="eavesdrop", n_pairs=args.n,
                bits_range=parse_int_range(args.bits),
                trials=args.trials, seed=args.seed,
                sign_convention=SignConvention(args.sign_convention),
                key_bits=key_bits, out=args.out, manifest=args.json_manifest)
            rows = run_eavesdrop_sweep(cfg)
            write_sweep_csv(rows, cfg.out)
            for row in rows:
                print(f"bits={int(row.x)}  eavesdrop_rate={row.estimate:.3f} "
                      f"+/- {row.ci_half_width:.3f}  ({row.successes}/{row.trials})")
        else:
            n_range = parse_int_range(args.n)
            cfg = ExperimentConfig(
                experiment="resources", n_range=n_range, trials=1,
                seed=args.seed, out=args.out, manifest=args.json_manifest)
            if args.dump_topology:
                for n in n_range:
                    print(serialize_topology(build_butterfly(n)), end="")
            rows = run_resource_report(n_range, seed=args.seed)
            write_resource_csv(rows, cfg.out)
            for row in rows:
                print(f"n={row.n_pairs}  links={row.total_links}/{row.ref_total_links}  "
                      f"quantum={row.quantum_links}/{row.ref_quantum_links}  "
                      f"qubits={row.qubit_usage}/{row.ref_qubits}  "
                      f"within_reference={str(row.within_reference).lower()}")
        print(f"wrote {cfg.out}")
        if args.json_manifest:
            write_manifest(cfg, [cfg.out], time.perf_counter() - started, args.json_manifest)
            print(f"wrote {args.json_manifest}")
    except (ValueError, OSError) as exc:
        print(f"qbutterfly: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
