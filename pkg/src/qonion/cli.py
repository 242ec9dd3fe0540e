"""Command-line front end.

Histograms are CSV (outcome bitstring, count); bitstrings group registers as
"<j> <ancilla> <index>".  Identical (config, seed) produce byte-identical
transcript and histogram files.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path

from . import classgroup, scheme
from .attacks import InterceptPlan, intercept_measure
from .errors import QOnionError
from .protocol import RunConfig, Transcript, run


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _histogram_csv(transcript: Transcript) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["outcome", "count"])
    for outcome, count in sorted(transcript.stats.get("histogram", {}).items()):
        writer.writerow([outcome, count])
    return buffer.getvalue()


def _emit_run_artifacts(transcript: Transcript, out_dir: str) -> None:
    out = Path(out_dir)
    _write(out / "transcript.json", transcript.to_json() + "\n")
    if "histogram" in transcript.stats:
        _write(out / "histogram.csv", _histogram_csv(transcript))


def _cmd_demo5(args) -> int:
    config = RunConfig(
        procedure=3,
        chain=("a", "b", "c", "d", "e"),
        omega=2,
        big_omega=5,
        seed=args.seed,
        shots=args.shots,
        fixture=args.fixture,
    )
    transcript = run(config)
    _emit_run_artifacts(transcript, args.out_dir)
    expected = transcript.stats["expected_key"]
    ok = transcript.stats["all_keys_expected"]
    matched = sum(1 for s in transcript.shots if s["recovered_key"] == expected)
    print(f"recovered key {expected} on {matched}/{config.shots} shots")
    print(f"artifacts written to {args.out_dir}")
    if not ok:
        print("error: some shots recovered a different key", file=sys.stderr)
        return 1
    return 0


def _cmd_run(args) -> int:
    config = RunConfig.from_json(Path(args.config).read_text())
    if args.transmit_index:
        config = RunConfig.from_dict({**config.to_dict(), "transmit_index": True})
    transcript = run(config)
    _emit_run_artifacts(transcript, args.out_dir)
    stats = transcript.stats
    if transcript.procedure == 1:
        print(f"procedure 1: recovered key {stats['recovered_key']} "
              f"(expected {stats['expected_key']})")
        ok = stats["key_matches"]
    else:
        print(f"procedure {transcript.procedure}: {stats['shots']} shots, "
              f"expected key {stats['expected_key']}, "
              f"recovered {stats['recovered_keys']}")
        ok = stats["all_keys_expected"]
    print(f"artifacts written to {args.out_dir}")
    return 0 if ok else 1


def _cmd_attack(args) -> int:
    config = RunConfig.from_json(Path(args.config).read_text())
    plan = InterceptPlan.from_json(Path(args.plan).read_text())
    report, transcript = intercept_measure(config, plan)
    out = Path(args.out_dir)
    _write(out / "attack_report.json", report.to_json() + "\n")
    _write(out / "transcript.json", transcript.to_json() + "\n")
    for hop, payload in sorted(report.per_hop.items()):
        if "uniformity" in payload:
            print(f"hop {hop}: support {payload['observed_support']}, "
                  f"chi-square p = {payload['uniformity']['p_value']:.6f}")
        else:
            print(f"hop {hop}: observed {payload['observed_value']}")
    print(f"receiver key unchanged: {report.keys['receiver_key_unchanged']}")
    print(f"artifacts written to {args.out_dir}")
    return 0 if report.keys["receiver_key_unchanged"] else 1


def _cmd_spectra(args) -> int:
    data = scheme.spectral(args.n)
    d = args.n // 2
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["class"] + [f"t{t}" for t in range(d + 1)])
    for s in range(d + 1):
        writer.writerow([s] + [f"{data.eigenvalues[s, t]:.12f}" for t in range(d + 1)])
    text = buffer.getvalue()
    if args.out_dir is not None:
        _write(Path(args.out_dir) / "spectra.csv", text)
        print(f"artifacts written to {args.out_dir}")
    else:
        print(text, end="")
    return 0


def _cmd_export_graph(args) -> int:
    table = scheme.load_action_table(args.fixture) if args.fixture else scheme.bundled_action_table()
    text = scheme.export_graph(table, fmt=args.format, cycle=args.cycle, union=args.union)
    if args.out_dir is not None:
        _write(Path(args.out_dir) / f"graph.{args.format}", text)
        print(f"artifacts written to {args.out_dir}")
    else:
        print(text, end="")
    return 0


def _form(a: int, b: int, c: int) -> classgroup.QuadraticForm:
    return classgroup.QuadraticForm(a, b, c)


def _cmd_classgroup(args) -> int:
    if args.subop == "class-number":
        print(classgroup.class_number(classgroup.Discriminant(args.values[0])))
    elif args.subop == "enumerate":
        for f in classgroup.enumerate_reduced(classgroup.Discriminant(args.values[0])):
            print(f"({f.a}, {f.b}, {f.c})")
    elif args.subop == "reduce":
        f = classgroup.reduce(_form(*args.values[:3]))
        print(f"({f.a}, {f.b}, {f.c})")
    elif args.subop == "compose":
        f = classgroup.compose(_form(*args.values[:3]), _form(*args.values[3:6]))
        print(f"({f.a}, {f.b}, {f.c})")
    elif args.subop == "power":
        f = classgroup.power(_form(*args.values[:3]), args.values[3])
        print(f"({f.a}, {f.b}, {f.c})")
    else:
        raise QOnionError(f"unknown classgroup operation {args.subop!r}")
    return 0


def _cmd_random_element(args) -> int:
    params = classgroup.RandomElementParams(
        generator=_form(args.generator[0], args.generator[1], args.generator[2]),
        group_order=args.order,
        num_exponents=args.exponents if args.exponents is not None
        else classgroup.default_exponent_count(args.order),
        word_length=args.word,
        seed=args.seed,
    )
    e, f = classgroup.random_element(params)
    print(f"e={e} form=({f.a}, {f.b}, {f.c})")
    return 0


_CLASSGROUP_ARITY = {
    "class-number": 1,
    "enumerate": 1,
    "reduce": 3,
    "compose": 6,
    "power": 4,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qonion",
                                     description="Quantum onion routing desk simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("demo5", help="five-actor worked example (omega=2, Omega=5)")
    p.add_argument("--shots", type=int, default=1)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--out-dir", default="qonion-out")
    p.add_argument("--fixture", default=None)
    p.set_defaults(func=_cmd_demo5)

    p = sub.add_parser("run", help="execute a run configuration")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", default="qonion-out")
    p.add_argument("--transmit-index", action="store_true",
                   help="override: transmit the index register")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("attack", help="run an interception plan against a configuration")
    p.add_argument("--config", required=True)
    p.add_argument("--plan", required=True)
    p.add_argument("--out-dir", default="qonion-out")
    p.set_defaults(func=_cmd_attack)

    p = sub.add_parser("spectra", help="closed-form eigenvalue table of the order-n scheme")
    p.add_argument("n", type=int)
    p.add_argument("--out-dir", default=None)
    p.set_defaults(func=_cmd_spectra)

    p = sub.add_parser("export-graph", help="render fixture cycles as DOT or CSV")
    p.add_argument("--fixture", default=None)
    p.add_argument("--cycle", default=None)
    p.add_argument("--union", action="store_true", help="export all cycles together")
    p.add_argument("--format", choices=["dot", "csv"], default="dot")
    p.add_argument("--out-dir", default=None)
    p.set_defaults(func=_cmd_export_graph)

    p = sub.add_parser("classgroup", help="form class group utilities")
    p.add_argument("subop", choices=sorted(_CLASSGROUP_ARITY))
    p.add_argument("values", type=int, nargs="+")
    p.set_defaults(func=_cmd_classgroup)

    p = sub.add_parser("random-element", help="seeded random class-group element")
    p.add_argument("--generator", type=int, nargs=3, required=True, metavar=("A", "B", "C"))
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--exponents", type=int, default=None)
    p.add_argument("--word", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_random_element)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "classgroup":
        expected = _CLASSGROUP_ARITY[args.subop]
        if len(args.values) != expected:
            parser.error(f"classgroup {args.subop} takes {expected} integer arguments")
    try:
        return args.func(args)
    except QOnionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
