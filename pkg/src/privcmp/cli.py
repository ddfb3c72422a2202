"""Command-line harness.

Exit codes: 0 for a clean result, 1 for usage or configuration errors, 2 when
Trent's cheating (or an eavesdropper, for ``bb84``) was detected.
"""

from __future__ import annotations

import argparse
import json
import random
import re
import sys
from dataclasses import dataclass
from typing import Optional, Sequence

from . import analysis
from .adversary import TrentStrategy
from .channel import OBSERVERS, Bb84Config, SecureNetwork, Transcript, bb84_exchange, view
from .errors import Bb84Aborted, ProtocolError
from .millionaire import DEFAULT_ROUNDS, FIXED_2_1, RANDOMIZED, run_p1
from .numeric import DEFAULT_MAGNITUDE_BITS, parse_scalar
from .qpc import run_p2

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CHEAT = 2

_NEGATIVE_LITERAL = re.compile(r"^-\d+(/\d+)?$")


@dataclass
class RunConfig:
    seed: int = 0
    n: int = DEFAULT_ROUNDS
    m: Optional[int] = None
    m_range: Optional[tuple[int, int]] = None
    magnitude_bits: int = DEFAULT_MAGNITUDE_BITS
    key_source: str = "ideal"
    decoy_scheme: str = RANDOMIZED
    out: Optional[str] = "transcript.jsonl"
    redact: bool = False

    def __post_init__(self):
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.magnitude_bits < 1:
            raise ValueError("magnitude bits must be >= 1")
        if self.key_source not in ("ideal", "bb84"):
            raise ValueError(f"unknown key source {self.key_source!r}")

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        m_range = None
        if getattr(args, "m_range", None):
            lo, _, hi = args.m_range.partition(",")
            m_range = (int(lo), int(hi))
        return cls(
            seed=args.seed,
            n=args.n,
            m=getattr(args, "m", None),
            m_range=m_range,
            magnitude_bits=args.magnitude_bits,
            key_source=args.key_source,
            decoy_scheme=getattr(args, "decoy_scheme", RANDOMIZED),
            out=None if args.out in (None, "-") else args.out,
            redact=args.redact,
        )


class CliError(Exception):
    pass


def _emit(args: argparse.Namespace, payload: dict, text: str) -> None:
    if args.format == "json":
        print(json.dumps(payload, sort_keys=True))
    else:
        print(text)


def _table(headers: Sequence[str], rows: Sequence[Sequence[object]]) -> str:
    cells = [list(map(str, headers))] + [[str(c) for c in row] for row in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(headers))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(row, widths)) for row in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def _write_transcript(transcript: Transcript, config: RunConfig) -> None:
    if config.out is not None:
        transcript.write(config.out, redact=config.redact)


def cmd_compare(args: argparse.Namespace) -> int:
    config = RunConfig.from_args(args)
    a, b = parse_scalar(args.a), parse_scalar(args.b)
    rng = random.Random(config.seed)
    transcript = Transcript()
    net = SecureNetwork(rng, transcript, config.key_source)
    outcome = run_p1(
        a, b, config.n, rng, TrentStrategy.parse(args.trent), transcript,
        network=net, decoy_scheme=config.decoy_scheme,
        magnitude_bits=config.magnitude_bits,
    )
    _write_transcript(transcript, config)
    _emit(args, outcome.to_dict(redact=config.redact), outcome.verdict.value)
    return EXIT_CHEAT if outcome.cheat_detected else EXIT_OK


def cmd_qpc(args: argparse.Namespace) -> int:
    config = RunConfig.from_args(args)
    a, b = parse_scalar(args.a), parse_scalar(args.b)
    rng = random.Random(config.seed)
    transcript = Transcript()
    net = SecureNetwork(rng, transcript, config.key_source)
    outcome = run_p2(
        a, b, config.n, config.m, rng, TrentStrategy.parse(args.trent), transcript,
        network=net, m_range=config.m_range, magnitude_bits=config.magnitude_bits,
    )
    _write_transcript(transcript, config)
    _emit(args, outcome.to_dict(redact=config.redact), outcome.verdict.value)
    return EXIT_CHEAT if outcome.cheat_detected else EXIT_OK


def cmd_attack(args: argparse.Namespace) -> int:
    if args.exhaustive:
        est = analysis.exhaustive_detection(args.protocol, args.n, args.k, args.seed, args.m)
    else:
        est = analysis.estimate_detection(
            args.protocol, args.n, args.k, args.trials, args.seed, m=args.m, jobs=args.jobs,
        )
    text = _table(
        ["protocol", "n", "k", "trials", "analytic", "empirical", "undetected-wrong"],
        [[est.protocol, est.n, est.k, est.trials, f"{float(est.analytic):.6f}",
          f"{est.empirical:.6f}", est.undetected_wrong]],
    )
    _emit(args, est.to_dict(), text)
    return EXIT_OK


def cmd_leakage(args: argparse.Namespace) -> int:
    report = analysis.leakage_report(args.bits)
    payload = report.to_dict()
    rows = [[R, f"{I:.6f}", f"{p.numerator}/{p.denominator}"] for R, I, p in report.per_R]
    lines = [_table(["R", "I(R) bits", "prob(R)"], rows)]
    exact = report.avg_leak_exact
    suffix = f" ({exact.numerator}/{exact.denominator})" if exact is not None else ""
    lines.append(f"Ī = {report.avg_leak:.4f}{suffix}")
    status = EXIT_OK
    if args.oracle:
        oracle = analysis.leakage_oracle(args.bits)
        agree = all(
            oracle[R][1] == p and abs(oracle[R][0] - I) <= 1e-12
            for R, I, p in report.per_R
        )
        payload["oracle_agrees"] = agree
        lines.append("oracle: " + ("agree" if agree else "DISAGREE"))
        if not agree:
            status = EXIT_ERROR
    _emit(args, payload, "\n".join(lines))
    return status


def cmd_views(args: argparse.Namespace) -> int:
    try:
        transcript = Transcript.read(args.transcript)
        v = view(transcript, args.observer)
    except FileNotFoundError:
        raise CliError(f"no such transcript: {args.transcript}")
    except (ValueError, KeyError) as exc:
        raise CliError(f"corrupt transcript {args.transcript}: {exc}")
    if args.format == "json":
        for event in v.events:
            print(json.dumps(event, sort_keys=True))
    else:
        for event in v.events:
            body = event.get("payload", event.get("announcement", event.get("payload_hex", "")))
            if isinstance(body, dict):
                body = json.dumps(body, sort_keys=True)
            label = event.get("label", "")
            print(f"{event['seq']:>5}  {event['kind']:<8} {event['from']:>6} -> "
                  f"{event['to']:<6} {label:<9} {body}")
    return EXIT_OK


def cmd_bb84(args: argparse.Namespace) -> int:
    eve = args.eve.replace("-", "_")
    rng = random.Random(args.seed)
    try:
        key_a, key_b, qber, sifted = bb84_exchange(
            args.pulses, eve, rng, sample_fraction=args.sample_fraction,
            abort_threshold=args.threshold,
        )
    except Bb84Aborted as exc:
        _emit(args, {"aborted": True, "qber": exc.qber, "sifted_len": exc.sifted_len},
              f"aborted: qber={exc.qber:.4f} > {exc.threshold} (sifted {exc.sifted_len})")
        return EXIT_CHEAT
    payload = {"aborted": False, "qber": qber, "sifted_len": sifted,
               "key_len": len(key_a), "keys_equal": key_a == key_b}
    _emit(args, payload, f"qber={qber:.4f} sifted={sifted} key_len={len(key_a)} "
                         f"keys_equal={key_a == key_b}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=["table", "json"], default="table")

    run = argparse.ArgumentParser(add_help=False)
    run.add_argument("--a", required=True, help='exact literal, e.g. "9" or "-7/3"')
    run.add_argument("--b", required=True)
    run.add_argument("--n", type=int, default=DEFAULT_ROUNDS)
    run.add_argument("--trent", default="honest",
                     help="honest | flip-rounds:1,4 | flip-random:K | equality-lie:all")
    run.add_argument("--magnitude-bits", type=int, default=DEFAULT_MAGNITUDE_BITS)
    run.add_argument("--key-source", choices=["ideal", "bb84"], default="ideal")
    run.add_argument("--out", default="transcript.jsonl",
                     help='transcript path ("-" to skip writing)')
    run.add_argument("--redact", action="store_true",
                     help="drop ground truth and the shared plan from outputs")

    parser = argparse.ArgumentParser(prog="privcmp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compare", parents=[common, run], help="millionaire comparison")
    p.add_argument("--decoy-scheme", choices=[RANDOMIZED, FIXED_2_1], default=RANDOMIZED)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("qpc", parents=[common, run], help="private equality test")
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--m-range", default=None, help="LO,HI range m is drawn from")
    p.set_defaults(func=cmd_qpc)

    p = sub.add_parser("attack", parents=[common], help="cheat-detection experiment")
    p.add_argument("--protocol", choices=["p1", "p2"], default="p1")
    p.add_argument("--n", type=int, default=DEFAULT_ROUNDS)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--exhaustive", action="store_true")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("leakage", parents=[common], help="Hamming-distance leakage table")
    p.add_argument("--bits", type=int, required=True)
    p.add_argument("--oracle", action="store_true")
    p.set_defaults(func=cmd_leakage)

    p = sub.add_parser("views", parents=[common], help="print one observer's view")
    p.add_argument("transcript")
    p.add_argument("--as", dest="observer", choices=OBSERVERS, required=True)
    p.set_defaults(func=cmd_views)

    p = sub.add_parser("bb84", parents=[common], help="toy BB84 key exchange")
    p.add_argument("--pulses", type=int, default=1024)
    p.add_argument("--eve", choices=["none", "intercept-resend"], default="none")
    p.add_argument("--sample-fraction", type=float, default=Bb84Config.sample_fraction)
    p.add_argument("--threshold", type=float, default=Bb84Config.abort_threshold)
    p.set_defaults(func=cmd_bb84)
    return parser


def _bind_literals(argv: Sequence[str]) -> list[str]:
    """Glue ``--a -7/3`` into ``--a=-7/3``; argparse would read -7/3 as a flag."""
    out: list[str] = []
    it = iter(argv)
    for tok in it:
        if tok in ("--a", "--b"):
            nxt = next(it, None)
            if nxt is not None and _NEGATIVE_LITERAL.match(nxt):
                out.append(f"{tok}={nxt}")
                continue
            out.append(tok)
            if nxt is not None:
                out.append(nxt)
        else:
            out.append(tok)
    return out


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else argv
    try:
        args = parser.parse_args(_bind_literals(argv))
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (CliError, ProtocolError, ValueError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
