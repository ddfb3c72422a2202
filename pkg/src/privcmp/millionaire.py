"""Millionaire comparison hardened against a lying Trent.

The real comparison is hidden at a secret index i0 among n rounds. Every
other round compares a pair Alice and Bob both know, so any lie on those
rounds is caught. A single lie escapes only if it lands on i0, which happens
with probability 1/n.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

from .adversary import TrentStrategy
from .channel import ALICE, BOB, Transcript
from .errors import BadRoundCount, EqualSecrets
from .numeric import (
    DEFAULT_MAGNITUDE_BITS,
    Scalar,
    ScalarLike,
    sample_scalar,
    sign,
    to_scalar,
)
from .protocol import Network, RoundRecord, Verdict, _network, decode_verdict, execute_round

DEFAULT_ROUNDS = 20
DEFAULT_DECOY_BITS = 32

RANDOMIZED = "randomized"
FIXED_2_1 = "fixed_2_1"


@dataclass
class P1Plan:
    """Round layout shared by Alice and Bob and hidden from Trent."""

    n: int
    i0: int
    decoys: dict[int, tuple[Scalar, Scalar]]

    def __post_init__(self):
        if self.n < 2:
            raise BadRoundCount(f"need n >= 2 rounds, got {self.n}")
        if not 1 <= self.i0 <= self.n:
            raise ValueError(f"i0={self.i0} outside [1, {self.n}]")
        expected = set(range(1, self.n + 1)) - {self.i0}
        if set(self.decoys) != expected:
            raise ValueError("decoys must cover exactly the rounds other than i0")
        if any(x == y for x, y in self.decoys.values()):
            raise ValueError("decoy pairs must be unequal")

    def pair(self, i: int, a: Scalar, b: Scalar) -> tuple[Scalar, Scalar]:
        return (a, b) if i == self.i0 else self.decoys[i]

    def to_payload(self) -> dict:
        return {
            "n": self.n,
            "i0": self.i0,
            "decoys": {str(i): [x, y] for i, (x, y) in sorted(self.decoys.items())},
        }


def plan_rounds(
    n: int,
    rng: random.Random,
    scheme: str = RANDOMIZED,
    decoy_bits: int = DEFAULT_DECOY_BITS,
    i0: Optional[int] = None,
) -> P1Plan:
    """Pick i0 uniformly and fill every other round with a known unequal pair.

    ``scheme="fixed_2_1"`` uses the constant decoy (2, 1) everywhere.
    """
    if n < 2:
        raise BadRoundCount(f"need n >= 2 rounds, got {n}")
    if i0 is None:
        i0 = rng.randint(1, n)
    decoys = {}
    for i in range(1, n + 1):
        if i == i0:
            continue
        if scheme == FIXED_2_1:
            decoys[i] = (Scalar(2), Scalar(1))
        elif scheme == RANDOMIZED:
            while True:
                x = sample_scalar(rng, decoy_bits)
                y = sample_scalar(rng, decoy_bits)
                if x != y:
                    break
            decoys[i] = (x, y)
        else:
            raise ValueError(f"unknown decoy scheme {scheme!r}")
    return P1Plan(n, i0, decoys)


def security_check(records: list[RoundRecord], plan: P1Plan) -> list[int]:
    """Indices of decoy rounds whose announced bit contradicts the known pair."""
    mismatched = []
    for rec in records:
        if rec.index == plan.i0:
            continue
        x, y = plan.decoys[rec.index]
        implied = sign(rec.params.lam) * (1 if rec.announcement == 0 else -1)
        if implied != sign(x - y):
            mismatched.append(rec.index)
    covered = {rec.index for rec in records}
    missing = set(plan.decoys) - covered
    if missing:
        raise ValueError(f"records missing decoy rounds {sorted(missing)}")
    return mismatched


@dataclass
class P1Outcome:
    verdict: Verdict
    records: list[RoundRecord]
    mismatched_rounds: list[int]
    plan: P1Plan
    decoded: Verdict = field(default=Verdict.GREATER)

    @property
    def cheat_detected(self) -> bool:
        return bool(self.mismatched_rounds)

    def to_dict(self, redact: bool = False) -> dict:
        out = {
            "protocol": "p1",
            "verdict": self.verdict.value,
            "n": self.plan.n,
            "mismatched": list(self.mismatched_rounds),
        }
        if redact:
            out["rounds"] = [rec.trent_dict() for rec in self.records]
        else:
            out["i0"] = self.plan.i0
            out["decoded"] = self.decoded.value
            out["rounds"] = [rec.to_dict() for rec in self.records]
        return out


def run_p1(
    a: ScalarLike,
    b: ScalarLike,
    n: int = DEFAULT_ROUNDS,
    rng: Optional[random.Random] = None,
    trent: Optional[TrentStrategy] = None,
    transcript: Optional[Transcript] = None,
    *,
    network: Optional[Network] = None,
    plan: Optional[P1Plan] = None,
    decoy_scheme: str = RANDOMIZED,
    magnitude_bits: int = DEFAULT_MAGNITUDE_BITS,
    decoy_bits: int = DEFAULT_DECOY_BITS,
) -> P1Outcome:
    """Run all n rounds, decode round i0, then audit every decoy round.

    All rounds are completed even when a lie shows up early.
    """
    a, b = to_scalar(a), to_scalar(b)
    if a == b:
        raise EqualSecrets("a == b is excluded from the millionaire comparison")
    rng = rng or random.Random()
    if plan is None:
        plan = plan_rounds(n, rng, decoy_scheme, decoy_bits)
    elif plan.n != n:
        raise ValueError(f"plan has n={plan.n}, run asked for n={n}")
    # Trent's coin flips are independent of Alice and Bob's shared randomness.
    trent = (trent or TrentStrategy.honest()).start_run(
        n, random.Random(rng.getrandbits(64)), protocol="p1"
    )
    net = _network(rng, transcript, network)
    net.send(ALICE, BOB, plan.to_payload(), label="plan")

    used: set = set()
    records = []
    for i in range(1, n + 1):
        a_i, b_i = plan.pair(i, a, b)
        records.append(execute_round(
            i, a_i, b_i, rng, trent, net, magnitude_bits=magnitude_bits, used=used,
        ))

    real = records[plan.i0 - 1]
    decoded = decode_verdict(real.params.lam, real.announcement)
    mismatched = security_check(records, plan)
    verdict = Verdict.CHEAT_DETECTED if mismatched else decoded
    net.record({"type": "outcome", "protocol": "p1", "i0": plan.i0,
                "verdict": verdict.value, "mismatched": mismatched})
    return P1Outcome(verdict, records, mismatched, plan, decoded)
