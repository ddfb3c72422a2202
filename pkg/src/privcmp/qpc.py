"""Private equality test that keeps the result hidden from Trent.

Besides the real round i0, Alice and Bob plant m rounds with a_i = b_i = 1,
so Trent always sees some "equal" announcements and cannot tell whether one
of them is the real one. The remaining rounds use b_i = 1 and a_i != 1 and
must come back "not equal".
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

from .adversary import TrentStrategy
from .channel import ALICE, BOB, Transcript
from .errors import BadCounts
from .millionaire import DEFAULT_DECOY_BITS, DEFAULT_ROUNDS
from .numeric import (
    DEFAULT_MAGNITUDE_BITS,
    Scalar,
    ScalarLike,
    sample_scalar,
    to_scalar,
)
from .protocol import Network, RoundRecord, Verdict, _network, execute_round

ONE = Scalar(1)


def default_m_range(n: int) -> tuple[int, int]:
    """[n/4, n/2] clipped into the valid interval [1, n-1]."""
    lo = max(1, n // 4)
    hi = min(n - 1, max(lo, n // 2))
    return lo, hi


def sample_m(n: int, rng: random.Random, m_range: Optional[tuple[int, int]] = None) -> int:
    lo, hi = m_range or default_m_range(n)
    if not 1 <= lo <= hi < n:
        raise BadCounts(f"m range [{lo}, {hi}] invalid for n={n}")
    return rng.randint(lo, hi)


@dataclass
class QpcPlan:
    """``S[0]`` is i0; ``S[1:]`` are the planted-equal rounds."""

    n: int
    m: int
    S: tuple[int, ...]
    a_values: dict[int, Scalar]

    def __post_init__(self):
        if not 1 <= self.m < self.n:
            raise BadCounts(f"need 1 <= m < n, got m={self.m}, n={self.n}")
        if len(self.S) != self.m + 1 or len(set(self.S)) != len(self.S):
            raise ValueError("S must hold m+1 distinct indices")
        if any(not 1 <= i <= self.n for i in self.S):
            raise ValueError("S indices must lie in [1, n]")
        for i, a_i in self.a_values.items():
            if i in self.planted and a_i != ONE:
                raise ValueError(f"planted round {i} must use a_i = 1")
            if i not in self.S and a_i == ONE:
                raise ValueError(f"round {i} outside S must use a_i != 1")

    @property
    def i0(self) -> int:
        return self.S[0]

    @property
    def planted(self) -> frozenset:
        return frozenset(self.S[1:])

    def pair(self, i: int, a: Scalar, b: Scalar) -> tuple[Scalar, Scalar]:
        if i == self.i0:
            return a, b
        return self.a_values[i], ONE

    def to_payload(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "S": list(self.S),
            "a": {str(i): x for i, x in sorted(self.a_values.items())},
        }


def plan_qpc(
    n: int,
    m: int,
    rng: random.Random,
    decoy_bits: int = DEFAULT_DECOY_BITS,
    i0: Optional[int] = None,
) -> QpcPlan:
    """Draw S uniformly (i0 first) and the decoy values for rounds outside S."""
    if not 1 <= m < n:
        raise BadCounts(f"need 1 <= m < n, got m={m}, n={n}")
    if i0 is None:
        S = tuple(rng.sample(range(1, n + 1), m + 1))
    else:
        rest = rng.sample([i for i in range(1, n + 1) if i != i0], m)
        S = (i0, *rest)
    a_values = {}
    members = set(S)
    for i in range(1, n + 1):
        if i == S[0]:
            continue
        if i in members:
            a_values[i] = ONE
        else:
            while True:
                x = sample_scalar(rng, decoy_bits)
                if x != ONE:
                    break
            a_values[i] = x
    return QpcPlan(n, m, S, a_values)


def qpc_security_check(records: list[RoundRecord], plan: QpcPlan) -> list[int]:
    """Planted rounds announced unequal, and rounds outside S announced equal."""
    members = set(plan.S)
    covered = {rec.index for rec in records}
    missing = set(range(1, plan.n + 1)) - {plan.i0} - covered
    if missing:
        raise ValueError(f"records missing rounds {sorted(missing)}")
    return [
        rec.index for rec in records
        if rec.index != plan.i0 and rec.announcement != (rec.index in members)
    ]


@dataclass
class P2Outcome:
    verdict: Verdict
    records: list[RoundRecord]
    mismatched_rounds: list[int]
    plan: QpcPlan
    decoded: Verdict = field(default=Verdict.NOT_EQUAL)

    @property
    def cheat_detected(self) -> bool:
        return bool(self.mismatched_rounds)

    def to_dict(self, redact: bool = False) -> dict:
        out = {
            "protocol": "p2",
            "verdict": self.verdict.value,
            "n": self.plan.n,
            "mismatched": list(self.mismatched_rounds),
        }
        if redact:
            out["rounds"] = [rec.trent_dict() for rec in self.records]
        else:
            out["i0"] = self.plan.i0
            out["m"] = self.plan.m
            out["S"] = list(self.plan.S)
            out["decoded"] = self.decoded.value
            out["rounds"] = [rec.to_dict() for rec in self.records]
        return out


def run_p2(
    a: ScalarLike,
    b: ScalarLike,
    n: int = DEFAULT_ROUNDS,
    m: Optional[int] = None,
    rng: Optional[random.Random] = None,
    trent: Optional[TrentStrategy] = None,
    transcript: Optional[Transcript] = None,
    *,
    network: Optional[Network] = None,
    plan: Optional[QpcPlan] = None,
    m_range: Optional[tuple[int, int]] = None,
    magnitude_bits: int = DEFAULT_MAGNITUDE_BITS,
    decoy_bits: int = DEFAULT_DECOY_BITS,
) -> P2Outcome:
    """Run the n equality rounds; m is drawn from ``m_range`` when omitted."""
    a, b = to_scalar(a), to_scalar(b)
    if n < 2:
        raise BadCounts(f"need n >= 2 rounds, got {n}")
    rng = rng or random.Random()
    if plan is None:
        if m is None:
            m = sample_m(n, rng, m_range)
        plan = plan_qpc(n, m, rng, decoy_bits)
    elif plan.n != n or (m is not None and plan.m != m):
        raise ValueError("plan does not match the requested n/m")
    trent = (trent or TrentStrategy.honest()).start_run(
        n, random.Random(rng.getrandbits(64)), protocol="p2"
    )
    net = _network(rng, transcript, network)
    net.send(ALICE, BOB, plan.to_payload(), label="plan")

    used: set = set()
    records = []
    for i in range(1, n + 1):
        a_i, b_i = plan.pair(i, a, b)
        records.append(execute_round(
            i, a_i, b_i, rng, trent, net,
            equality=True, magnitude_bits=magnitude_bits, used=used,
        ))

    decoded = Verdict.EQUAL if records[plan.i0 - 1].announcement else Verdict.NOT_EQUAL
    mismatched = qpc_security_check(records, plan)
    verdict = Verdict.CHEAT_DETECTED if mismatched else decoded
    net.record({"type": "outcome", "protocol": "p2", "i0": plan.i0, "m": plan.m,
                "S": list(plan.S), "verdict": verdict.value, "mismatched": mismatched})
    return P2Outcome(verdict, records, mismatched, plan, decoded)
