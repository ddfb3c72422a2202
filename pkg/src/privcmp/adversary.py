"""Trent behaviour models and what a curious Trent can infer.

A dishonest Trent lies by inverting announcements on chosen rounds. A curious
Trent only sees (alpha, beta) per round; :func:`ambiguity_swap` and
:func:`enumerate_consistent` show that such an observation never pins down
which secret is larger.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

from .errors import ZeroLambda
from .numeric import Scalar, format_scalar, sign

HONEST = "honest"
FLIP_ROUNDS = "flip_rounds"
FLIP_RANDOM = "flip_random"
EQUALITY_LIE = "equality_lie"

KINDS = (HONEST, FLIP_ROUNDS, FLIP_RANDOM, EQUALITY_LIE)

Announcement = Union[int, bool]


@dataclass(frozen=True)
class TrentStrategy:
    """How Trent turns his honest announcement into the announced one.

    ``rounds`` is a set of 1-based round indices, or ``None`` for every
    round. ``flip_random`` carries only ``k``; :meth:`start_run` resolves it
    to a concrete round set for one execution.
    """

    kind: str = HONEST
    rounds: Optional[frozenset] = frozenset()
    k: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown Trent strategy {self.kind!r}")
        if self.kind == FLIP_RANDOM and self.k < 0:
            raise ValueError("flip_random needs k >= 0")

    @classmethod
    def honest(cls) -> "TrentStrategy":
        return cls(HONEST)

    @classmethod
    def flip_rounds(cls, rounds: Optional[Iterable[int]]) -> "TrentStrategy":
        return cls(FLIP_ROUNDS, None if rounds is None else frozenset(rounds))

    @classmethod
    def flip_random(cls, k: int) -> "TrentStrategy":
        return cls(FLIP_RANDOM, frozenset(), k)

    @classmethod
    def equality_lie(cls, rounds: Optional[Iterable[int]]) -> "TrentStrategy":
        return cls(EQUALITY_LIE, None if rounds is None else frozenset(rounds))

    @classmethod
    def parse(cls, text: str) -> "TrentStrategy":
        """Parse CLI forms such as ``honest``, ``flip-random:1``,
        ``flip-rounds:2,5`` or ``equality-lie:all``."""
        name, _, arg = text.strip().partition(":")
        kind = name.replace("-", "_")
        if kind == HONEST:
            return cls.honest()
        if kind == FLIP_RANDOM:
            return cls.flip_random(int(arg))
        if kind in (FLIP_ROUNDS, EQUALITY_LIE):
            rounds = None if arg in ("all", "*") else {int(x) for x in arg.split(",") if x}
            return cls(kind, None if rounds is None else frozenset(rounds))
        raise ValueError(f"unknown Trent strategy {text!r}")

    def start_run(self, n: int, rng: random.Random, protocol: str = "p1") -> "TrentStrategy":
        """Fix the set of lied-on rounds for an ``n``-round execution."""
        if self.kind == EQUALITY_LIE and protocol != "p2":
            raise ValueError("equality_lie only applies to P2 runs")
        if self.kind == HONEST:
            return self
        if self.kind == FLIP_RANDOM:
            if self.k > n:
                raise ValueError(f"cannot flip {self.k} of {n} rounds")
            chosen = rng.sample(range(1, n + 1), self.k)
            return TrentStrategy(FLIP_ROUNDS, frozenset(chosen))
        rounds = frozenset(range(1, n + 1)) if self.rounds is None else self.rounds
        if any(not 1 <= i <= n for i in rounds):
            raise ValueError(f"lie rounds {sorted(rounds)} not within [1, {n}]")
        return TrentStrategy(self.kind, rounds)

    def lies_on(self, i: int) -> bool:
        if self.kind == HONEST:
            return False
        if self.kind == FLIP_RANDOM:
            raise ValueError("flip_random must be resolved with start_run() first")
        return self.rounds is None or i in self.rounds


def apply_strategy(s: TrentStrategy, i: int, honest_announcement: Announcement) -> Announcement:
    """Return what Trent announces on round ``i``.

    Order bits are inverted (R -> 1 - R); equality flags are negated.
    """
    if not s.lies_on(i):
        return honest_announcement
    if isinstance(honest_announcement, bool):
        return not honest_announcement
    return 1 - honest_announcement


# -- curious Trent ----------------------------------------------------------


def ambiguity_swap(u: Scalar, v: Scalar, c0: Scalar, lambda0: Scalar
                   ) -> tuple[Scalar, Scalar, Scalar, Scalar]:
    """Alternative assignment producing the same (alpha, beta) with the
    secrets' order reversed.

    With alpha = lambda0*u + c0 and beta = lambda0*v + c0, the assignment
    a=v, b=u, c=alpha+beta-c0, lambda=-lambda0 yields the identical pair.
    """
    if lambda0 == 0:
        raise ZeroLambda("lambda0 must be nonzero")
    alpha = lambda0 * u + c0
    beta = lambda0 * v + c0
    return v, u, alpha + beta - c0, -lambda0


@dataclass
class ConsistencyReport:
    observed: tuple[Scalar, Scalar]
    hypotheses: list[tuple[Scalar, Scalar, Scalar, Scalar]] = field(default_factory=list)
    orderings_possible: set[str] = field(default_factory=set)

    def to_dict(self) -> dict:
        return {
            "observed": [format_scalar(x) for x in self.observed],
            "hypotheses": [[format_scalar(x) for x in h] for h in self.hypotheses],
            "orderings_possible": sorted(self.orderings_possible),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


_ORDER_NAMES = {1: "greater", -1: "less", 0: "equal"}


def enumerate_consistent(
    observed: tuple[Scalar, Scalar],
    secret_domain: Iterable[Scalar],
    param_domain: Iterable[Scalar],
    lambda_domain: Optional[Iterable[Scalar]] = None,
) -> ConsistencyReport:
    """Brute-force every (a, b, c, lambda) that explains ``observed``.

    ``param_domain`` is used for both c and lambda unless ``lambda_domain``
    is given separately. lambda = 0 is always skipped. Hypotheses come back
    sorted so the report does not depend on iteration order.
    """
    alpha, beta = observed
    secrets = set(secret_domain)
    c_values = sorted(set(param_domain))
    lambdas = sorted(set(param_domain if lambda_domain is None else lambda_domain))
    report = ConsistencyReport((alpha, beta))
    for lam, c in itertools.product(lambdas, c_values):
        if lam == 0:
            continue
        # alpha = lam*a + c fixes a; likewise b. Only membership is checked.
        a = (alpha - c) / lam
        b = (beta - c) / lam
        if a in secrets and b in secrets:
            report.hypotheses.append((a, b, c, lam))
            report.orderings_possible.add(_ORDER_NAMES[sign(a - b)])
    report.hypotheses.sort()
    return report


def brute_force_consistent(
    observed: tuple[Scalar, Scalar],
    secret_domain: Iterable[Scalar],
    param_domain: Iterable[Scalar],
    lambda_domain: Optional[Iterable[Scalar]] = None,
) -> list[tuple[Scalar, Scalar, Scalar, Scalar]]:
    """Full four-way product search; the slow twin of enumerate_consistent."""
    alpha, beta = observed
    secrets = sorted(set(secret_domain))
    c_values = sorted(set(param_domain))
    lambdas = sorted(set(param_domain if lambda_domain is None else lambda_domain))
    return sorted(
        (a, b, c, lam)
        for a, b, c, lam in itertools.product(secrets, secrets, c_values, lambdas)
        if lam != 0 and lam * a + c == alpha and lam * b + c == beta
    )

