"""One blinded comparison round between Alice, Bob and Trent.

Alice and Bob share a fresh (lambda, c) with lambda != 0, send
alpha = lambda*a + c and beta = lambda*b + c to Trent, and Trent announces
only the sign of alpha - beta (or, in the equality variant, only whether they
coincide). Alice and Bob then read the order of a and b off the sign of
(-1)**R * lambda.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass
from typing import Optional, Union

from .adversary import Announcement, TrentStrategy, apply_strategy
from .channel import ALICE, BOB, TRENT, DirectLink, SecureNetwork, Transcript
from .errors import EqualBlindedValues, EqualSecrets, ZeroLambda
from .numeric import (
    DEFAULT_MAGNITUDE_BITS,
    Scalar,
    ScalarLike,
    format_scalar,
    parse_scalar,
    sample_scalar,
    to_scalar,
)

BlindedValue = Scalar
Network = Union[SecureNetwork, DirectLink]


class Verdict(str, enum.Enum):
    GREATER = "greater"
    LESS = "less"
    EQUAL = "equal"
    NOT_EQUAL = "not-equal"
    CHEAT_DETECTED = "cheat-detected"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class BlindingParams:
    lam: Scalar
    c: Scalar

    def __post_init__(self):
        if self.lam == 0:
            raise ZeroLambda("lambda must be nonzero")

    @classmethod
    def sample(cls, rng: random.Random, magnitude_bits: int = DEFAULT_MAGNITUDE_BITS
               ) -> "BlindingParams":
        lam = sample_scalar(rng, magnitude_bits, nonzero=True)
        c = sample_scalar(rng, magnitude_bits)
        return cls(lam, c)


def blind(secret: Scalar, params: BlindingParams) -> BlindedValue:
    """lambda * secret + c, exactly."""
    if params.lam == 0:
        raise ZeroLambda("lambda must be nonzero")
    return params.lam * secret + params.c


def trent_compare(alpha: BlindedValue, beta: BlindedValue) -> int:
    """Trent's order bit: 0 if alpha > beta, 1 if alpha < beta."""
    d = alpha - beta
    if d == 0:
        raise EqualBlindedValues("alpha == beta; the order comparison excludes ties")
    return 0 if d > 0 else 1


def trent_equal(alpha: BlindedValue, beta: BlindedValue) -> bool:
    """Trent's equality flag. Which value is larger is never exposed."""
    return alpha == beta


def decode_verdict(lam: Scalar, r: int) -> Verdict:
    """Greater iff (-1)**r * lambda > 0."""
    if lam == 0:
        raise ZeroLambda("lambda must be nonzero")
    if r not in (0, 1):
        raise ValueError(f"announcement must be 0 or 1, got {r!r}")
    signed = lam if r == 0 else -lam
    return Verdict.GREATER if signed > 0 else Verdict.LESS


@dataclass
class RoundRecord:
    """Ground truth for one executed round.

    ``d`` is Trent's private difference; ``trent_lied`` is only known to the
    test harness.
    """

    index: int
    a: Scalar
    b: Scalar
    params: BlindingParams
    alpha: BlindedValue
    beta: BlindedValue
    d: Scalar
    announcement: Announcement
    trent_lied: bool = False

    @property
    def equality(self) -> bool:
        return isinstance(self.announcement, bool)

    def announcement_payload(self) -> dict:
        key = "equal" if self.equality else "r"
        return {"round": self.index, key: self.announcement}

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "a": format_scalar(self.a),
            "b": format_scalar(self.b),
            "lambda": format_scalar(self.params.lam),
            "c": format_scalar(self.params.c),
            "alpha": format_scalar(self.alpha),
            "beta": format_scalar(self.beta),
            "d": format_scalar(self.d),
            "announcement": self.announcement_payload(),
            "trent_lied": self.trent_lied,
        }

    def trent_dict(self) -> dict:
        """The part of the round Trent legitimately sees."""
        return {
            "index": self.index,
            "alpha": format_scalar(self.alpha),
            "beta": format_scalar(self.beta),
            "announcement": self.announcement_payload(),
        }


def _network(rng: random.Random, transcript: Optional[Transcript],
             network: Optional[Network]) -> Network:
    if network is not None:
        return network
    if transcript is not None:
        return SecureNetwork(rng, transcript)
    return DirectLink()


def execute_round(
    i: int,
    a_i: Scalar,
    b_i: Scalar,
    rng: random.Random,
    trent: TrentStrategy,
    net: Network,
    *,
    equality: bool = False,
    magnitude_bits: int = DEFAULT_MAGNITUDE_BITS,
    used: Optional[set] = None,
) -> RoundRecord:
    """Run the message flow of a single round over ``net``.

    ``trent`` must already be resolved for the run (see
    :meth:`TrentStrategy.start_run`). ``used`` collects the blinding pairs
    of the current run so that none repeats.
    """
    while True:
        params = BlindingParams.sample(rng, magnitude_bits)
        # Hashing the integer parts is cheaper than hashing fresh rationals.
        key = (params.lam.numerator, params.lam.denominator,
               params.c.numerator, params.c.denominator)
        if used is None or key not in used:
            break
    if used is not None:
        used.add(key)

    net.note(ALICE, {"round": i, "a": a_i})
    net.note(BOB, {"round": i, "b": b_i})

    # Alice draws (lambda, c) and shares them with Bob over their QKD link.
    shared = net.send(ALICE, BOB, {"round": i, "lambda": params.lam, "c": params.c},
                      label="blinding")
    bob_params = BlindingParams(_scalar(shared["lambda"]), _scalar(shared["c"]))

    alpha = blind(a_i, params)
    beta = blind(b_i, bob_params)
    got_a = net.send(ALICE, TRENT, {"round": i, "alpha": alpha}, label="alpha")
    got_b = net.send(BOB, TRENT, {"round": i, "beta": beta}, label="beta")

    t_alpha, t_beta = _scalar(got_a["alpha"]), _scalar(got_b["beta"])
    d = t_alpha - t_beta
    honest = trent_equal(t_alpha, t_beta) if equality else trent_compare(t_alpha, t_beta)
    announced = apply_strategy(trent, i, honest)
    rec = RoundRecord(i, a_i, b_i, params, alpha, beta, d, announced, announced != honest)
    net.announce(TRENT, rec.announcement_payload())
    if net.transcript is not None:
        net.record({"type": "round", **rec.to_dict()})
    return rec


def _scalar(value) -> Scalar:
    return parse_scalar(value) if isinstance(value, str) else value


def run_p0(
    a: ScalarLike,
    b: ScalarLike,
    rng: random.Random,
    trent: Optional[TrentStrategy] = None,
    transcript: Optional[Transcript] = None,
    *,
    network: Optional[Network] = None,
    magnitude_bits: int = DEFAULT_MAGNITUDE_BITS,
) -> tuple[Verdict, RoundRecord]:
    """Single-round comparison with no cheat detection.

    A lying Trent goes unnoticed here; use :func:`privcmp.millionaire.run_p1`
    when Trent may cheat.
    """
    a, b = to_scalar(a), to_scalar(b)
    if a == b:
        raise EqualSecrets("a == b is excluded from the millionaire comparison")
    trent = (trent or TrentStrategy.honest()).start_run(1, random.Random(rng.getrandbits(64)))
    net = _network(rng, transcript, network)
    rec = execute_round(1, a, b, rng, trent, net, magnitude_bits=magnitude_bits)
    return decode_verdict(rec.params.lam, rec.announcement), rec
