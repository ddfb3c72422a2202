"""Detection probabilities and the Hamming-distance leakage formulas.

The leakage functions describe equality tests that reveal the Hamming
distance R between two uniformly random N-bit strings: revealing R leaves
C(N, R) candidates out of 2**N, so it leaks I(R) = N - log2 C(N, R) bits.
Probabilities are exact Fractions; logarithms are doubles (math.log2 is
correctly rounded on big ints to well under 1e-12 at these sizes).
"""

from __future__ import annotations

import itertools
import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .adversary import TrentStrategy
from .errors import BadRange
from .millionaire import plan_rounds, run_p1
from .qpc import plan_qpc, run_p2, sample_m

MAX_BITS = 64
ORACLE_MAX_BITS = 8


def _check_range(N: int, R: int) -> None:
    if N < 1 or not 0 <= R <= N:
        raise BadRange(f"need 0 <= R <= N and N >= 1, got N={N}, R={R}")


def leak_I(N: int, R: int) -> float:
    """Bits leaked when the Hamming distance R of two N-bit strings is revealed."""
    _check_range(N, R)
    return N - math.log2(math.comb(N, R))


def leak_prob(N: int, R: int) -> Fraction:
    """P(Hamming distance = R) for independent uniform N-bit strings."""
    _check_range(N, R)
    return Fraction(math.comb(N, R), 2 ** N)


def leak_p_neq(N: int) -> Fraction:
    """P(X != Y) = (2**N - 1) / 2**N."""
    if N < 1:
        raise BadRange(f"N must be >= 1, got {N}")
    return Fraction(2 ** N - 1, 2 ** N)


def leak_avg(N: int) -> float:
    """Average leakage given X != Y: N - sum_{R>=1} C log2 C / (2**N - 1)."""
    if N < 1:
        raise BadRange(f"N must be >= 1, got {N}")
    total = math.fsum(
        math.comb(N, R) * math.log2(math.comb(N, R)) for R in range(1, N + 1)
    )
    return N - total / (2 ** N - 1)


def leak_avg_exact(N: int) -> Optional[Fraction]:
    """The average leakage as an exact Fraction, when it is rational.

    log2 of a positive integer is rational only for powers of two, and the
    sum of C log2 C is log2 of prod C**C, so the closed form is rational
    exactly when every C(N, R), R >= 1, is a power of two. Otherwise None.
    """
    if N < 1:
        raise BadRange(f"N must be >= 1, got {N}")
    total = 0
    for R in range(1, N + 1):
        c = math.comb(N, R)
        if c & (c - 1):
            return None
        total += c * (c.bit_length() - 1)
    return N - Fraction(total, 2 ** N - 1)


@dataclass
class LeakageReport:
    N: int
    per_R: list[tuple[int, float, Fraction]]
    p_neq: Fraction
    avg_leak: float
    avg_leak_exact: Optional[Fraction] = None

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "per_R": [
                {"R": R, "I": I, "prob": f"{p.numerator}/{p.denominator}"}
                for R, I, p in self.per_R
            ],
            "p_neq": f"{self.p_neq.numerator}/{self.p_neq.denominator}",
            "avg_leak": self.avg_leak,
            "avg_leak_exact": (
                None if self.avg_leak_exact is None
                else f"{self.avg_leak_exact.numerator}/{self.avg_leak_exact.denominator}"
            ),
        }


def leakage_report(N: int) -> LeakageReport:
    if not 1 <= N <= MAX_BITS:
        raise BadRange(f"N must be within [1, {MAX_BITS}], got {N}")
    per_R = [(R, leak_I(N, R), leak_prob(N, R)) for R in range(N + 1)]
    return LeakageReport(N, per_R, leak_p_neq(N), leak_avg(N), leak_avg_exact(N))


def leakage_oracle(N: int) -> dict[int, tuple[float, Fraction]]:
    """Exhaustive (X, Y) pair count, independent of any binomial formula.

    For every R returns (I, prob) where prob counts pairs at distance R over
    all 4**N pairs and I uses the number of Y at distance R from X = 0.
    """
    if not 1 <= N <= ORACLE_MAX_BITS:
        raise BadRange(f"oracle only runs for 1 <= N <= {ORACLE_MAX_BITS}")
    size = 1 << N
    pair_counts = [0] * (N + 1)
    for x in range(size):
        for y in range(size):
            pair_counts[bin(x ^ y).count("1")] += 1
    from_zero = [0] * (N + 1)
    for y in range(size):
        from_zero[bin(y).count("1")] += 1
    return {
        R: (math.log2(size) - math.log2(from_zero[R]), Fraction(pair_counts[R], size * size))
        for R in range(N + 1)
    }


# -- cheat detection --------------------------------------------------------


def detection_probability(n: int, k: int) -> Fraction:
    """P(detect) when Trent lies on k uniformly chosen rounds of n.

    One lie goes unnoticed only when it hits i0; two or more always touch a
    checked round.
    """
    if n < 2 or not 0 <= k <= n:
        raise BadRange(f"need n >= 2 and 0 <= k <= n, got n={n}, k={k}")
    if k == 0:
        return Fraction(0)
    if k == 1:
        return 1 - Fraction(1, n)
    return Fraction(1)


@dataclass
class DetectionEstimate:
    protocol: str
    n: int
    k: int
    analytic: Fraction
    empirical: float
    trials: int
    detected: int
    undetected_wrong: int = 0
    exhaustive: bool = False
    extra: dict = field(default_factory=dict)

    @property
    def sigma(self) -> float:
        p = float(self.analytic)
        return math.sqrt(p * (1 - p) / self.trials)

    def to_dict(self) -> dict:
        return {
            "protocol": self.protocol,
            "n": self.n,
            "k": self.k,
            "analytic": float(self.analytic),
            "empirical": self.empirical,
            "trials": self.trials,
            "detected": self.detected,
            "undetected_wrong": self.undetected_wrong,
            "exhaustive": self.exhaustive,
        }


def trial_rng(seed: int, index: int) -> random.Random:
    """Independent stream for trial ``index``, stable across processes."""
    return random.Random(f"{seed}:{index}")


def _one_trial(protocol: str, n: int, k: int, seed: int, index: int,
               m: Optional[int]) -> tuple[bool, bool]:
    rng = trial_rng(seed, index)
    trent = TrentStrategy.flip_random(k)
    if protocol == "p1":
        a = rng.getrandbits(32)
        b = rng.getrandbits(32)
        while b == a:
            b = rng.getrandbits(32)
        out = run_p1(a, b, n, rng, trent)
        truth = "greater" if a > b else "less"
    elif protocol == "p2":
        a = rng.getrandbits(32)
        b = a if rng.getrandbits(1) else a + 1
        out = run_p2(a, b, n, m, rng, trent)
        truth = "equal" if a == b else "not-equal"
    else:
        raise ValueError(f"unknown protocol {protocol!r}")
    detected = out.cheat_detected
    return detected, (not detected and out.verdict.value != truth)


def _trial_chunk(args) -> tuple[int, int]:
    protocol, n, k, seed, start, stop, m = args
    detected = wrong = 0
    for index in range(start, stop):
        d, w = _one_trial(protocol, n, k, seed, index, m)
        detected += d
        wrong += w
    return detected, wrong


def estimate_detection(
    protocol: str,
    n: int,
    k: int,
    trials: int,
    seed: int = 0,
    *,
    m: Optional[int] = None,
    jobs: int = 1,
) -> DetectionEstimate:
    """Monte Carlo detection rate against a flip_random(k) Trent.

    Each trial draws fresh secrets and runs the full protocol on its own RNG
    stream, so the result is the same for any ``jobs``.
    """
    if trials < 1:
        raise BadRange("trials must be >= 1")
    analytic = detection_probability(n, k)
    if protocol == "p2" and m is not None and not 1 <= m < n:
        raise BadRange(f"need 1 <= m < n, got m={m}")
    jobs = max(1, min(jobs, trials))
    bounds = [trials * j // jobs for j in range(jobs + 1)]
    chunks = [(protocol, n, k, seed, bounds[j], bounds[j + 1], m) for j in range(jobs)]
    if jobs == 1:
        results = [_trial_chunk(chunks[0])]
    else:
        with ProcessPoolExecutor(jobs) as pool:
            results = list(pool.map(_trial_chunk, chunks))
    detected = sum(d for d, _ in results)
    wrong = sum(w for _, w in results)
    return DetectionEstimate(protocol, n, k, analytic, detected / trials, trials,
                             detected, wrong)


def exhaustive_detection(protocol: str, n: int, k: int, seed: int = 0,
                         m: Optional[int] = None) -> DetectionEstimate:
    """Run every (lie set of size k, i0) combination once."""
    analytic = detection_probability(n, k)
    detected = total = wrong = 0
    for i0 in range(1, n + 1):
        for lies in itertools.combinations(range(1, n + 1), k):
            rng = trial_rng(seed, total)
            trent = TrentStrategy.flip_rounds(lies)
            if protocol == "p1":
                a, b = 9, 5
                plan = plan_rounds(n, rng, i0=i0)
                out = run_p1(a, b, n, rng, trent, plan=plan)
                truth = "greater"
            elif protocol == "p2":
                a, b = 5, 6
                mm = m if m is not None else sample_m(n, rng)
                plan = plan_qpc(n, mm, rng, i0=i0)
                out = run_p2(a, b, n, mm, rng, trent, plan=plan)
                truth = "not-equal"
            else:
                raise ValueError(f"unknown protocol {protocol!r}")
            total += 1
            detected += out.cheat_detected
            wrong += (not out.cheat_detected) and out.verdict.value != truth
    return DetectionEstimate(protocol, n, k, analytic, detected / total, total,
                             detected, wrong, exhaustive=True)
