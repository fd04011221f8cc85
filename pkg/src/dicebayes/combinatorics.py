"""Exact enumeration of average-constrained frequency vectors and multinomial weights."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List

from .core import Average, FrequencyVector, FACE_VALUES, N_FACES


@dataclass(frozen=True)
class ConstraintSet:
    """All frequency vectors with the given total whose pip sum equals target_sum."""

    n: int
    target_sum: int
    members: tuple

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def is_empty(self) -> bool:
        return not self.members


def enumerate_constrained_frequencies(n: int, a: Average) -> ConstraintSet:
    """Frequency vectors of n throws with average a, in lexicographic count order.

    Returns an empty set when a*n is not an integer or no composition exists;
    callers decide whether empty means contradictory data.
    """
    if n < 1:
        raise ValueError("need at least one throw")
    target = Fraction(a.value) * n
    if target.denominator != 1:
        return ConstraintSet(n, -1, ())
    s = target.numerator

    members: List[FrequencyVector] = []
    counts = [0] * N_FACES

    def recurse(face: int, remaining_n: int, remaining_s: int):
        if face == N_FACES - 1:
            # last face's count is forced
            if remaining_s == FACE_VALUES[face] * remaining_n:
                counts[face] = remaining_n
                members.append(FrequencyVector(tuple(counts)))
                counts[face] = 0
            return
        value = FACE_VALUES[face]
        # bounds from min/max attainable pip sums of the remaining faces
        lo_rest, hi_rest = FACE_VALUES[face + 1], FACE_VALUES[-1]
        for c in range(remaining_n + 1):
            rest_n = remaining_n - c
            rest_s = remaining_s - value * c
            # rest_s - lo*rest_n grows with c, rest_s - hi*rest_n also grows,
            # so a too-small remainder may recover but a too-large one cannot
            if rest_s < lo_rest * rest_n:
                continue
            if rest_s > hi_rest * rest_n:
                break
            counts[face] = c
            recurse(face + 1, rest_n, rest_s)
            counts[face] = 0

    if n <= s <= 6 * n:
        recurse(0, n, s)
    return ConstraintSet(n, s, tuple(members))


def log_gamma_factorial(x: float) -> float:
    """ln Gamma(x + 1), the real-argument factorial in log domain."""
    if x < 0:
        raise ValueError(f"factorial argument must be >= 0, got {x}")
    return math.lgamma(x + 1.0)


def log_multinomial(nv: FrequencyVector) -> float:
    """ln( N! / prod N_i! )."""
    return log_gamma_factorial(nv.total) - sum(log_gamma_factorial(c) for c in nv)


def multinomial_exact(nv: FrequencyVector) -> int:
    """Integer multinomial coefficient, used as an exact oracle."""
    out = math.factorial(nv.total)
    for c in nv:
        out //= math.factorial(c)
    return out


def count_sequences(n: int, s: int) -> int:
    """Number of ordered n-tuples over {1..6} summing to s, by exact big-int DP."""
    if n < 1:
        raise ValueError("need at least one throw")
    if not n <= s <= 6 * n:
        return 0
    ways = [1]  # ways[t] = sequences of throws so far summing to t (offset by min sum)
    for throws in range(1, n + 1):
        new = [0] * (5 * throws + 1)
        for t, w in enumerate(ways):
            if w:
                for v in range(6):
                    new[t + v] += w
        ways = new
    idx = s - n
    return ways[idx] if 0 <= idx < len(ways) else 0
