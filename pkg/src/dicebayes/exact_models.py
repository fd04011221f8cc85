"""Closed-form posteriors for the fair-throw and (generalized) Johnson models."""
from __future__ import annotations

import math
from typing import Optional

import numpy as np

from .core import (Average, ContradictoryData, Distribution, FrequencyVector,
                   PosteriorResult, CLOSED_FORM, OLD, NEW, N_FACES)
from .combinatorics import (ConstraintSet, enumerate_constrained_frequencies,
                            log_gamma_factorial, log_multinomial)


def conditional_old_given_frequency(nv: FrequencyVector, face: int) -> float:
    """P(an old throw shows `face` | frequencies) = N_face / N."""
    if nv.total < 1:
        raise ValueError("frequency vector must cover at least one throw")
    if not 1 <= face <= 6:
        raise ValueError(f"face must be 1..6, got {face}")
    return nv[face - 1] / nv.total


def _weighted_posterior(cs: ConstraintSet, log_weights, per_member_probs) -> Distribution:
    """Normalized weighted mean of per-member 6-vectors, combined in log domain."""
    lw = np.asarray(log_weights, dtype=float)
    w = np.exp(lw - lw.max())
    probs = np.asarray(per_member_probs, dtype=float)  # (members, 6)
    out = w @ probs / w.sum()
    return Distribution.from_weights(out)


def _require_nonempty(cs: ConstraintSet, n: int, a: Average) -> None:
    if cs.is_empty():
        raise ContradictoryData(f"no frequency vector realizes average {a} over {n} throws")


def fair_posterior(n: int, a: Average, throw: str) -> PosteriorResult:
    """Fair-throw model: multiplicity-weighted mean for old throws, uniform for new."""
    cs = enumerate_constrained_frequencies(n, a)
    _require_nonempty(cs, n, a)
    if throw == NEW:
        return PosteriorResult.from_distribution(Distribution.uniform(), CLOSED_FORM)
    lw = [log_multinomial(nv) for nv in cs]
    probs = [[c / n for c in nv] for nv in cs]
    return PosteriorResult.from_distribution(_weighted_posterior(cs, lw, probs), CLOSED_FORM)


def _johnson_result(cs: ConstraintSet, n: int, pseudo, throw: str) -> PosteriorResult:
    """Common path: per-face pseudo-counts `pseudo` (length 6), weights
    prod Gamma(N_l + pseudo_l) / N_l!."""
    total_pseudo = sum(pseudo)
    lw = [sum(math.lgamma(c + k) - log_gamma_factorial(c) for c, k in zip(nv, pseudo))
          for nv in cs]
    if throw == OLD:
        probs = [[c / n for c in nv] for nv in cs]
    else:
        probs = [[(c + k) / (n + total_pseudo) for c, k in zip(nv, pseudo)] for nv in cs]
    return PosteriorResult.from_distribution(_weighted_posterior(cs, lw, probs), CLOSED_FORM)


def johnson_posterior(n: int, a: Average, concentration: float, throw: str) -> PosteriorResult:
    """Symmetric Johnson (Dirichlet) model, pseudo-count `concentration` per face."""
    if not concentration > 0:
        raise ValueError("concentration must be > 0")
    cs = enumerate_constrained_frequencies(n, a)
    _require_nonempty(cs, n, a)
    return _johnson_result(cs, n, (concentration,) * N_FACES, throw)


def generalized_johnson_posterior(n: int, a: Average, concentration: float,
                                  base: Distribution, throw: str) -> PosteriorResult:
    """Johnson model with per-face pseudo-counts concentration * base_i.

    n = 0 is accepted and returns the prior predictive (= base for a new throw).
    """
    if not concentration > 0:
        raise ValueError("concentration must be > 0")
    if any(p <= 0 for p in base):
        raise ValueError("base distribution must be strictly positive")
    if n == 0:
        if throw == OLD:
            raise ValueError("with no data there is no old throw to ask about")
        return PosteriorResult.from_distribution(base, CLOSED_FORM)
    cs = enumerate_constrained_frequencies(n, a)
    _require_nonempty(cs, n, a)
    pseudo = tuple(concentration * p for p in base)
    return _johnson_result(cs, n, pseudo, throw)
