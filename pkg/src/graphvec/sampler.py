"""Negative sampling from the smoothed unigram distribution.

Negatives are drawn over the union of all language-tagged types with
probability proportional to count^exponent (default 3/4), rejecting
draws that fall inside the current center's context set for a bounded
number of retries.
"""

from dataclasses import dataclass

import numpy as np

from .corpus import Vocabulary

DEFAULT_EXPONENT = 0.75

MAX_RETRIES = 10


def make_rng(seed: int) -> np.random.Generator:
    """Deterministic, platform-independent generator for a 64-bit seed."""
    return np.random.Generator(np.random.PCG64(seed))


@dataclass
class NegativeSamplingTable:
    """Discrete distribution p(i) ~ count(i)^exponent over vocabulary ids."""

    probabilities: np.ndarray
    cumulative: np.ndarray
    exponent: float

    def __len__(self) -> int:
        return len(self.probabilities)


def build_table(
    vocab: Vocabulary, exponent: float = DEFAULT_EXPONENT
) -> NegativeSamplingTable:
    if len(vocab) == 0:
        raise ValueError("empty vocabulary")
    if exponent <= 0:
        raise ValueError("exponent must be positive")
    weights = np.asarray(vocab.counts, dtype=np.float64) ** exponent
    probabilities = weights / weights.sum()
    if abs(probabilities.sum() - 1.0) > 1e-9 or (probabilities <= 0).any():
        raise ValueError("degenerate sampling distribution")
    return NegativeSamplingTable(probabilities, np.cumsum(probabilities), exponent)


def sample_negatives(
    table: NegativeSamplingTable,
    rng: np.random.Generator,
    count: int,
    forbidden=frozenset(),
) -> list[int]:
    """Draw ``count`` ids i.i.d. from the table.

    A draw landing in ``forbidden`` is re-drawn up to MAX_RETRIES times
    and then kept: termination is guaranteed and residual collisions are
    negligible for realistic vocabularies.
    """
    cumulative = table.cumulative
    draws = cumulative.searchsorted(rng.random(count), side="right")
    if not forbidden:
        return draws.tolist()
    out = []
    for drawn in draws.tolist():
        for _ in range(MAX_RETRIES):
            if drawn not in forbidden:
                break
            drawn = int(cumulative.searchsorted(rng.random(), side="right"))
        out.append(drawn)
    return out
