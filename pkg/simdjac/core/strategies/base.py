"""
Base Strategy Interface

A parallel pivot strategy fixes, for an even number of columns n, a cyclic
schedule of K steps. Every step is a perfect matching of the n column
indices into n/2 disjoint pivot pairs (p, q), p < q. Sweeps repeat the same
schedule.

All strategies must inherit from BaseStrategy and implement:
- supports(n): True if a table exists for n columns
- pairs(n): the K x (n/2) x 2 table of pivot pairs
"""

from abc import ABC, abstractmethod
from typing import Tuple

import numpy as np

from ..errors import StrategyError


class StrategyTable:
    """Lookup table J: (step, slot) -> (p, q), 0-based."""

    def __init__(self, name: str, pairs: np.ndarray):
        pairs = np.asarray(pairs, dtype=np.intp)
        if pairs.ndim != 3 or pairs.shape[2] != 2:
            raise StrategyError(f"strategy table must have shape (K, n/2, 2), got {pairs.shape}")
        self.name = name
        self.pairs = pairs

    @property
    def steps(self) -> int:
        return self.pairs.shape[0]

    @property
    def n(self) -> int:
        return 2 * self.pairs.shape[1]

    def step(self, k: int) -> Tuple[np.ndarray, np.ndarray]:
        """(p indices, q indices) of step k modulo K."""
        row = self.pairs[k % self.steps]
        return row[:, 0], row[:, 1]

    def validate(self) -> None:
        """Raise StrategyError unless every step is a matching and a sweep covers all pairs."""
        n, pairs = self.n, self.pairs
        bad_order = np.any(pairs[:, :, 0] >= pairs[:, :, 1], axis=1)
        # a perfect matching lists every column index exactly once
        bad_match = np.any(np.sort(pairs.reshape(self.steps, n), axis=1) != np.arange(n), axis=1)
        bad = np.flatnonzero(bad_order | bad_match)
        if bad.size:
            k = int(bad[0])
            if bad_order[k]:
                raise StrategyError(f"{self.name}: step {k} has a pair with p >= q")
            raise StrategyError(f"{self.name}: step {k} is not a perfect matching of {n} columns")
        p, q = np.triu_indices(n, 1)
        missing = np.setdiff1d(p * n + q, pairs[:, :, 0] * n + pairs[:, :, 1])
        if missing.size:
            first = int(missing[0])
            raise StrategyError(f"{self.name}: {missing.size} pivot pairs never visited, e.g. {(first // n, first % n)}")

    def __repr__(self) -> str:
        return f"StrategyTable({self.name!r}, n={self.n}, K={self.steps})"


class BaseStrategy(ABC):
    """Base class for all parallel pivot strategies."""

    name: str = "base"

    @abstractmethod
    def supports(self, n: int) -> bool:
        """
        Check if this strategy has a table for n columns.

        Args:
            n: number of columns (even)

        Returns:
            True if pairs(n) can be built
        """
        pass

    @abstractmethod
    def pairs(self, n: int) -> np.ndarray:
        """
        Build the pivot pairs of one sweep.

        Args:
            n: number of columns

        Returns:
            integer array of shape (K, n/2, 2), rows sorted by p
        """
        pass

    def build(self, n: int) -> StrategyTable:
        if n < 2 or n % 2:
            raise StrategyError(f"{self.name}: n must be even and >= 2, got {n}")
        if not self.supports(n):
            raise StrategyError(f"{self.name}: no table for n = {n}")
        return StrategyTable(self.name, self.pairs(n))


def sorted_step(pairs) -> np.ndarray:
    """Order each pair as p < q and the pairs of each step by p; takes one step or a whole table."""
    arr = np.sort(np.asarray(pairs, dtype=np.intp), axis=-1)
    order = np.argsort(arr[..., 0], axis=-1, kind="stable")
    return np.take_along_axis(arr, order[..., None], axis=-2)
