import numpy as np

from . import register_strategy
from .base import BaseStrategy, sorted_step


@register_strategy("me")
class ButterflyStrategy(BaseStrategy):
    """
    Hypercube butterfly ordering for n a power of two.

    Step t pairs every column i with i XOR g(t), where g is the reflected
    Gray code of t = 1..n-1, so consecutive steps exchange along a single
    hypercube dimension.
    """

    def supports(self, n: int) -> bool:
        return n >= 2 and n & (n - 1) == 0

    def pairs(self, n: int) -> np.ndarray:
        cols = np.arange(n)
        steps = []
        for t in range(1, n):
            partner = cols ^ (t ^ (t >> 1))
            low = cols < partner
            steps.append(sorted_step(np.stack([cols[low], partner[low]], axis=1)))
        return np.stack(steps)
