import numpy as np

from . import register_strategy
from .base import BaseStrategy, sorted_step


@register_strategy("rr")
class RoundRobinStrategy(BaseStrategy):
    """
    Round-robin tournament (circle method).

    Column n-1 stays fixed while the others rotate by one position per step;
    K = n - 1 steps visit every pair exactly once.
    """

    def supports(self, n: int) -> bool:
        return n >= 2 and n % 2 == 0

    def pairs(self, n: int) -> np.ndarray:
        ring = n - 1
        r = np.arange(ring)[:, None]
        i = np.arange(1, n // 2)[None, :]
        # step r: (r, n-1) plus (r+i, r-i) mod ring
        p = np.concatenate([r, (r + i) % ring], axis=1)
        q = np.concatenate([np.full((ring, 1), n - 1), (r - i) % ring], axis=1)
        return sorted_step(np.stack([p, q], axis=2))
