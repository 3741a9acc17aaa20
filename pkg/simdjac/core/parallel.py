"""
Worker-parallel execution over contiguous index ranges.

Work is cut into at most `workers` contiguous slices and each slice writes
only its own output slots, so results never depend on the worker count or
on scheduling.
"""

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List


def parallel_slices(count: int, workers: int) -> List[slice]:
    workers = max(1, min(workers, count))
    if count == 0:
        return []
    bounds = [count * w // workers for w in range(workers + 1)]
    return [slice(bounds[w], bounds[w + 1]) for w in range(workers) if bounds[w] < bounds[w + 1]]


def run_sliced(fn: Callable[[slice], None], count: int, workers: int = 1) -> None:
    """Call fn(slice) for every slice of range(count); barrier on return."""
    slices = parallel_slices(count, workers)
    if len(slices) <= 1:
        for sl in slices:
            fn(sl)
        return
    with ThreadPoolExecutor(max_workers=len(slices)) as pool:
        for future in [pool.submit(fn, sl) for sl in slices]:
            future.result()
