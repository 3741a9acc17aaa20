"""
Quick script to validate the pivot strategy tables for a range of column
counts: every step a perfect matching, every pair visited once per sweep.
"""

import sys
import os
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from simdjac.core.errors import StrategyError
from simdjac.core.strategies import build_strategy, get_strategy, list_strategies


def main(max_n: int = 512):
    print("=" * 80)
    print(f"Pivot strategy tables, n = 2..{max_n}")
    print("=" * 80)

    failures = 0
    for kind in list_strategies():
        strategy = get_strategy(kind)
        sizes = [n for n in range(2, max_n + 1, 2) if strategy.supports(n)]
        for n in sizes:
            try:
                build_strategy(n, kind).validate()
            except StrategyError as e:
                failures += 1
                print(f"  ✗ {kind} n={n}: {e}")
        print(f"\n{kind}: {len(sizes)} sizes checked (n = {sizes[0]}..{sizes[-1]})")

    if failures:
        print(f"\n✗ {failures} broken tables")
        sys.exit(1)
    print("\n✓ All tables valid")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 512)
