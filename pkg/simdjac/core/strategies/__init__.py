"""
Pivot Strategy Registry

Strategies are registered by name and looked up when a run starts. To add a
strategy (the modified modulus ordering, for example):
1. Create a module in this directory
2. Inherit from BaseStrategy
3. Use the @register_strategy decorator

Example:
    @register_strategy("mm")
    class ModifiedModulusStrategy(BaseStrategy):
        def supports(self, n):
            ...
"""

from functools import lru_cache
from typing import Dict, List, Type

from ..errors import StrategyError
from .base import BaseStrategy, StrategyTable

# Global registry of strategies
_STRATEGY_REGISTRY: Dict[str, Type[BaseStrategy]] = {}


def register_strategy(name: str):
    """Decorator to register a strategy class."""
    def decorator(cls: Type[BaseStrategy]):
        _STRATEGY_REGISTRY[name] = cls
        cls.name = name
        return cls
    return decorator


def get_strategy(name: str) -> BaseStrategy:
    if name not in _STRATEGY_REGISTRY:
        raise StrategyError(f"Unknown strategy: {name}. Available: {list(_STRATEGY_REGISTRY.keys())}")
    return _STRATEGY_REGISTRY[name]()


def list_strategies() -> List[str]:
    """List all registered strategies."""
    return list(_STRATEGY_REGISTRY.keys())


@lru_cache(maxsize=64)
def build_strategy(n: int, kind: str = "rr") -> StrategyTable:
    """Precomputed pivot table of one sweep over n columns."""
    return get_strategy(kind).build(n)


__all__ = ["BaseStrategy", "StrategyTable", "register_strategy", "get_strategy",
           "list_strategies", "build_strategy"]

# Import strategies to trigger registration
from . import round_robin, butterfly  # noqa: E402,F401
