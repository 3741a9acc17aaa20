"""
Lane Backend Registry

Backends are registered by name and looked up at run time, so every kernel
can run on whole numpy arrays or on the per-lane emulation without code
changes. To add a backend:
1. Create a module in this directory
2. Inherit from LaneBackend
3. Use the @register_backend decorator

Example:
    @register_backend("mybackend")
    class MyBackend(LaneBackend):
        def add(self, a, b):
            ...
"""

from typing import Dict, List, Optional, Type

from ..errors import UnknownBackendError
from .base import LaneBackend, high_to_low

# Global registry of backends
_BACKEND_REGISTRY: Dict[str, Type[LaneBackend]] = {}
_INSTANCES: Dict[str, LaneBackend] = {}


def register_backend(name: str):
    """Decorator to register a backend class."""
    def decorator(cls: Type[LaneBackend]):
        _BACKEND_REGISTRY[name] = cls
        cls._backend_name = name
        return cls
    return decorator


def get_backend(name: Optional[str] = None) -> LaneBackend:
    """Get a backend instance by name (default: the configured one)."""
    if name is None:
        from ..config import get_settings
        name = get_settings().lane_backend
    if name not in _BACKEND_REGISTRY:
        raise UnknownBackendError(f"Unknown lane backend: {name}. Available: {list(_BACKEND_REGISTRY.keys())}")
    if name not in _INSTANCES:
        _INSTANCES[name] = _BACKEND_REGISTRY[name]()
    return _INSTANCES[name]


def list_backends() -> List[str]:
    """List all registered backends."""
    return list(_BACKEND_REGISTRY.keys())


__all__ = ["LaneBackend", "register_backend", "get_backend", "list_backends", "high_to_low"]

# Import backends to trigger registration
# This must happen after register_backend is defined
from . import vector, scalar  # noqa: E402,F401
