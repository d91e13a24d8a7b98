"""Kernel backend selection.

The compiled extension (graysl._native) is preferred when importable; the
numpy fallback (graysl._fallback) is behaviorally identical but slower. The
GRAYSL_BACKEND environment variable ("native" or "python") forces a choice.
"""

import os

from . import _fallback
from .errors import ConfigurationError

try:
    from . import _native
except ImportError:  # extension not built for this interpreter
    _native = None

_BACKENDS = {"python": _fallback}
if _native is not None:
    _BACKENDS["native"] = _native


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def get_backend(name: str | None = None):
    """Return the kernel module for `name`, or the active default for None."""
    if name is None:
        name = _active
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ConfigurationError(
            f"backend {name!r} not available (have: {', '.join(available_backends())})"
        ) from None


def set_backend(name: str) -> None:
    global _active
    get_backend(name)
    _active = name


def active_backend_name() -> str:
    return _active


_active = "native" if "native" in _BACKENDS else "python"
_requested = os.environ.get("GRAYSL_BACKEND")
if _requested:
    set_backend(_requested)
