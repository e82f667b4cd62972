"""Kernel backend selection.

The compiled extension (``delaykf._core``) is preferred when it was built;
otherwise the pure-numpy kernels are used. Both expose the same functions
with the same semantics, so everything above this module is backend
agnostic. ``set_backend`` exists for tests and benchmarks.
"""

from . import _pykernels

try:
    from . import _core
except ImportError:  # extension not built; numpy fallback
    _core = None

HAVE_COMPILED = _core is not None

_active = _core if HAVE_COMPILED else _pykernels


def kernels():
    """Currently active kernel module."""
    return _active


def backend_name() -> str:
    return _active.BACKEND_NAME


def available_backends() -> tuple[str, ...]:
    return ("python", "compiled") if HAVE_COMPILED else ("python",)


def set_backend(name: str) -> str:
    """Select ``'python'``, ``'compiled'`` or ``'auto'``; returns the active name."""
    global _active
    if name == "python":
        _active = _pykernels
    elif name == "compiled":
        if _core is None:
            raise RuntimeError(
                "compiled backend unavailable; build the extension first"
            )
        _active = _core
    elif name == "auto":
        _active = _core if HAVE_COMPILED else _pykernels
    else:
        raise ValueError(f"unknown backend {name!r}")
    return _active.BACKEND_NAME
