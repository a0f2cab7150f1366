"""Kernel backend selection.

The compiled extension is preferred.  Setting ``KEXT_PURE_PYTHON=1`` in the
environment (before import) forces the NumPy fallback.
"""

import os

from . import _purekernels

_available = {"python": _purekernels}

try:
    from . import _kernels as _compiled
except ImportError:  # pragma: no cover - depends on the build
    _compiled = None
else:
    _available["cython"] = _compiled

if _compiled is not None and not os.environ.get("KEXT_PURE_PYTHON"):
    active = _compiled
else:
    active = _purekernels


def available():
    """Names of the importable backends."""
    return sorted(_available)


def get(name=None):
    """Return the kernel module called ``name`` (default: the active one)."""
    if name is None:
        return active
    try:
        return _available[name]
    except KeyError:
        raise ValueError(f"unknown or unavailable backend {name!r}; "
                         f"choose from {available()}") from None


def use(name):
    """Switch the active backend for the rest of the process."""
    global active
    active = get(name)
    return active
