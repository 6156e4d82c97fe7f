"""Select the fixed-point sweep backend.

The compiled extension is used when importable, unless the environment
variable ``SEMIMIX_PURE_PYTHON`` is set to a non-empty value other than
``0``.
"""
import os

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # pragma: no cover - depends on build
    _compiled = None

_force_py = os.environ.get("SEMIMIX_PURE_PYTHON", "") not in ("", "0")

if _compiled is not None and not _force_py:
    sweep = _compiled.sweep
    BACKEND = _compiled.BACKEND
else:
    sweep = _kernels_py.sweep
    BACKEND = _kernels_py.BACKEND

BACKENDS = {"python": _kernels_py.sweep}
if _compiled is not None:
    BACKENDS["cython"] = _compiled.sweep


def get_sweep(backend=None):
    """Return the sweep function for ``backend`` (default: the active one)."""
    if backend is None:
        return sweep
    try:
        return BACKENDS[backend]
    except KeyError:
        raise ValueError(f"backend {backend!r} not available; have {sorted(BACKENDS)}") from None
