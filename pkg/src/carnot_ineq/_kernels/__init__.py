"""Metropolis kernel backends.

The compiled extension is used when it was built; otherwise, or when the
environment variable CARNOT_INEQ_PURE is set to 1, the pure-Python mirror is
selected.  ``BACKEND`` names the active one.
"""

import os

from . import _metropolis_py

PROFILE_CODES = {"power": 0, "cosh_power": 1, "power_log": 2, "alpha_power": 3}

_compiled = None
if os.environ.get("CARNOT_INEQ_PURE", "0") != "1":
    try:
        from . import _metropolis as _compiled
    except ImportError:  # extension not built
        _compiled = None

BACKEND = "cython" if _compiled is not None else "python"


def get_backend(name=None):
    """Module exposing ``run_segment``; name is 'cython', 'python' or None (active)."""
    name = name or BACKEND
    if name == "python":
        return _metropolis_py
    if name == "cython":
        if _compiled is None:
            raise ImportError("compiled Metropolis kernel is not available")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


def compiled_available() -> bool:
    return _compiled is not None
