"""Kernel backend selection.

The compiled Cython core is used when importable; set
``FLEETOPT_BACKEND=python`` to force the pure-Python fallback.
"""
import importlib
import os

from fleetopt import _pykernels


def load(name=None):
    """Return the kernel module for ``name`` ("cython", "python" or None for default)."""
    if name is None:
        name = os.environ.get("FLEETOPT_BACKEND", "auto")
    if name == "python":
        return _pykernels
    try:
        return importlib.import_module("fleetopt._ckernels")
    except ImportError:
        if name == "cython":
            raise
        return _pykernels


kernels = load()
BACKEND = kernels.BACKEND
