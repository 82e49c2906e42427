"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the pure-Python
fallback is used.  ``CKS_BACKEND=python`` (or ``cython``) forces a choice.
"""
import importlib
import logging
import os

logger = logging.getLogger(__name__)

BACKENDS = ("cython", "python")
_MODULES = {"cython": "cks._kernels", "python": "cks._pykernels"}


def load(name):
    if name not in _MODULES:
        raise ValueError(f"unknown backend {name!r}; expected one of {BACKENDS}")
    return importlib.import_module(_MODULES[name])


def available():
    names = []
    for name in BACKENDS:
        try:
            load(name)
        except ImportError:
            continue
        names.append(name)
    return names


def _select():
    forced = os.environ.get("CKS_BACKEND")
    if forced:
        return forced, load(forced)
    try:
        return "cython", load("cython")
    except ImportError:
        logger.warning("compiled kernels unavailable; using the pure-Python fallback")
        return "python", load("python")


NAME, kernels = _select()


def get(name=None):
    """Kernel module for ``name``, or the import-time default."""
    if name is None:
        return kernels
    return load(name)
