"""Kernel backend selection.

The compiled ``_kernels`` extension is used when importable; otherwise the
pure-Python ``_pykernels`` module. Set ``MRIM_BACKEND=python`` to force the
fallback (``MRIM_BACKEND=cython`` makes a missing extension an error).
"""
from __future__ import annotations

import importlib
import os

from . import _pykernels


def _select():
    want = os.environ.get("MRIM_BACKEND", "").strip().lower()
    if want == "python":
        return _pykernels
    try:
        return importlib.import_module("mrim._kernels")
    except ImportError:
        if want == "cython":
            raise
        return _pykernels


kernels = _select()


def available_backends() -> dict:
    out = {"python": _pykernels}
    try:
        out["cython"] = importlib.import_module("mrim._kernels")
    except ImportError:
        pass
    return out
