"""Kernel backend selection.

The hot loops live in the compiled extension ``geomed._speedups`` when it
is available; otherwise the numpy fallback ``geomed._pykernels`` is used.
Set ``GEOMED_BACKEND=python`` or ``GEOMED_BACKEND=compiled`` to force a
choice (forcing ``compiled`` raises if the extension is missing).
"""

from __future__ import annotations

import os
from types import ModuleType

__all__ = ["BACKEND", "kernels", "available_backends", "load_backend"]


def load_backend(name: str) -> ModuleType:
    if name == "python":
        from geomed import _pykernels

        return _pykernels
    if name == "compiled":
        from geomed import _speedups

        return _speedups
    raise ValueError(f"unknown backend {name!r} (expected 'python' or 'compiled')")


def available_backends() -> list[str]:
    names = []
    try:
        load_backend("compiled")
        names.append("compiled")
    except ImportError:
        pass
    names.append("python")
    return names


def _select() -> tuple[str, ModuleType]:
    requested = os.environ.get("GEOMED_BACKEND", "auto").strip().lower() or "auto"
    if requested in ("auto", ""):
        try:
            return "compiled", load_backend("compiled")
        except ImportError:
            return "python", load_backend("python")
    if requested in ("compiled", "c", "speedups"):
        return "compiled", load_backend("compiled")
    if requested in ("python", "py", "pure"):
        return "python", load_backend("python")
    raise ValueError(f"GEOMED_BACKEND={requested!r} not understood")


BACKEND, kernels = _select()
