"""Selects the group-arithmetic backend at import time.

The compiled ``_native`` extension is used when it is importable; otherwise
the ``py_ecc``-based ``_purepy`` module is used. Set ``SEALEDBID_BACKEND`` to
``native`` or ``pure`` to force a choice (``native`` raises if the extension
is missing).
"""
from __future__ import annotations

import importlib
import os
from types import ModuleType

_EXPORTS = ("G1", "G2", "Gt", "G1Table", "G2Table", "pairing", "pairing_check")


def load(name: str) -> ModuleType:
    """Import a backend module by short name (``native`` or ``pure``)."""
    if name == "native":
        return importlib.import_module("sealedbid._native")
    if name == "pure":
        return importlib.import_module("sealedbid._purepy")
    raise ValueError(f"unknown backend {name!r}; expected 'native' or 'pure'")


def available() -> list[str]:
    names = []
    for name in ("native", "pure"):
        try:
            load(name)
        except ImportError:
            continue
        names.append(name)
    return names


def _select() -> ModuleType:
    choice = os.environ.get("SEALEDBID_BACKEND", "auto").lower()
    if choice != "auto":
        return load(choice)
    try:
        return load("native")
    except ImportError:
        return load("pure")


_impl = _select()
BACKEND: str = _impl.NAME
G1 = _impl.G1
G2 = _impl.G2
Gt = _impl.Gt
G1Table = _impl.G1Table
G2Table = _impl.G2Table
pairing = _impl.pairing
pairing_check = _impl.pairing_check

__all__ = ["BACKEND", "available", "load", *_EXPORTS]
