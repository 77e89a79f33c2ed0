"""Kernel selection: compiled ``_simcore`` if importable, else pure Python.

Set ``backend="python"`` on a call to force the fallback.
"""
from . import _simcore_py

try:
    from . import _simcore as _compiled
except ImportError:  # extension not built
    _compiled = None

NAME = "cython" if _compiled is not None else "python"


def get(name=None):
    if name is None:
        return _compiled or _simcore_py
    if name == "python":
        return _simcore_py
    if name == "cython":
        if _compiled is None:
            raise ImportError("compiled kernel eagletune._simcore is not built")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


def available():
    return ["python"] + (["cython"] if _compiled is not None else [])
