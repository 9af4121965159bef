"""Kernel backend selection.

The compiled extension is used when it was built; otherwise the numpy
implementation.  Set ``MEMWALK_KERNELS=python`` to force the fallback.
"""

import os
from types import ModuleType

from memwalk import _pykernels

try:
    from memwalk import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def available() -> dict[str, ModuleType]:
    found = {"python": _pykernels}
    if _ckernels is not None:
        found["cython"] = _ckernels
    return found


def get(name: str | None = None) -> ModuleType:
    if name is None:
        name = os.environ.get("MEMWALK_KERNELS", "cython" if _ckernels is not None else "python")
    try:
        return available()[name]
    except KeyError:
        raise ValueError(f"kernel backend {name!r} not available; have {sorted(available())}") from None


active = get()
BACKEND = next(k for k, mod in available().items() if mod is active)
