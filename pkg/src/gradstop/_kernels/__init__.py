"""Kernel backend selection.

The hot numerical kernels exist twice: a Cython extension (``_speed``) and a
pure NumPy twin (``_pure``). The compiled backend is preferred when it has been
built; set ``GRADSTOP_BACKEND=python`` or ``GRADSTOP_BACKEND=compiled`` to force
one side (forcing ``compiled`` raises if the extension is missing).
"""

from __future__ import annotations

import os
from types import ModuleType

from . import _pure


def _load_compiled() -> ModuleType:
    from . import _speed

    return _speed


def get_backend(name: str) -> ModuleType:
    """Return a kernel backend module by name ("python" or "compiled")."""
    if name == "python":
        return _pure
    if name == "compiled":
        return _load_compiled()
    raise ValueError(f"unknown backend {name!r}")


_forced = os.environ.get("GRADSTOP_BACKEND")
if _forced is not None:
    impl = get_backend(_forced)
else:
    try:
        impl = _load_compiled()
    except ImportError:
        impl = _pure

BACKEND = "compiled" if impl is not _pure else "python"

chi2_cdf = impl.chi2_cdf
gram_traces = impl.gram_traces
oas_epsilon = impl.oas_epsilon
oas_epsilon_from_traces = impl.oas_epsilon_from_traces
shrunk_solve = impl.shrunk_solve
pairwise_sign_cos = impl.pairwise_sign_cos
pivoted_solve = _pure.pivoted_solve  # shared fallback, both backends
