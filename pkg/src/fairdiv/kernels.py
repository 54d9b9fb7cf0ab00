"""Backend selection for the fairness kernels.

The compiled ``_ckernels`` module is used when it imports; otherwise, or
when ``FAIRDIV_PURE_PYTHON`` is set, the pure-Python twin is used.  Both
expose the same functions with identical results.
"""
import os

from . import _pykernels

EF1 = _pykernels.EF1
EFXPM = _pykernels.EFXPM

_compiled = None
if not os.environ.get("FAIRDIV_PURE_PYTHON"):
    try:
        from . import _ckernels as _compiled
    except ImportError:  # pragma: no cover - depends on the build
        _compiled = None

_impl = _compiled if _compiled is not None else _pykernels
BACKEND = "cython" if _compiled is not None else "python"

ef1_violation = _impl.ef1_violation
efxpm_violation = _impl.efxpm_violation
first_fair = _impl.first_fair
fair_flags = _impl.fair_flags


def backends():
    """Available backends by name, compiled first when present."""
    out = {}
    if _compiled is not None:
        out["cython"] = _compiled
    out["python"] = _pykernels
    return out
