"""Import-time choice between the compiled chain kernel and pure Python.

Setting ``SCALEMIX_PURE_PYTHON`` to a non-empty value other than ``0``
forces the pure-Python engine even when the extension is importable.
"""

import os

from .mixing import GIG, Gamma, InvertedGamma

try:
    from . import _kernels
except ImportError:  # extension not built
    _kernels = None

_forced = os.environ.get("SCALEMIX_PURE_PYTHON", "") not in ("", "0")
kernels = None if _forced else _kernels
NAME = "compiled" if kernels is not None else "python"


def kernel_args(h):
    """(family code, three parameters) when the kernel handles ``h``, else None."""
    if _kernels is None:
        return None
    # exact types only: subclasses might override sampling
    if type(h) is Gamma:
        return _kernels.FAMILY_CODES["gamma"], (h.alpha, h.gamma, 0.0)
    if type(h) is InvertedGamma:
        return _kernels.FAMILY_CODES["inverted_gamma"], (h.alpha, h.gamma, 0.0)
    if type(h) is GIG:
        return _kernels.FAMILY_CODES["gig"], (h.v, h.a, h.b)
    return None
