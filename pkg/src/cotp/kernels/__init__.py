"""Hot kernels with a compiled backend and a numpy fallback.

The compiled extension is used when it was built and importable; setting
``COTP_PURE_PYTHON=1`` forces the fallback.  ``BACKEND`` names the active one.
"""
import os

from . import _fallback

if os.environ.get("COTP_PURE_PYTHON"):
    _impl = _fallback
else:
    try:
        from . import _monomial as _impl
    except ImportError:
        _impl = _fallback

BACKEND = "compiled" if _impl is not _fallback else "python"

conjugate = _impl.conjugate
accumulate = _impl.accumulate

__all__ = ["BACKEND", "conjugate", "accumulate"]
