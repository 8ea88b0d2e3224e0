"""Kernel backend selection.

Prefers the compiled Cython kernels when the extension built; otherwise, or
when VBREG_PURE_PYTHON is set to a non-empty value other than "0", uses the
pure-numpy twins. Both expose the same functions and the same semantics.
"""

import os

if os.environ.get("VBREG_PURE_PYTHON", "0") not in ("", "0"):
    from . import _kernels_py as _impl
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        from . import _kernels_py as _impl

logit_iter_pass = _impl.logit_iter_pass
logit_pred_rows = _impl.logit_pred_rows


def backend_name():
    """Name of the active kernel backend: "compiled" or "python"."""
    return _impl.BACKEND_NAME
