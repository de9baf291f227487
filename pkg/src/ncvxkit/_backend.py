"""Backend selection: compiled extension if available, numpy fallback otherwise.

Set ``NCVXKIT_PURE_PY=1`` to force the pure-python backend (useful for
benchmarking the two against each other; see ``benchmarks/``).
"""

import os

from . import _kernels_py

if os.environ.get("NCVXKIT_PURE_PY", "") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _kernels_py

jacobi_svd = _impl.jacobi_svd
quartic_form = _impl.quartic_form
quartic_contract = _impl.quartic_contract


def backend_name() -> str:
    """Which kernel backend is active: "compiled" or "python"."""
    return _impl.BACKEND_NAME
