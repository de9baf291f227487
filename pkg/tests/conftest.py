import pytest

from ncvxkit import _kernels_py

try:
    from ncvxkit import _kernels as _kernels_compiled
except ImportError:
    _kernels_compiled = None


def available_backends():
    mods = [_kernels_py]
    if _kernels_compiled is not None:
        mods.append(_kernels_compiled)
    return mods


@pytest.fixture(params=[m.BACKEND_NAME for m in available_backends()])
def kernel_backend(request):
    """Run a test against every importable kernel backend."""
    for mod in available_backends():
        if mod.BACKEND_NAME == request.param:
            return mod
    raise RuntimeError(request.param)
