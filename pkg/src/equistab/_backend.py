"""Kernel backend chosen at import: compiled extension if built, else pure Python.

Set ``EQUISTAB_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _pykernels

kernels = _pykernels
if not os.environ.get("EQUISTAB_PURE_PYTHON"):
    try:
        from . import _kernels as kernels  # noqa: F811
    except ImportError:
        kernels = _pykernels

BACKEND = kernels.BACKEND

# model / system / status codes are shared by both backends
CONST = _pykernels.CONST
SPHERE_IDENTITY = _pykernels.SPHERE_IDENTITY
SPHERE_LINEAR = _pykernels.SPHERE_LINEAR
SPHERE_PROFILE = _pykernels.SPHERE_PROFILE
SU3_IDENTITY = _pykernels.SU3_IDENTITY
SU3_PROFILE = _pykernels.SU3_PROFILE
HARMONIC = _pykernels.HARMONIC
LINEAR = _pykernels.LINEAR
PRUEFER = _pykernels.PRUEFER
HARMONIC_DEV = _pykernels.HARMONIC_DEV
OK = _pykernels.OK
DIVERGED = _pykernels.DIVERGED
UNDERFLOW = _pykernels.UNDERFLOW


def get(name: str):
    """Kernel module by name ("cython" or "python"); for cross-checks and benchmarks."""
    if name == "python":
        return _pykernels
    from . import _kernels

    return _kernels
