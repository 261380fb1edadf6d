"""Backend dispatch for the batch inference kernels.

The environment variable REGFUZZ_BACKEND picks the implementation:
  auto    prefer the compiled extension, fall back to NumPy (default)
  cython  require the compiled extension, fail loudly if missing
  python  force the NumPy reference backend
"""
import os

from . import _kernels_py

_requested = os.environ.get("REGFUZZ_BACKEND", "auto").strip().lower() or "auto"
if _requested not in ("auto", "cython", "python"):
    raise ImportError(
        f"REGFUZZ_BACKEND must be 'auto', 'cython' or 'python', got {_requested!r}"
    )

_impl = None
if _requested in ("auto", "cython"):
    try:
        from . import _speedups as _impl
    except ImportError:
        if _requested == "cython":
            raise ImportError(
                "REGFUZZ_BACKEND=cython but the compiled extension is not importable"
            )
if _impl is None:
    _impl = _kernels_py

backend_name = "python" if _impl is _kernels_py else "cython"


def available_backends() -> dict:
    """Name -> kernel module for every importable backend (for benchmarks/tests)."""
    found = {"python": _kernels_py}
    try:
        from . import _speedups
        found["cython"] = _speedups
    except ImportError:
        pass
    return found


def sugeno_batch(*args):
    return _impl.sugeno_batch(*args)


def mamdani_batch(*args):
    return _impl.mamdani_batch(*args)
