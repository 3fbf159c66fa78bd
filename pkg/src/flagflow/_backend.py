"""Kernel backend selection.

The compiled module is used when it imports; ``FLAGFLOW_BACKEND=python``
forces the numpy fallback. The compiled Jacobi kernels win on small
matrices only; above ``CROSSOVER_N`` the LAPACK-backed fallback is faster
and is used regardless (see ``benchmarks/bench_backends.py``).
"""
import os

from . import _fallback

NAME = "python"
_impl = _fallback
CROSSOVER_N = 8

if os.environ.get("FLAGFLOW_BACKEND", "").lower() not in ("python", "numpy"):
    try:
        from . import _kernels as _impl  # noqa: F811
        NAME = "compiled"
    except ImportError:  # pragma: no cover - depends on the build
        _impl = _fallback


def available():
    """Names of the backends importable in this environment."""
    names = ["python"]
    try:
        from . import _kernels  # noqa: F401
    except ImportError:  # pragma: no cover
        return names
    return ["compiled"] + names


def get(name=None):
    """Return the kernel module for ``name`` (default: the active one)."""
    if name is None:
        return _impl
    if name == "python":
        return _fallback
    if name == "compiled":
        from . import _kernels
        return _kernels
    raise ValueError(f"unknown backend {name!r}")


def _pick(a):
    return _impl if a.shape[0] <= CROSSOVER_N else _fallback


def eigh(a):
    return _pick(a).eigh(a)


def gradient_field(x, q, values):
    return _pick(x).gradient_field(x, q, values)


def snap_spectrum(x, values):
    return _pick(x).snap_spectrum(x, values)
