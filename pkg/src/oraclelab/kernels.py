"""Kernel selection: the compiled extension when importable, else pure Python.

Set ``ORACLELAB_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("ORACLELAB_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _kernels_py

mix64 = _impl.mix64
seed_key = _impl.seed_key
answer = _impl.answer
answers = _impl.answers
table = _impl.table
inclusion_counts = _impl.inclusion_counts

__all__ = ["BACKEND", "mix64", "seed_key", "answer", "answers", "table", "inclusion_counts"]
