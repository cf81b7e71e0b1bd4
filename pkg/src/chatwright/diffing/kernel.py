"""Selects the edit-script kernel at import: compiled if available, else pure Python.

Set ``CHATWRIGHT_DIFF_KERNEL=python`` to force the fallback (used by the
benchmark and the backend-equivalence tests).
"""

from __future__ import annotations

import os

from chatwright.diffing import _kernel_py

KERNEL_BACKEND = "python"
diff_ops = _kernel_py.diff_ops
pairwise_distances = None

if os.environ.get("CHATWRIGHT_DIFF_KERNEL", "").lower() != "python":
    try:
        from chatwright.diffing import _kernel_c

        diff_ops = _kernel_c.diff_ops
        pairwise_distances = _kernel_c.pairwise_distances
        KERNEL_BACKEND = "c"
    except ImportError:
        pass
