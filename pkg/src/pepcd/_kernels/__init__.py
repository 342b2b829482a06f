"""Hot-loop kernels with a compiled backend and a pure-Python fallback.

The compiled extension is used when it imports; setting the environment
variable ``PEPCD_PURE_PYTHON=1`` forces the fallback.  ``BACKEND`` names the
active implementation.
"""

import os

from . import _pykernels as python_backend

compiled_backend = None
if os.environ.get("PEPCD_PURE_PYTHON") != "1":
    try:
        from . import _ckernels as compiled_backend
    except ImportError:  # extension not built
        compiled_backend = None

_active = compiled_backend if compiled_backend is not None else python_backend
BACKEND = "compiled" if compiled_backend is not None else "python"

bowyer_watson = _active.bowyer_watson
locate_cells = _active.locate_cells
exact_mds_groups = _active.exact_mds_groups
greedy_dominating_set = _active.greedy_dominating_set

__all__ = [
    "BACKEND",
    "bowyer_watson",
    "compiled_backend",
    "exact_mds_groups",
    "greedy_dominating_set",
    "locate_cells",
    "python_backend",
]
