"""Pick the compiled kernels when available, else the numpy fallback.

Set ``BRDSIM_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _fallback

kernels = _fallback
NAME = "python"

if not os.environ.get("BRDSIM_PURE_PYTHON"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        pass
    else:
        kernels = _compiled
        NAME = "cython"

derive_seeds = kernels.derive_seeds
brd_batch = kernels.brd_batch
pne_count_batch = kernels.pne_count_batch
