"""Honor the LCFG_THREADS cap before numpy is first imported.

BLAS backends read their thread-count environment variables at import time,
so this module must be imported at the very top of the package __init__.
"""

import os


def apply_thread_cap() -> None:
    cap = os.environ.get("LCFG_THREADS")
    if not cap:
        return
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
                "NUMEXPR_NUM_THREADS"):
        os.environ.setdefault(var, cap)


apply_thread_cap()
