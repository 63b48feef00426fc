"""Runtime knobs read from the environment.

``NORMFORGE_DIM_CAP``       largest dimension accepted by vertex enumeration (default 6).
``NORMFORGE_DISABLE_NUMBA`` set to 1 to force the pure-numpy kernels.
"""
import os

DEFAULT_DIM_CAP = 6
VERTEX_DEDUP_TOL = 1e-9
FEASIBILITY_TOL = 1e-9


def dim_cap() -> int:
    raw = os.environ.get("NORMFORGE_DIM_CAP")
    if raw is None or raw.strip() == "":
        return DEFAULT_DIM_CAP
    return int(raw)


def numba_disabled() -> bool:
    return os.environ.get("NORMFORGE_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")
