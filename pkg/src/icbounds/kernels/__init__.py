"""Hot loops of the genie search: multistart Nelder-Mead and the exhaustive grid.

Two interchangeable backends implement the same kernels:

* ``numba``: compiled, parallel over independent runs (default when numba
  imports);
* ``numpy``: vectorized across runs, no compiler needed.

Set ``ICB_DISABLE_NUMBA=1`` to force the numpy backend. ``ICB_THREADS``
caps numba worker threads (``0`` or unset means numba's default).
"""
import importlib
import os

_FALSE = ("", "0", "false", "no", "off")


def _threads_from_env():
    raw = os.environ.get("ICB_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"ICB_THREADS must be an integer, got {raw!r}") from None
    return max(n, 0)


_threads = _threads_from_env()
if _threads and "NUMBA_NUM_THREADS" not in os.environ:
    # numba sizes its pool at import; a larger cap than the core count is honoured.
    os.environ["NUMBA_NUM_THREADS"] = str(_threads)
# tbb is rarely installed; skip the probe and its warning
os.environ.setdefault("NUMBA_THREADING_LAYER", "workqueue")


def _want_numba():
    if os.environ.get("ICB_DISABLE_NUMBA", "").strip().lower() not in _FALSE:
        return False
    try:
        importlib.import_module("numba")
    except ImportError:
        return False
    return True


BACKEND = "numba" if _want_numba() else "numpy"


def load(name=None):
    """Kernel module for backend ``name`` (``"numba"`` or ``"numpy"``); default is :data:`BACKEND`."""
    name = name or BACKEND
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    module = importlib.import_module(f"{__name__}._{name}")
    if name == "numba" and _threads:
        import numba

        numba.set_num_threads(min(_threads, numba.config.NUMBA_NUM_THREADS))
    return module


_active = load()
nelder_mead_batch = _active.nelder_mead_batch
grid_search = _active.grid_search
genie_objective = _active.genie_objective
