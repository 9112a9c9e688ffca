"""Selects the compiled kernels when available, else the pure-Python ones."""

import os

BACKEND = "python"

if os.environ.get("SUCCINCT_RMQ_PURE") != "1":
    try:
        from ._kernels import cartesian_links, prev_smaller_eq, sparse_levels, cell_summaries, match_closes
        BACKEND = "cython"
    except ImportError:
        pass

if BACKEND == "python":
    from ._kernels_py import cartesian_links, prev_smaller_eq, sparse_levels, cell_summaries, match_closes

__all__ = ["BACKEND", "cartesian_links", "prev_smaller_eq", "sparse_levels", "cell_summaries", "match_closes"]
