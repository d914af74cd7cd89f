"""Hot-loop kernels with a compiled core and a NumPy fallback.

Import order: try the Cython extension, fall back to the NumPy reference.
``IMPL`` records which one is active; ``benchmarks/bench_kernels.py``
compares the two.
"""

try:
    from weylamp._kernels._core import IMPL, exp_sums, macdonald_grid
except ImportError:  # extension not built
    from weylamp._kernels._numpy import IMPL, exp_sums, macdonald_grid

__all__ = ["IMPL", "exp_sums", "macdonald_grid"]
