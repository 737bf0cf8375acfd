"""Permutation matrices conjugated by Haar orthogonal matrices.

Samplers, the statistics Tr(A M P M^T), an exact Weingarten moment oracle,
the limit laws N(0, 1-c), Z + fs and Z + sY, and a reproducible harness.
"""

from ._kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
