"""
Kernel Gram matrices.
"""

from typing import Optional

import numpy as np
from sklearn.metrics.pairwise import pairwise_kernels

from mcm_dynamics.exceptions import DimensionMismatchError
from mcm_dynamics.schemas.mcm import KernelKind, KernelSpec


def gram_matrix(A: np.ndarray, B: Optional[np.ndarray], kernel: KernelSpec) -> np.ndarray:
    """
    Pairwise kernel values K(a_i, b_j).

    Args:
        A: Matrix of row points
        B: Second set of row points, or None for the Gram matrix of ``A``
        kernel: Kernel specification

    Returns:
        Array of shape (len(A), len(B))
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if B is not None:
        B = np.atleast_2d(np.asarray(B, dtype=float))
        if B.shape[1] != A.shape[1]:
            raise DimensionMismatchError(
                f"Kernel inputs have {A.shape[1]} and {B.shape[1]} features"
            )

    if kernel.kind is KernelKind.RBF:
        return pairwise_kernels(A, B, metric="rbf", gamma=kernel.gamma)
    if kernel.kind is KernelKind.POLYNOMIAL:
        return pairwise_kernels(
            A, B, metric="polynomial", gamma=1.0, degree=kernel.degree, coef0=kernel.coef0
        )
    return pairwise_kernels(A, B, metric="linear")
