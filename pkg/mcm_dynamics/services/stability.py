"""
Gain selection from the spectrum of G^T G.

Eliminating the dual from the coupled system gives a second-order system with
mass k^2 G^T G - I; it is positive definite (and the equilibrium
asymptotically stable) once k^2 lambda_min(G^T G) > 1.
"""

from typing import Optional, Tuple
import logging

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve, eigvalsh

from mcm_dynamics.config import settings
from mcm_dynamics.exceptions import InvalidParameterError
from mcm_dynamics.schemas.dynamics import GainRecommendation, StabilityReport
from mcm_dynamics.schemas.lp import StandardFormLP

logger = logging.getLogger(__name__)

SINGULAR_RATIO = 1e-12
DEFAULT_K = 1.0


def _gram(lp: StandardFormLP) -> np.ndarray:
    return lp.constraint_matrix.T @ lp.constraint_matrix


def _rayleigh(matrix: np.ndarray, vector: np.ndarray) -> float:
    return float(vector @ matrix @ vector)


def power_extremes(
    matrix: np.ndarray,
    max_iterations: int = 10000,
    tol: float = 1e-14,
    seed: int = 0,
) -> Tuple[float, float]:
    """
    Extreme eigenvalues of a symmetric PSD matrix by iteration.

    The largest comes from power iteration; the smallest from inverse
    iteration on a Cholesky factor, or from power iteration on
    ``lambda_max I - matrix`` when the matrix is singular.

    Args:
        matrix: Symmetric positive semidefinite matrix
        max_iterations: Iteration cap per eigenvalue
        tol: Relative change in the Rayleigh quotient that stops iteration
        seed: Seed for the start vector

    Returns:
        (lambda_min, lambda_max)
    """
    size = matrix.shape[0]
    if size == 0:
        return 0.0, 0.0
    start = np.random.default_rng(seed).standard_normal(size)
    start /= np.linalg.norm(start)

    def iterate(apply, vector):
        value = _rayleigh(matrix, vector)
        for _ in range(max_iterations):
            image = apply(vector)
            norm = np.linalg.norm(image)
            if norm == 0.0:
                return 0.0
            vector = image / norm
            updated = _rayleigh(matrix, vector)
            if abs(updated - value) <= tol * max(abs(updated), 1e-300):
                return updated
            value = updated
        return value

    lambda_max = iterate(lambda v: matrix @ v, start.copy())
    if lambda_max == 0.0:
        return 0.0, 0.0
    try:
        factor = cho_factor(matrix)
        lambda_min = iterate(lambda v: cho_solve(factor, v), start.copy())
    except LinAlgError:
        shifted = lambda_max * np.eye(size) - matrix
        lambda_min = iterate(lambda v: shifted @ v, start.copy())
    return max(lambda_min, 0.0), lambda_max


def analyze_stability(lp: StandardFormLP, k: float, method: str = "eigh") -> StabilityReport:
    """
    Check the gain condition k^2 lambda_min(G^T G) > 1.

    Args:
        lp: The LP
        k: Coupling gain
        method: "eigh" (symmetric eigensolve) or "power" (iterative estimate)

    Returns:
        StabilityReport
    """
    if k <= 0:
        raise InvalidParameterError(f"k must be positive, got {k}")
    gram = _gram(lp)
    if method == "eigh":
        eigenvalues = eigvalsh(gram) if gram.size else np.zeros(1)
        lambda_min, lambda_max = max(float(eigenvalues[0]), 0.0), float(eigenvalues[-1])
    elif method == "power":
        lambda_min, lambda_max = power_extremes(gram)
    else:
        raise InvalidParameterError(f"Unknown eigenvalue method '{method}'")

    singular = lambda_min <= SINGULAR_RATIO * lambda_max or lambda_min == 0.0
    k_lower_bound = float("inf") if singular else 1.0 / np.sqrt(lambda_min)
    mass, _, _ = second_order_coefficients(lp, k)
    if method == "eigh" and mass.size:
        mass_lambda_min = float(eigvalsh(mass)[0])
    else:
        # the mass spectrum is k^2 times the Gram spectrum shifted by one
        mass_lambda_min = k * k * lambda_min - 1.0
    return StabilityReport(
        lambda_min=lambda_min,
        lambda_max=lambda_max,
        k=k,
        k_lower_bound=k_lower_bound,
        chosen_k_satisfies=not singular and k * k * lambda_min > 1.0,
        mass_lambda_min=mass_lambda_min,
        method=method,
    )


def recommend_k(lp: StandardFormLP, safety: Optional[float] = None) -> GainRecommendation:
    """
    Smallest gain meeting the stability condition, times ``safety``.

    Falls back to k = 1 with ``degenerate`` set when G^T G is numerically
    singular.
    """
    safety = settings.k_safety if safety is None else safety
    if safety < 1.0:
        raise InvalidParameterError(f"safety must be at least 1, got {safety}")
    report = analyze_stability(lp, DEFAULT_K)
    if report.lambda_min > SINGULAR_RATIO * report.lambda_max and report.lambda_min > 0.0:
        return GainRecommendation(
            k=safety / np.sqrt(report.lambda_min),
            degenerate=False,
            lambda_min=report.lambda_min,
            lambda_max=report.lambda_max,
        )
    logger.warning(
        f"G^T G is numerically singular (lambda_min={report.lambda_min:.3g}); using k={DEFAULT_K}"
    )
    return GainRecommendation(
        k=DEFAULT_K,
        degenerate=True,
        lambda_min=report.lambda_min,
        lambda_max=report.lambda_max,
    )


def second_order_coefficients(lp: StandardFormLP, k: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Mass, damping and stiffness matrices (k^2 G^T G - I, 2k G^T G, G^T G)."""
    gram = _gram(lp)
    return k * k * gram - np.eye(gram.shape[0]), 2.0 * k * gram, gram
