"""
Operator, density-matrix and time-grid validation functions.
"""

from typing import List, Tuple

import numpy as np

from config import (
    EIGENVALUE_TOL,
    HERMITICITY_TOL,
    STATE_HERMITICITY_TOL,
    TRACE_TOL,
)


class ValidationError(ValueError):
    """Custom exception for operator and state validation errors."""
    pass


def max_abs(matrix: np.ndarray) -> float:
    """Max-norm of a matrix (0.0 for empty input)."""
    return float(np.max(np.abs(matrix))) if matrix.size else 0.0


def hermiticity_deviation(matrix: np.ndarray) -> float:
    """Return ||M - M^dag||_max."""
    return max_abs(matrix - matrix.conj().T)


def validate_square(matrix: np.ndarray, name: str = "matrix") -> bool:
    """
    Validate that an array is a square 2-D matrix.

    Raises:
        ValidationError: If the array is not square
    """
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValidationError(f"{name} must be square, got shape {matrix.shape}")
    return True


def validate_hermitian(
    matrix: np.ndarray,
    tol: float = HERMITICITY_TOL,
    relative: bool = True,
    name: str = "operator"
) -> bool:
    """
    Validate Hermiticity of a matrix.

    Args:
        matrix: Square complex matrix
        tol: Allowed deviation
        relative: Scale the tolerance by ||M||_max (Hamiltonian rule)
        name: Name used in the error message

    Returns:
        True if valid

    Raises:
        ValidationError: If the deviation exceeds the tolerance
    """
    validate_square(matrix, name)
    deviation = hermiticity_deviation(matrix)
    bound = tol * max_abs(matrix) if relative else tol
    if deviation > bound:
        raise ValidationError(
            f"{name} is not Hermitian: ||M - M^dag||_max = {deviation:.3e} > {bound:.3e}"
        )
    return True


def state_diagnostics(matrix: np.ndarray) -> Tuple[float, float, float]:
    """
    Compute the quantities checked on a density matrix.

    Returns:
        Tuple (trace_deviation, min_eigenvalue, hermiticity_deviation)
    """
    hermitian_part = 0.5 * (matrix + matrix.conj().T)
    trace_deviation = abs(np.trace(matrix) - 1.0)
    min_eigenvalue = float(np.linalg.eigvalsh(hermitian_part)[0])
    return float(trace_deviation), min_eigenvalue, hermiticity_deviation(matrix)


def validate_density_matrix(
    matrix: np.ndarray,
    hermiticity_tol: float = STATE_HERMITICITY_TOL,
    trace_tol: float = TRACE_TOL,
    eigenvalue_tol: float = EIGENVALUE_TOL,
    name: str = "density matrix"
) -> bool:
    """
    Validate a density matrix: Hermitian, unit trace and positive semidefinite.

    Args:
        matrix: Square complex matrix
        hermiticity_tol: Absolute Hermiticity tolerance
        trace_tol: Allowed |tr(rho) - 1|
        eigenvalue_tol: Smallest admissible eigenvalue (negative number)
        name: Name used in the error message

    Returns:
        True if valid

    Raises:
        ValidationError: If any check fails
    """
    validate_square(matrix, name)
    trace_deviation, min_eigenvalue, herm_deviation = state_diagnostics(matrix)

    if herm_deviation > hermiticity_tol:
        raise ValidationError(
            f"{name} is not Hermitian: deviation {herm_deviation:.3e} > {hermiticity_tol:.1e}"
        )

    if trace_deviation > trace_tol:
        raise ValidationError(
            f"{name} trace deviates from 1 by {trace_deviation:.3e} (tolerance {trace_tol:.1e})"
        )

    if min_eigenvalue < eigenvalue_tol:
        raise ValidationError(
            f"{name} has negative eigenvalue {min_eigenvalue:.3e} (floor {eigenvalue_tol:.1e})"
        )

    return True


def validate_uniform_grid(times: np.ndarray, rtol: float = 1e-6) -> List[str]:
    """
    Validate that sample instants are increasing and uniformly spaced.

    Args:
        times: Sample instants
        rtol: Allowed relative spread of the spacing

    Returns:
        List of warning messages (empty if all valid)
    """
    warnings = []
    times = np.asarray(times, dtype=float)

    if times.size < 2:
        return warnings

    steps = np.diff(times)
    if np.any(steps <= 0):
        first = int(np.argmax(steps <= 0)) + 1
        warnings.append(f"Sample instants not increasing at index {first}")
        return warnings

    spacing = steps.mean()
    worst = int(np.argmax(np.abs(steps - spacing)))
    if abs(steps[worst] - spacing) > rtol * spacing:
        warnings.append(
            f"Non-uniform spacing at index {worst + 1}: expected {spacing:.6g}, "
            f"got {steps[worst]:.6g}"
        )

    return warnings
