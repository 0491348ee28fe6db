"""Finite real vectors and the weighted inner products used on the domain space."""

from collections.abc import Iterable

import numpy as np

from common.errors import ConstructionError
from common.errors import DimensionMismatchError

Vector = np.ndarray


def as_vector(entries: Iterable[float] | np.ndarray, name: str = 'vector') -> Vector:
    """Validate entries as a finite, one-dimensional float64 vector

    Args:
        entries: Sequence or array of real scalars
        name: Label used in error messages

    Returns:
        A fresh float64 array
    """
    vec = np.array(entries, dtype=np.float64).reshape(-1)
    if vec.size == 0:
        raise ConstructionError(f"{name} must have positive dimension")
    if not np.all(np.isfinite(vec)):
        raise ConstructionError(f"{name} contains non-finite entries")
    return vec


def check_dim(vec: Vector, dim: int, name: str = 'vector') -> None:
    if vec.ndim != 1 or vec.shape[0] != dim:
        raise DimensionMismatchError(f"{name} has shape {vec.shape}, expected ({dim},)")


def inner(u: Vector, v: Vector, weights: Vector | None = None) -> float:
    if weights is None:
        return float(np.dot(u, v))
    return float(np.dot(weights * u, v))


def norm(u: Vector, weights: Vector | None = None) -> float:
    return float(np.sqrt(max(inner(u, u, weights), 0.0)))


def l1_norm(u: Vector, weights: Vector | None = None) -> float:
    if weights is None:
        return float(np.sum(np.abs(u)))
    return float(np.dot(weights, np.abs(u)))
