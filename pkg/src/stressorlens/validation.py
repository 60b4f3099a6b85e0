"""Small input-validation helpers shared by the estimators."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from sklearn.exceptions import NotFittedError

from .errors import ConfigError


def require(condition: bool, message: str) -> None:
    """Raise ConfigError unless the condition holds."""
    if not condition:
        raise ConfigError(message)


def check_fitted(estimator, *attributes: str) -> None:
    """Raise NotFittedError if any trailing-underscore attribute is missing."""
    missing = [a for a in attributes if not hasattr(estimator, a)]
    if missing:
        raise NotFittedError(
            f"{type(estimator).__name__} is not fitted; call fit() first "
            f"(missing {', '.join(missing)})"
        )


def as_dense_2d(X, name: str = "X") -> np.ndarray:
    """Coerce to a 2-D float64 ndarray, densifying sparse input."""
    if sp.issparse(X):
        X = X.toarray()
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    return arr


def check_nonnegative(X: np.ndarray, name: str = "X") -> np.ndarray:
    if np.any(X < 0):
        raise ValueError(f"{name} must be nonnegative")
    return X


def check_finite(X: np.ndarray, name: str = "X") -> np.ndarray:
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains NaN or infinite values")
    return X
