"""The Lorentzian metric of E_1^4 and vector operations built on it.

Vectors are plain ``numpy`` arrays whose last axis has length 4, ordered
``(x1, x2, x3, x4)`` with ``x1`` the timelike coordinate. All functions
broadcast over leading axes.
"""
from enum import Enum

import numpy as np

from .errors import NullVector

METRIC = np.diag([-1.0, 1.0, 1.0, 1.0])
SIGNS = np.array([-1.0, 1.0, 1.0, 1.0])

DEFAULT_NULL_TOL = 1e-6


class CausalCharacter(str, Enum):
    SPACELIKE = "spacelike"
    TIMELIKE = "timelike"
    NULL = "null"


def vec4(*components):
    """Build a finite 4-vector from four numbers or one sequence."""
    if len(components) == 1:
        components = components[0]
    v = np.asarray(components, dtype=float)
    if v.shape[-1:] != (4,):
        raise ValueError(f"expected 4 components, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector components must be finite")
    return v


def inner(u, v):
    """g(u, v) = -u1 v1 + u2 v2 + u3 v3 + u4 v4."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return np.sum(u * SIGNS * v, axis=-1)


def euclid_sq(v):
    v = np.asarray(v, dtype=float)
    return np.sum(v * v, axis=-1)


def euclid_norm(v):
    """Auxiliary Euclidean norm; used to measure smallness of residuals."""
    return np.sqrt(euclid_sq(v))


def pseudo_norm(v):
    return np.sqrt(np.abs(inner(v, v)))


def causal_character(v, null_tol=DEFAULT_NULL_TOL):
    """Classify a single vector.

    The null test is relative, ``|g(v,v)| <= null_tol * max(1, |v|_E^2)``, so
    the result does not depend on the scale of ``v`` once ``|v|_E >= 1``.
    The zero vector is spacelike by convention.
    """
    if null_tol < 0:
        raise ValueError("null_tol must be non-negative")
    v = np.asarray(v, dtype=float)
    q = float(inner(v, v))
    e = float(euclid_sq(v))
    if e == 0.0:
        return CausalCharacter.SPACELIKE
    threshold = null_tol * max(1.0, e)
    if abs(q) <= threshold:
        return CausalCharacter.NULL
    if q < -threshold:
        return CausalCharacter.TIMELIKE
    return CausalCharacter.SPACELIKE


def normalize(v, null_tol=DEFAULT_NULL_TOL):
    v = np.asarray(v, dtype=float)
    if causal_character(v, null_tol) is CausalCharacter.NULL or not np.any(v):
        raise NullVector(f"cannot normalize (near-)null vector {v.tolist()}")
    return v / pseudo_norm(v)


def gram_matrix(frame):
    """Gram matrix g(F_i, F_j) of a stack of vectors, shape (..., k, 4) -> (..., k, k)."""
    frame = np.asarray(frame, dtype=float)
    return np.einsum("...ia,a,...ja->...ij", frame, SIGNS, frame)
