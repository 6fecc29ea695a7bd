"""Operator covariance and the RV coefficient.

Two analyses of the same observations can be compared through their
observation-space operators ``W @ D``.  The trace inner product
``covv(O1, O2) = trace(O1.T @ O2)`` makes the set of such operators a
Euclidean space; the RV coefficient is the cosine it induces.  For
operators built from single centered variables the RV coefficient reduces
to the squared Pearson correlation.

:func:`rv_max` gives the closed-form best RV attainable by any rank-q
approximation of a decomposition, reached by keeping the leading q
eigenvectors.
"""

from __future__ import annotations

import numpy as np

from .linalg import Triple, characterizing_operators

__all__ = ["OperatorPair", "covv", "rv", "rv_triples", "rv_max"]


class OperatorPair:
    """A pair of same-size square operators on a shared observation set.

    Thin validated container; the comparison functions also accept raw
    arrays.
    """

    def __init__(self, O1, O2):
        O1 = np.asarray(O1, dtype=float)
        O2 = np.asarray(O2, dtype=float)
        _check_pair(O1, O2)
        self.O1 = O1
        self.O2 = O2


def _check_pair(O1: np.ndarray, O2: np.ndarray) -> None:
    if O1.ndim != 2 or O1.shape[0] != O1.shape[1]:
        raise ValueError(f"operators must be square, got {O1.shape}")
    if O2.shape != O1.shape:
        raise ValueError(f"operator shapes differ: {O1.shape} vs {O2.shape}")


def covv(O1, O2) -> float:
    """Trace inner product ``trace(O1.T @ O2)`` of two square operators."""
    O1 = np.asarray(O1, dtype=float)
    O2 = np.asarray(O2, dtype=float)
    _check_pair(O1, O2)
    # trace(O1.T @ O2) is the entrywise sum, computed without the product.
    return float(np.sum(O1 * O2))


def rv(O1, O2) -> float:
    """Normalized trace inner product of two operators.

    Lies in [0, 1] when both operators are positive semidefinite; for
    general matrices the value can be negative and is returned as-is.

    Raises
    ------
    ValueError
        If either operator is identically zero (the ratio is undefined).
    """
    O1 = np.asarray(O1, dtype=float)
    O2 = np.asarray(O2, dtype=float)
    _check_pair(O1, O2)
    n11 = np.sum(O1 * O1)
    n22 = np.sum(O2 * O2)
    if n11 == 0.0 or n22 == 0.0:
        raise ValueError("rv is undefined for a zero operator")
    return float(np.sum(O1 * O2) / np.sqrt(n11 * n22))


def rv_triples(t1: Triple, t2: Triple) -> float:
    """RV coefficient between the observation-space operators of two triples.

    The triples must describe the same observations: equal row counts and
    identical weight matrices.  (Both trace formulas weight observation
    pairs through the common ``D``; comparing across different weightings
    is not meaningful.)
    """
    if t1.n_observations != t2.n_observations:
        raise ValueError(
            f"triples describe different observation counts: "
            f"{t1.n_observations} vs {t2.n_observations}"
        )
    if not np.array_equal(t1.weights, t2.weights):
        raise ValueError("triples must share the same observation weights")
    _, WD1 = characterizing_operators(t1)
    _, WD2 = characterizing_operators(t2)
    return rv(WD1, WD2)


def rv_max(eigenvalues, q: int) -> float:
    """Best RV attainable by a rank-``q`` approximation.

    For a decomposition with eigenvalues ``lam`` the optimum is
    ``sqrt(sum(lam[:q]**2) / sum(lam**2))``, attained by the operator
    built from the leading ``q`` eigenvectors scaled so their weighted
    cross-product reproduces the leading eigenvalue block.

    Parameters
    ----------
    eigenvalues : array_like
        Nonincreasing nonnegative spectrum.
    q : int
        Approximation rank, between 1 and ``len(eigenvalues)``.
    """
    lam = np.asarray(eigenvalues, dtype=float)
    if lam.ndim != 1:
        raise ValueError("eigenvalues must be a vector")
    if np.any(lam < 0):
        raise ValueError("eigenvalues must be nonnegative")
    if np.any(np.diff(lam) > 0):
        raise ValueError("eigenvalues must be nonincreasing")
    if not 1 <= q <= lam.shape[0]:
        raise ValueError(f"q must be in [1, {lam.shape[0]}], got {q}")
    total = np.sum(lam**2)
    if total == 0.0:
        raise ValueError("rv_max is undefined for an all-zero spectrum")
    return float(np.sqrt(np.sum(lam[:q] ** 2) / total))
