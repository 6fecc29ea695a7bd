"""Weighted data triples and their generalized eigendecomposition.

The central object is the :class:`Triple`: a data matrix ``X`` (n
observations by p variables) together with a symmetric positive-definite
variable metric ``Q`` (p by p) and observation weights ``D`` (n by n,
usually diagonal).  Every analysis in this package reduces to the
generalized eigendecomposition of such a triple, computed here by
:func:`decompose` through a Cholesky-plus-SVD factorization.

Two square operators characterize a triple: ``V @ Q`` acting on variable
space and ``W @ D`` acting on observation space, where ``V = X.T @ D @ X``
and ``W = X @ Q @ X.T``.  They share their nonzero eigenvalues, and the
eigenbases on the two sides are linked by exact transition identities
(``X @ Q @ Z`` equals the principal components, ``X.T @ D @ L`` equals the
principal axes), which :func:`transition_check` measures numerically.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular, svd
from scipy.linalg.lapack import dpotrf

__all__ = [
    "NotPositiveDefiniteError",
    "Triple",
    "Decomposition",
    "TransitionResiduals",
    "make_triple",
    "center_columns",
    "decompose",
    "decompose_gram_metric",
    "transition_check",
    "characterizing_operators",
]

# Relative threshold below which an eigenvalue does not count toward the rank.
ZERO_EIGENVALUE_RTOL = 1e-12
# Relative gap under which two consecutive eigenvalues are flagged as tied.
TIE_RTOL = 1e-9
# Largest relative asymmetry repaired by averaging; anything worse is rejected.
SYMMETRY_RTOL = 1e-8


class NotPositiveDefiniteError(ValueError):
    """A metric or weight matrix failed its Cholesky factorization.

    Attributes
    ----------
    pivot : int
        Zero-based index of the first non-positive pivot.
    """

    def __init__(self, name: str, pivot: int):
        self.pivot = pivot
        super().__init__(
            f"{name} is not positive definite (pivot {pivot} is not positive)"
        )


def _as_float_matrix(M, name: str) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise ValueError(f"{name} must be a 2-D matrix, got ndim={M.ndim}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} contains non-finite entries")
    return M


def _frozen(M: np.ndarray) -> np.ndarray:
    out = np.array(M, dtype=float, copy=True)
    out.setflags(write=False)
    return out


def _symmetrize(M: np.ndarray, name: str) -> np.ndarray:
    """Average ``M`` with its transpose; reject if visibly asymmetric."""
    scale = np.max(np.abs(M)) if M.size else 0.0
    skew = np.max(np.abs(M - M.T)) if M.size else 0.0
    if skew > SYMMETRY_RTOL * max(scale, np.finfo(float).tiny):
        raise ValueError(f"{name} is not symmetric (max |M - M.T| = {skew:.3e})")
    return (M + M.T) / 2.0


def _is_diagonal(M: np.ndarray) -> bool:
    return np.count_nonzero(M - np.diag(np.diagonal(M))) == 0


def _cholesky_upper(M: np.ndarray, name: str) -> np.ndarray:
    """Upper-triangular factor ``R`` with ``R.T @ R = M``.

    Diagonal matrices take a square-root fast path; dense ones go through
    LAPACK so the failing pivot can be reported.
    """
    if _is_diagonal(M):
        d = np.diagonal(M)
        bad = np.flatnonzero(d <= 0.0)
        if bad.size:
            raise NotPositiveDefiniteError(name, int(bad[0]))
        return np.diag(np.sqrt(d))
    factor, info = dpotrf(M, lower=0, clean=1, overwrite_a=0)
    if info > 0:
        raise NotPositiveDefiniteError(name, int(info) - 1)
    if info < 0:
        raise ValueError(f"Cholesky of {name} failed (bad argument {-info})")
    return factor


@dataclass(frozen=True)
class Triple:
    """A data matrix with its variable metric and observation weights.

    Parameters
    ----------
    data : (n, p) ndarray
        Observations in rows, variables in columns.
    metric : (p, p) ndarray
        Symmetric positive-definite inner product on variable space.
    weights : (n, n) ndarray
        Symmetric positive-definite inner product on observation space,
        usually diagonal.

    Instances are immutable: the stored arrays are read-only copies.
    Construct through :func:`make_triple`, which validates shapes,
    symmetry and definiteness.
    """

    data: np.ndarray
    metric: np.ndarray
    weights: np.ndarray

    @property
    def n_observations(self) -> int:
        return self.data.shape[0]

    @property
    def n_variables(self) -> int:
        return self.data.shape[1]


def make_triple(X, Q, D) -> Triple:
    """Validate and assemble a :class:`Triple`.

    Parameters
    ----------
    X : (n, p) array_like
        Data matrix.
    Q : (p, p) array_like
        Variable metric.  Symmetrized by averaging with its transpose when
        the asymmetry is within roundoff; rejected otherwise.
    D : (n, n) array_like
        Observation weights, same treatment as ``Q``.

    Returns
    -------
    Triple

    Raises
    ------
    ValueError
        On dimension mismatch or visible asymmetry.
    NotPositiveDefiniteError
        When ``Q`` or ``D`` has a non-positive pivot; the message carries
        the pivot index.
    """
    X = _as_float_matrix(X, "X")
    Q = _as_float_matrix(Q, "Q")
    D = _as_float_matrix(D, "D")
    n, p = X.shape
    if Q.shape != (p, p):
        raise ValueError(f"Q must be {p}x{p} to match X with {p} columns, got {Q.shape}")
    if D.shape != (n, n):
        raise ValueError(f"D must be {n}x{n} to match X with {n} rows, got {D.shape}")
    Q = _symmetrize(Q, "Q")
    D = _symmetrize(D, "D")
    # Definiteness is checked up front so errors surface at construction,
    # not deep inside a later factorization.
    _cholesky_upper(Q, "Q")
    _cholesky_upper(D, "D")
    return Triple(data=_frozen(X), metric=_frozen(Q), weights=_frozen(D))


def center_columns(t: Triple) -> Triple:
    """Remove the weighted column means from the data matrix.

    The returned triple satisfies ``X.T @ D @ 1 = 0`` exactly in exact
    arithmetic; metric and weights are unchanged.  Centering an
    already-centered triple is a no-op.
    """
    ones = np.ones(t.n_observations)
    total = ones @ t.weights @ ones
    means = (ones @ t.weights @ t.data) / total
    centered = t.data - means
    return Triple(data=_frozen(centered), metric=t.metric, weights=t.weights)


@dataclass(frozen=True)
class Decomposition:
    """Result of the generalized eigendecomposition of a triple.

    Attributes
    ----------
    eigenvalues : (r,) ndarray
        All positive eigenvalues, nonincreasing.  ``r`` is the rank: the
        count of eigenvalues above the zero threshold.
    rank : int
        Same as ``len(eigenvalues)``.
    n_axes : int
        Number of columns retained in the four basis matrices; equals the
        rank unless a smaller rank was requested.
    axis_basis : (p, n_axes) ndarray
        Metric-orthonormal basis of variable space:
        ``axis_basis.T @ Q @ axis_basis = I``.
    principal_axes : (p, n_axes) ndarray
        ``axis_basis`` rescaled by the singular values;
        ``principal_axes.T @ Q @ principal_axes = diag(eigenvalues)``.
    component_basis : (n, n_axes) ndarray
        Weight-orthonormal basis of observation space:
        ``component_basis.T @ D @ component_basis = I``.
    principal_components : (n, n_axes) ndarray
        ``component_basis`` rescaled by the singular values;
        ``principal_components.T @ D @ principal_components
        = diag(eigenvalues)``.
    inertia : float
        Trace of the characterizing operator: the sum of every
        eigenvalue, including any below the zero threshold.
    tie_flags : (r,) ndarray of bool
        True for eigenvalues whose relative gap to a neighbor is under
        the tie threshold.  Individual axes inside such a group are not
        stable even though their span is; downstream reporting should
        warn before an axis cut lands inside a flagged group.
    """

    eigenvalues: np.ndarray
    rank: int
    n_axes: int
    axis_basis: np.ndarray
    principal_axes: np.ndarray
    component_basis: np.ndarray
    principal_components: np.ndarray
    inertia: float
    tie_flags: np.ndarray = field(repr=False)

    @property
    def singular_values(self) -> np.ndarray:
        """Square roots of the retained eigenvalues, length ``n_axes``."""
        return np.sqrt(self.eigenvalues[: self.n_axes])


def _tie_flags(lam: np.ndarray) -> np.ndarray:
    flags = np.zeros(lam.shape[0], dtype=bool)
    if lam.shape[0] >= 2:
        gaps = (lam[:-1] - lam[1:]) / lam[:-1]
        close = gaps < TIE_RTOL
        flags[:-1] |= close
        flags[1:] |= close
    flags.setflags(write=False)
    return flags


def _orient_columns(primary: np.ndarray, *linked: np.ndarray) -> None:
    """Flip column signs in place so each primary column's largest-magnitude
    entry is positive; linked matrices get the same flips."""
    for j in range(primary.shape[1]):
        col = primary[:, j]
        i = int(np.argmax(np.abs(col)))
        if col[i] < 0:
            primary[:, j] = -col
            for other in linked:
                other[:, j] = -other[:, j]


def _build_decomposition(
    lam_all: np.ndarray,
    axis_basis: np.ndarray,
    component_basis: np.ndarray,
    rank_request: int | None,
) -> Decomposition:
    """Assemble a Decomposition from the full spectrum and orthonormal bases
    (already sign-oriented, columns sorted by decreasing eigenvalue)."""
    lam1 = lam_all[0] if lam_all.size else 0.0
    threshold = ZERO_EIGENVALUE_RTOL * max(lam1, 1.0)
    rank = int(np.count_nonzero(lam_all > threshold))
    eigenvalues = lam_all[:rank]
    n_axes = rank if rank_request is None else min(rank_request, rank)
    s = np.sqrt(eigenvalues[:n_axes])
    Z = axis_basis[:, :n_axes]
    L = component_basis[:, :n_axes]
    return Decomposition(
        eigenvalues=_frozen_vector(eigenvalues),
        rank=rank,
        n_axes=n_axes,
        axis_basis=_frozen(Z),
        principal_axes=_frozen(Z * s),
        component_basis=_frozen(L),
        principal_components=_frozen(L * s),
        inertia=float(np.sum(lam_all)),
        tie_flags=_tie_flags(eigenvalues),
    )


def _frozen_vector(v: np.ndarray) -> np.ndarray:
    out = np.array(v, dtype=float, copy=True)
    out.setflags(write=False)
    return out


def decompose(t: Triple, rank_request: int | None = None) -> Decomposition:
    """Generalized eigendecomposition of a triple.

    Factors the metric and weights as ``H.T @ H = Q`` and ``K.T @ K = D``,
    takes the singular value decomposition ``K @ X @ H.T = U @ S @ T.T``,
    and maps the factors back: the axis basis is ``inv(H) @ T``, the
    component basis ``inv(K) @ U``, and the eigenvalues are the squared
    singular values.  Column signs are fixed by orienting each column of
    the right singular factor so its largest-magnitude entry is positive,
    which makes the output deterministic.

    Parameters
    ----------
    t : Triple
    rank_request : int, optional
        Keep only the first ``rank_request`` columns of the basis
        matrices (a reduced-rank analysis).  Must not exceed
        ``min(n, p)``.  The eigenvalue vector, rank and inertia always
        describe the full spectrum.

    Returns
    -------
    Decomposition

    Raises
    ------
    ValueError
        If ``rank_request`` exceeds ``min(n, p)``.
    numpy.linalg.LinAlgError
        If the singular value decomposition fails to converge.
    """
    n, p = t.data.shape
    if rank_request is not None:
        if rank_request < 0:
            raise ValueError("rank_request must be nonnegative")
        if rank_request > min(n, p):
            raise ValueError(
                f"rank_request {rank_request} exceeds min(n, p) = {min(n, p)}"
            )
    H = _cholesky_upper(t.metric, "Q")
    K = _cholesky_upper(t.weights, "D")
    try:
        U, s, Tt = svd(K @ t.data @ H.T, full_matrices=False)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - scipy rarely fails
        raise np.linalg.LinAlgError(f"SVD did not converge: {exc}") from exc
    T = Tt.T.copy()
    U = U.copy()
    _orient_columns(T, U)
    if _is_diagonal(H):
        Z = T / np.diagonal(H)[:, None]
    else:
        Z = solve_triangular(H, T, lower=False)
    if _is_diagonal(K):
        L = U / np.diagonal(K)[:, None]
    else:
        L = solve_triangular(K, U, lower=False)
    return _build_decomposition(s**2, Z, L, rank_request)


def decompose_gram_metric(
    X: np.ndarray, metric: np.ndarray, weights: np.ndarray,
    rank_request: int | None = None,
) -> Decomposition:
    """Eigendecomposition of a triple whose metric may be rank-deficient.

    Used when the variable metric is a Gram-type product (as in
    instrumental-variable analyses) and therefore only positive
    semidefinite.  The metric is factored through its eigendecomposition
    instead of a Cholesky, the weight side is solved as in
    :func:`decompose`, and the axis basis is recovered through the
    transition identity ``axis_basis = X.T @ D @ component_basis / s``.
    Axes are confined to the range of the metric.  Signs are fixed by
    orienting the axis-basis columns.

    The strict :func:`make_triple` path intentionally rejects semidefinite
    metrics; this routine is the sanctioned detour for metrics that are
    semidefinite by construction rather than by data error.
    """
    X = _as_float_matrix(X, "X")
    metric = _symmetrize(_as_float_matrix(metric, "metric"), "metric")
    weights = _symmetrize(_as_float_matrix(weights, "weights"), "weights")
    n, p = X.shape
    if rank_request is not None and rank_request > min(n, p):
        raise ValueError(
            f"rank_request {rank_request} exceeds min(n, p) = {min(n, p)}"
        )
    w, E = np.linalg.eigh(metric)
    scale = max(w[-1], 0.0) if w.size else 0.0
    keep = w > ZERO_EIGENVALUE_RTOL * max(scale, 1.0)
    if np.any(w < -1e-8 * max(scale, 1.0)):
        raise ValueError("metric has a significantly negative eigenvalue")
    # G.T @ G reproduces the metric on its range; G has one row per
    # positive metric eigenvalue.
    G = (E[:, keep] * np.sqrt(w[keep])).T
    K = _cholesky_upper(weights, "D")
    U, s, _ = svd(K @ X @ G.T, full_matrices=False)
    if _is_diagonal(K):
        L = U / np.diagonal(K)[:, None]
    else:
        L = solve_triangular(K, U, lower=False)
    lam_all = s**2
    lam1 = lam_all[0] if lam_all.size else 0.0
    positive = s > np.sqrt(ZERO_EIGENVALUE_RTOL * max(lam1, 1.0))
    Z = np.zeros((p, s.shape[0]))
    XtDL = X.T @ weights @ L
    Z[:, positive] = XtDL[:, positive] / s[positive]
    _orient_columns(Z, L)
    return _build_decomposition(lam_all, Z, L, rank_request)


@dataclass(frozen=True)
class TransitionResiduals:
    """Max-norm residuals of the two transition identities."""

    components: float  # || X @ Q @ axis_basis - principal_components ||_max
    axes: float        # || X.T @ D @ component_basis - principal_axes ||_max


def transition_check(t: Triple, d: Decomposition) -> TransitionResiduals:
    """Measure how well the transition identities hold for ``d`` over its
    retained columns.  Both residuals are zero in exact arithmetic for a
    decomposition produced from ``t``."""
    via_axes = t.data @ t.metric @ d.axis_basis
    via_components = t.data.T @ t.weights @ d.component_basis
    res_c = via_axes - d.principal_components
    res_a = via_components - d.principal_axes
    return TransitionResiduals(
        components=float(np.max(np.abs(res_c))) if res_c.size else 0.0,
        axes=float(np.max(np.abs(res_a))) if res_a.size else 0.0,
    )


def characterizing_operators(t: Triple) -> tuple[np.ndarray, np.ndarray]:
    """The two square operators of a triple.

    Returns
    -------
    (p, p) ndarray
        ``X.T @ D @ X @ Q``, acting on variable space.
    (n, n) ndarray
        ``X @ Q @ X.T @ D``, acting on observation space.

    The two share their nonzero eigenvalues.
    """
    X, Q, D = t.data, t.metric, t.weights
    V = X.T @ D @ X
    W = X @ Q @ X.T
    return V @ Q, W @ D
