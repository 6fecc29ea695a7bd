"""Classical multivariate methods as triple constructors.

Each method here builds the data matrix, variable metric and observation
weights appropriate to its question, hands them to the shared
eigendecomposition in :mod:`.linalg`, and packages the output as a
:class:`MethodResult` with row and column coordinates, a scree table and
method-specific extras.

Methods
-------
- :func:`pca`: weighted principal component analysis, optionally on
  standardized variables.
- :func:`ca` / :func:`chi_square`: correspondence analysis of a
  contingency table; total inertia times the grand total equals the
  chi-square statistic.
- :func:`lda`: linear discriminant analysis via the between/total
  covariance eigenproblem.
- :func:`pcaiv`: principal components with respect to instrumental
  variables (reduced-rank regression ordination).
- :func:`cca`: canonical correlation analysis of two variable blocks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.linalg import block_diag, cho_solve

from .linalg import (
    NotPositiveDefiniteError,
    Decomposition,
    make_triple,
    center_columns,
    decompose,
    decompose_gram_metric,
    _as_float_matrix,
    _cholesky_upper,
    _frozen,
    _symmetrize,
)
from .scree import ScreeTable

__all__ = [
    "ContingencyTable",
    "GroupCoding",
    "MethodResult",
    "pca",
    "ca",
    "chi_square",
    "lda",
    "pcaiv",
    "cca",
]


def _normalized_weights(weights, n: int) -> np.ndarray:
    """Row-weight vector summing to one; uniform 1/n when omitted."""
    if weights is None:
        return np.full(n, 1.0 / n)
    w = np.asarray(weights, dtype=float)
    if w.shape != (n,):
        raise ValueError(f"weights must be a vector of length {n}, got shape {w.shape}")
    if not np.all(np.isfinite(w)):
        raise ValueError("weights contain non-finite entries")
    if np.any(w <= 0):
        bad = int(np.flatnonzero(w <= 0)[0])
        raise ValueError(f"weights must be positive (entry {bad} is {w[bad]!r})")
    return w / np.sum(w)


class ContingencyTable:
    """Nonnegative count matrix with row and column labels.

    Rejects zero marginals outright: correspondence analysis needs every
    row and column to carry mass.  File ingestion (:func:`triptych.io.
    read_table` with kind ``"contingency"``) drops empty rows and columns
    with a warning before this constructor runs.
    """

    def __init__(self, counts, row_labels=None, col_labels=None):
        counts = _as_float_matrix(counts, "counts")
        m, p = counts.shape
        if m == 0 or p == 0:
            raise ValueError("contingency table must have at least one row and column")
        if np.any(counts < 0):
            i, j = np.argwhere(counts < 0)[0]
            raise ValueError(f"counts must be nonnegative (entry ({i}, {j}) is negative)")
        self.row_labels = _check_labels(row_labels, m, "row", "r")
        self.col_labels = _check_labels(col_labels, p, "column", "c")
        row_tot = counts.sum(axis=1)
        col_tot = counts.sum(axis=0)
        for i in np.flatnonzero(row_tot == 0):
            raise ValueError(
                f"row '{self.row_labels[i]}' has zero total; drop empty rows first"
            )
        for j in np.flatnonzero(col_tot == 0):
            raise ValueError(
                f"column '{self.col_labels[j]}' has zero total; drop empty columns first"
            )
        self.counts = _frozen(counts)
        self.total = float(counts.sum())

    @property
    def shape(self) -> tuple[int, int]:
        return self.counts.shape


def _check_labels(labels, count: int, what: str, prefix: str) -> tuple[str, ...]:
    if labels is None:
        return tuple(f"{prefix}{i + 1}" for i in range(count))
    labels = tuple(str(x) for x in labels)
    if len(labels) != count:
        raise ValueError(f"expected {count} {what} labels, got {len(labels)}")
    if len(set(labels)) != len(labels):
        dupes = sorted({x for x in labels if labels.count(x) > 1})
        raise ValueError(f"duplicate {what} labels: {dupes}")
    return labels


class GroupCoding:
    """Zero/one group membership matrix: one 1 per row, no empty group."""

    def __init__(self, indicator, group_labels=None):
        Y = _as_float_matrix(indicator, "indicator")
        n, g = Y.shape
        if not np.all(np.isin(Y, (0.0, 1.0))):
            i, j = np.argwhere(~np.isin(Y, (0.0, 1.0)))[0]
            raise ValueError(f"indicator entries must be 0 or 1 (entry ({i}, {j}) is not)")
        bad_rows = np.flatnonzero(Y.sum(axis=1) != 1)
        if bad_rows.size:
            raise ValueError(
                f"each row must have exactly one 1 (row {int(bad_rows[0])} does not)"
            )
        empty = np.flatnonzero(Y.sum(axis=0) == 0)
        self.group_labels = _check_labels(group_labels, g, "group", "g")
        if empty.size:
            raise ValueError(f"group '{self.group_labels[int(empty[0])]}' has no members")
        self.indicator = _frozen(Y)

    @classmethod
    def from_labels(cls, labels) -> "GroupCoding":
        """Build a coding from a sequence of group labels, in order of
        first appearance."""
        labels = [str(x) for x in labels]
        seen: list[str] = []
        for lab in labels:
            if lab not in seen:
                seen.append(lab)
        index = {lab: k for k, lab in enumerate(seen)}
        Y = np.zeros((len(labels), len(seen)))
        for i, lab in enumerate(labels):
            Y[i, index[lab]] = 1.0
        return cls(Y, group_labels=seen)

    @property
    def n_groups(self) -> int:
        return self.indicator.shape[1]


@dataclass(frozen=True)
class MethodResult:
    """Uniform output bundle for every method.

    Attributes
    ----------
    method : str
        Method tag ("pca", "ca", ...).
    decomposition : Decomposition
        The underlying eigendecomposition.
    scree : ScreeTable
        Eigenvalue / inertia% / cumulative% rows.
    row_coords : ndarray
        One row per observation (or table row), one column per axis.
    col_coords : ndarray
        One row per variable (or table column), one column per axis.
    extras : dict
        Method-specific payload; see each method's docstring.
    """

    method: str
    decomposition: Decomposition
    scree: ScreeTable
    row_coords: np.ndarray
    col_coords: np.ndarray
    extras: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.scree):
            pct_sum = sum(r.inertia_pct for r in self.scree)
            if abs(pct_sum - 100.0) > 0.01:
                raise ValueError(f"scree percentages sum to {pct_sum}, not 100")
            cums = [r.cumulative_pct for r in self.scree]
            if any(b < a - 1e-9 for a, b in zip(cums, cums[1:])):
                raise ValueError("scree cumulative percentages must be nondecreasing")


def pca(X, standardize: bool = False, weights=None, col_labels=None) -> MethodResult:
    """Weighted principal component analysis.

    Centers ``X`` with respect to the row weights, uses the identity
    variable metric (or the inverse variances under ``standardize``) and
    decomposes.  Row coordinates are the principal components, column
    coordinates the principal axes.

    Parameters
    ----------
    X : (n, p) array_like
        Data, n >= 2 observations in rows.
    standardize : bool
        Scale each variable to unit weighted variance via the metric
        ``diag(1/var_j)``.  Standardized full-rank data has inertia p.
    weights : (n,) array_like, optional
        Positive row weights; rescaled to sum to one.  Default uniform.
    col_labels : sequence of str, optional
        Used only to name an offending column in error messages.

    Extras: ``weights`` (normalized vector), ``standardized`` (bool),
    ``column_variances`` (weighted variances of the centered columns).
    """
    X = _as_float_matrix(X, "X")
    n, p = X.shape
    if n < 2:
        raise ValueError(f"pca needs at least 2 observations, got {n}")
    w = _normalized_weights(weights, n)
    D = np.diag(w)
    t = center_columns(make_triple(X, np.eye(p), D))
    Xc = t.data
    variances = np.einsum("ij,i,ij->j", Xc, w, Xc)
    if standardize:
        col_scale = np.maximum(np.max(np.abs(X), axis=0), 1.0)
        dead = np.flatnonzero(np.sqrt(variances) <= 1e-12 * col_scale)
        if dead.size:
            j = int(dead[0])
            name = col_labels[j] if col_labels is not None else f"column {j}"
            raise ValueError(f"cannot standardize: {name} has zero variance")
        t = make_triple(Xc, np.diag(1.0 / variances), D)
    d = decompose(t)
    return MethodResult(
        method="pca",
        decomposition=d,
        scree=ScreeTable.from_eigenvalues(d.eigenvalues),
        row_coords=d.principal_components,
        col_coords=d.principal_axes,
        extras={
            "weights": w,
            "standardized": bool(standardize),
            "column_variances": variances,
        },
    )


def chi_square(tbl: ContingencyTable) -> tuple[float, int]:
    """Chi-square departure from independence and its degrees of freedom.

    Returns ``sum((observed - expected)**2 / expected)`` over all cells,
    with expected counts from the product of the margins, and
    ``(m - 1) * (p - 1)``.
    """
    N = tbl.counts
    m, p = N.shape
    row_tot = N.sum(axis=1)
    col_tot = N.sum(axis=0)
    if np.any(row_tot == 0) or np.any(col_tot == 0):
        raise ValueError("chi_square requires positive marginals")
    expected = np.outer(row_tot, col_tot) / tbl.total
    stat = float(np.sum((N - expected) ** 2 / expected))
    return stat, (m - 1) * (p - 1)


def ca(tbl: ContingencyTable) -> MethodResult:
    """Correspondence analysis of a contingency table.

    Builds the triple whose data matrix holds the relative departures
    from independence (the doubly centered ratio of observed to expected
    proportions), with the column-mass metric and row-mass weights, and
    decomposes it.  The total inertia equals chi-square divided by the
    grand total; the rank is at most min(m, p) - 1.

    Row and column coordinates are both principal (the symmetric map):
    row coordinates are the principal components, column coordinates the
    principal axes, each with weighted sum of squares equal to the
    eigenvalue per axis.

    Extras: ``chi_square``, ``dof``, ``row_masses``, ``col_masses``.
    """
    F = tbl.counts / tbl.total
    r = F.sum(axis=1)
    c = F.sum(axis=0)
    X = F / np.outer(r, c) - 1.0
    t = make_triple(X, np.diag(c), np.diag(r))
    d = decompose(t)
    stat, dof = chi_square(tbl)
    return MethodResult(
        method="ca",
        decomposition=d,
        scree=ScreeTable.from_eigenvalues(d.eigenvalues),
        row_coords=d.principal_components,
        col_coords=d.principal_axes,
        extras={"chi_square": stat, "dof": dof, "row_masses": r, "col_masses": c},
    )


def _spd_inverse(M: np.ndarray, name: str, hint: str) -> np.ndarray:
    """Inverse of a symmetric positive-definite matrix via Cholesky,
    with a task-specific error when the matrix is singular."""
    try:
        factor = _cholesky_upper(M, name)
    except NotPositiveDefiniteError as exc:
        raise ValueError(
            f"{name} is singular or indefinite (pivot {exc.pivot}); {hint}"
        ) from exc
    inv = cho_solve((factor, False), np.eye(M.shape[0]))
    # an exactly singular matrix can slip through the factorization with a
    # roundoff-sized pivot; reject by checking the inverse actually inverts
    resid = np.max(np.abs(M @ inv - np.eye(M.shape[0])))
    if not np.isfinite(resid) or resid > 1e-6:
        raise ValueError(f"{name} is singular or badly conditioned; {hint}")
    return _symmetrize(inv, name)


def lda(X, groups: GroupCoding, weights=None) -> MethodResult:
    """Linear discriminant analysis.

    Centers ``X`` with the row weights, splits the total covariance T
    into between-group B plus within-group W (an identity this routine
    verifies), and decomposes the triple whose data matrix holds the
    group means, with the inverse total covariance as variable metric and
    the group masses as weights.  Eigenvalues are the discriminating
    ratios a'Ba / a'Ta in [0, 1].

    Row coordinates are the observation scores on the discriminant
    vectors (each scaled so a'Ta = 1); column coordinates are the
    principal axes of the group-means triple.

    Parameters
    ----------
    X : (n, p) array_like
    groups : GroupCoding or sequence of labels
        Membership of each observation; at least two groups.
    weights : (n,) array_like, optional
        Positive row weights, rescaled to sum to one.

    Extras: ``discriminant_vectors`` (p x q), ``discriminating_ratios``,
    ``group_means`` (g x p), ``group_scores`` (g x q), ``between``,
    ``within``, ``total`` (the three p x p covariance matrices),
    ``group_labels``, ``split_residual`` (max-norm of T - B - W).

    Raises
    ------
    ValueError
        If the total covariance is singular: reduce dimensionality
        (drop collinear columns or run pca first) before trying again.
    """
    if not isinstance(groups, GroupCoding):
        groups = GroupCoding.from_labels(groups)
    X = _as_float_matrix(X, "X")
    Y = groups.indicator
    n, p = X.shape
    if Y.shape[0] != n:
        raise ValueError(f"groups describe {Y.shape[0]} rows, data has {n}")
    g = Y.shape[1]
    if g < 2:
        raise ValueError("lda needs at least two groups")
    w = _normalized_weights(weights, n)
    D = np.diag(w)
    Xc = center_columns(make_triple(X, np.eye(p), D)).data
    T = _symmetrize(Xc.T @ D @ Xc, "T")
    Ti = _spd_inverse(
        T, "total covariance",
        "reduce dimensionality (drop collinear columns or run pca first)",
    )
    group_mass = _symmetrize(Y.T @ D @ Y, "group masses")
    means = np.linalg.solve(group_mass, Y.T @ D @ Xc)
    between = _symmetrize(means.T @ group_mass @ means, "B")
    resid_mat = Xc - Y @ means
    within = _symmetrize(resid_mat.T @ D @ resid_mat, "W")
    split_residual = float(np.max(np.abs(T - between - within)))
    if split_residual > 1e-8 * max(np.max(np.abs(T)), 1.0):
        raise np.linalg.LinAlgError(
            f"covariance split failed numerically (residual {split_residual:.3e})"
        )
    d = decompose(make_triple(means, Ti, group_mass))
    disc = Ti @ d.axis_basis
    return MethodResult(
        method="lda",
        decomposition=d,
        scree=ScreeTable.from_eigenvalues(d.eigenvalues),
        row_coords=Xc @ disc,
        col_coords=d.principal_axes,
        extras={
            "discriminant_vectors": disc,
            "discriminating_ratios": d.eigenvalues,
            "group_means": means,
            "group_scores": d.principal_components,
            "between": between,
            "within": within,
            "total": T,
            "group_labels": groups.group_labels,
            "split_residual": split_residual,
        },
    )


def pcaiv(X, Y, response_metric=None, weights=None, q: int | None = None) -> MethodResult:
    """Principal components with respect to instrumental variables.

    Explains the responses ``Y`` by the explanatory block ``X``: both are
    centered with the row weights, and ``X`` is analyzed under the
    instrumental metric

        R = inv(Sxx) @ Sxy @ Qy @ Syx @ inv(Sxx),

    where Sxx and Sxy are the weighted covariance blocks and ``Qy`` the
    metric on response space.  The triple (X, R, D) is decomposed; its
    axes are the directions of X-space best reproducing the response
    operator, and at rank ``q`` the fitted operator built from the
    leading axes is the best rank-q approximation.

    ``R`` is positive semidefinite, usually singular, so the
    decomposition runs through the semidefinite-metric path of
    :mod:`.linalg`.

    Parameters
    ----------
    X : (n, p) array_like
        Explanatory block; weighted covariance must be invertible.
    Y : (n, py) array_like
        Response block.
    response_metric : (py, py) array_like, optional
        Symmetric metric on response space (identity by default).
    weights : (n,) array_like, optional
        Positive row weights, rescaled to sum to one.
    q : int, optional
        Analysis rank; at most the attainable rank of the triple.

    Extras: ``instrumental_metric`` (R), ``constrained_metric`` (the
    rank-q metric M = R B B' R built from the leading axes, for which
    the fitted operator is the rank-q truncation), ``fitted_operator``
    (X R X' D), ``fitted_responses`` (projection of Y onto the column
    space of X), ``response_metric``.
    """
    X = _as_float_matrix(X, "X")
    Y = _as_float_matrix(Y, "Y")
    n, p = X.shape
    if Y.shape[0] != n:
        raise ValueError(f"X and Y must have equal row counts, got {n} and {Y.shape[0]}")
    if q is not None and q < 1:
        raise ValueError("q must be at least 1")
    w = _normalized_weights(weights, n)
    D = np.diag(w)
    Xc = center_columns(make_triple(X, np.eye(p), D)).data
    Yc = Y - w @ Y
    if response_metric is None:
        Qy = np.eye(Y.shape[1])
    else:
        Qy = _symmetrize(_as_float_matrix(response_metric, "response_metric"),
                         "response_metric")
        if Qy.shape != (Y.shape[1], Y.shape[1]):
            raise ValueError(
                f"response_metric must be {Y.shape[1]}x{Y.shape[1]}, got {Qy.shape}"
            )
    Sxx = _symmetrize(Xc.T @ D @ Xc, "Sxx")
    Sxxi = _spd_inverse(
        Sxx, "explanatory covariance",
        "reduce dimensionality (drop collinear columns or run pca first)",
    )
    Sxy = Xc.T @ D @ Yc
    R = _symmetrize(Sxxi @ Sxy @ Qy @ Sxy.T @ Sxxi, "R")
    d = decompose_gram_metric(Xc, R, D, rank_request=q)
    if q is not None and q > d.rank:
        raise ValueError(f"requested rank {q} exceeds the attainable rank {d.rank}")
    Zq = d.axis_basis
    constrained = _symmetrize(R @ Zq @ Zq.T @ R, "M")
    return MethodResult(
        method="pcaiv",
        decomposition=d,
        scree=ScreeTable.from_eigenvalues(d.eigenvalues),
        row_coords=d.principal_components,
        col_coords=d.principal_axes,
        extras={
            "instrumental_metric": R,
            "constrained_metric": constrained,
            "fitted_operator": Xc @ R @ Xc.T @ D,
            "fitted_responses": Xc @ (Sxxi @ Sxy),
            "response_metric": Qy,
        },
    )


def cca(X1, X2, weights=None) -> MethodResult:
    """Canonical correlation analysis of two variable blocks.

    Decomposes the merged triple: both blocks side by side, with the
    block-diagonal metric made of the two inverse within-block
    covariances.  Its eigenvalues come in pairs 1 +- rho around 1, one
    pair per canonical correlation rho, and that full decomposition is
    returned in the ``decomposition`` field.

    Reported eigenvalues (the scree) are the squared canonical
    correlations, obtained from the equivalent cross-block triple: the
    cross-covariance matrix analyzed in the two inverse-covariance
    metrics.  Its axis basis gives the block-1 canonical coefficients
    (through the block-1 inverse covariance) and its component basis the
    block-2 coefficients; each canonical variable has unit weighted
    variance, and paired canonical variables have weighted covariance
    rho.

    Row coordinates are the block-1 canonical scores; column coordinates
    stack the block-1 and block-2 coefficient matrices.

    Extras: ``canonical_correlations``, ``coefficients_1`` (p1 x q),
    ``coefficients_2`` (p2 x q), ``scores_1``, ``scores_2`` (n x q),
    ``cross_decomposition`` (the cross-block Decomposition).
    """
    X1 = _as_float_matrix(X1, "X1")
    X2 = _as_float_matrix(X2, "X2")
    n = X1.shape[0]
    if X2.shape[0] != n:
        raise ValueError(
            f"blocks must have equal row counts, got {n} and {X2.shape[0]}"
        )
    w = _normalized_weights(weights, n)
    D = np.diag(w)
    X1c = center_columns(make_triple(X1, np.eye(X1.shape[1]), D)).data
    X2c = center_columns(make_triple(X2, np.eye(X2.shape[1]), D)).data
    S11i = _spd_inverse(
        _symmetrize(X1c.T @ D @ X1c, "S11"), "block-1 covariance",
        "reduce dimensionality of the first block",
    )
    S22i = _spd_inverse(
        _symmetrize(X2c.T @ D @ X2c, "S22"), "block-2 covariance",
        "reduce dimensionality of the second block",
    )
    merged = decompose(
        make_triple(np.hstack([X1c, X2c]), block_diag(S11i, S22i), D)
    )
    cross = decompose(make_triple(X2c.T @ D @ X1c, S11i, S22i))
    rho = np.sqrt(cross.eigenvalues)
    coef1 = S11i @ cross.axis_basis
    coef2 = S22i @ cross.component_basis
    return MethodResult(
        method="cca",
        decomposition=merged,
        scree=ScreeTable.from_eigenvalues(cross.eigenvalues),
        row_coords=X1c @ coef1,
        col_coords=np.vstack([coef1, coef2]),
        extras={
            "canonical_correlations": rho,
            "coefficients_1": coef1,
            "coefficients_2": coef2,
            "scores_1": X1c @ coef1,
            "scores_2": X2c @ coef2,
            "cross_decomposition": cross,
        },
    )
