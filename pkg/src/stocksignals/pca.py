"""PCA feature ranking: eigendecomposition, contributions, weighted scores.

A feature makes a valid contribution to a principal component when the
absolute value of its loading is at least the threshold (default 0.1).
Contributions to the first n components (default 6) earn descending points
(default 6 down to 1); the per-feature point total is its weighted
occurrence and drives top-k selection.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from stocksignals.errors import (
    KTooLarge,
    NoConvergence,
    NotSymmetric,
    NumericError,
    TooFewRows,
    UsageError,
    ZeroTotalVariance,
)
from stocksignals.transform import FEATURE_COLUMNS, standardize_apply, standardize_fit

logger = logging.getLogger(__name__)

DEFAULT_WEIGHTS: tuple[int, ...] = (6, 5, 4, 3, 2, 1)


@dataclass(frozen=True)
class RankConfig:
    n_components: int = 6
    contribution_threshold: float = 0.1
    weights: tuple[int, ...] = DEFAULT_WEIGHTS
    top_k: int = 6

    def __post_init__(self):
        if self.n_components < 1:
            raise UsageError("n_components must be >= 1")
        if not 0.0 < self.contribution_threshold <= 1.0:
            raise UsageError("contribution_threshold must be in (0, 1]")
        if len(self.weights) != self.n_components:
            raise UsageError("need one weight per component")
        if any(w <= 0 for w in self.weights):
            raise UsageError("weights must be positive")
        for earlier, later in zip(self.weights, self.weights[1:]):
            if later >= earlier:
                raise UsageError("weights must be strictly decreasing")
        if self.top_k < 1:
            raise UsageError("top_k must be >= 1")


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues sorted descending with aligned orthonormal column vectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # column j pairs with eigenvalues[j]

    @property
    def dimension(self) -> int:
        return len(self.eigenvalues)


@dataclass(frozen=True)
class FeatureScore:
    feature: str
    occurrences: int
    weighted_occurrence: int


@dataclass(frozen=True)
class PcaRanking:
    feature_names: tuple[str, ...]          # canonical order, all features
    used_features: tuple[str, ...]          # non-constant features fed to PCA
    explained_ratios: tuple[float, ...]
    cumulative_ratios: tuple[float, ...]
    loadings: tuple[tuple[float, ...], ...]  # used_features x n_components
    scores: tuple[FeatureScore, ...]         # sorted by rank
    selected: tuple[str, ...]
    padded: bool


def covariance_matrix(X) -> np.ndarray:
    """Sample covariance (n-1 denominator) of standardized columns."""
    X_arr = np.asarray(X, dtype=float)
    n = len(X_arr)
    if n < 2:
        raise TooFewRows(f"need at least 2 rows for covariance, got {n}")
    centered = X_arr - X_arr.mean(axis=0)
    return centered.T @ centered / (n - 1)


def jacobi_eigen(A, tol: float = 1e-12, max_sweeps: int = 100) -> EigenDecomposition:
    """Cyclic Jacobi eigendecomposition of a symmetric matrix.

    Sweeps rotate every (p, q) pivot in row order until the largest
    off-diagonal magnitude falls below tol. Eigenpairs come back sorted by
    descending eigenvalue, and each vector's first entry of meaningful size
    is made positive so reports are reproducible despite sign ambiguity.
    """
    work = np.array(A, dtype=float)
    if work.ndim != 2 or work.shape[0] != work.shape[1]:
        raise NotSymmetric("matrix must be square")
    if np.abs(work - work.T).max(initial=0.0) > 1e-12:
        raise NotSymmetric("matrix is not symmetric within 1e-12")
    d = work.shape[0]
    vectors = np.eye(d)
    if d > 1:
        converged = False
        for _ in range(max_sweeps):
            off = np.abs(work - np.diag(np.diag(work))).max()
            if off < tol:
                converged = True
                break
            for p in range(d - 1):
                for q in range(p + 1, d):
                    apq = work[p, q]
                    if abs(apq) < tol / (d * d):
                        continue
                    theta = (work[q, q] - work[p, p]) / (2.0 * apq)
                    t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                    c = 1.0 / np.sqrt(t * t + 1.0)
                    s = t * c
                    row_p = work[p, :].copy()
                    row_q = work[q, :].copy()
                    work[p, :] = c * row_p - s * row_q
                    work[q, :] = s * row_p + c * row_q
                    col_p = work[:, p].copy()
                    col_q = work[:, q].copy()
                    work[:, p] = c * col_p - s * col_q
                    work[:, q] = s * col_p + c * col_q
                    work[p, q] = 0.0
                    work[q, p] = 0.0
                    vec_p = vectors[:, p].copy()
                    vec_q = vectors[:, q].copy()
                    vectors[:, p] = c * vec_p - s * vec_q
                    vectors[:, q] = s * vec_p + c * vec_q
        else:
            converged = np.abs(work - np.diag(np.diag(work))).max() < tol
        if not converged:
            raise NoConvergence(
                f"off-diagonal mass above {tol} after {max_sweeps} sweeps"
            )
    eigenvalues = np.diag(work).copy()
    order = np.argsort(-eigenvalues, kind="stable")
    eigenvalues = eigenvalues[order]
    vectors = vectors[:, order]
    for j in range(d):
        column = vectors[:, j]
        nonzero = np.nonzero(np.abs(column) > 1e-12)[0]
        if nonzero.size and column[nonzero[0]] < 0:
            vectors[:, j] = -column
    return EigenDecomposition(eigenvalues=eigenvalues, eigenvectors=vectors)


def explained_variance(
    eigenvalues: Sequence[float],
) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """Per-component variance ratios and their running sum."""
    values = np.asarray(eigenvalues, dtype=float)
    if values.size == 0:
        raise ZeroTotalVariance("no eigenvalues")
    if values.min() < -1e-9:
        raise NumericError(f"eigenvalue {values.min()} is too negative to clamp")
    values = np.clip(values, 0.0, None)
    total = float(values.sum())
    if total == 0.0:
        raise ZeroTotalVariance("eigenvalues sum to zero")
    ratios = [float(v / total) for v in values]
    cumulative = []
    running = 0.0
    for r in ratios:
        running += r
        cumulative.append(running)
    return tuple(ratios), tuple(cumulative)


def valid_contributions(loadings, cfg: RankConfig = RankConfig()) -> list[frozenset[int]]:
    """Per feature, the set of components (1-based) where |loading| >= threshold."""
    matrix = np.asarray(loadings, dtype=float)
    out = []
    for row in matrix:
        out.append(
            frozenset(
                j + 1
                for j in range(min(cfg.n_components, len(row)))
                if abs(row[j]) >= cfg.contribution_threshold
            )
        )
    return out


def weighted_occurrences(
    contributions: Sequence[frozenset[int]],
    feature_names: Sequence[str],
    cfg: RankConfig = RankConfig(),
) -> list[FeatureScore]:
    """Count contributions and sum component points (PC-1 earns the most)."""
    scores = []
    for name, contributed in zip(feature_names, contributions):
        scores.append(
            FeatureScore(
                feature=name,
                occurrences=len(contributed),
                weighted_occurrence=sum(cfg.weights[j - 1] for j in contributed),
            )
        )
    return scores


def select_top_features(
    scores: Sequence[FeatureScore],
    top_k: int,
    canonical_order: Sequence[str] = FEATURE_COLUMNS,
) -> tuple[list[str], bool]:
    """Top-k feature names by weighted occurrence.

    Ties break by occurrences, then canonical feature order. When fewer
    than top_k features scored above zero the tail is canonical-order
    padding and the returned flag is set.
    """
    if top_k > len(scores):
        raise KTooLarge(f"top_k={top_k} but only {len(scores)} features")
    position = {name: i for i, name in enumerate(canonical_order)}
    ranked = sorted(
        scores,
        key=lambda s: (
            -s.weighted_occurrence,
            -s.occurrences,
            position.get(s.feature, len(position)),
        ),
    )
    selected = ranked[:top_k]
    padded = sum(1 for s in scores if s.weighted_occurrence > 0) < top_k
    return [s.feature for s in selected], padded


def rank_features(
    X_train,
    feature_names: Sequence[str] = FEATURE_COLUMNS,
    cfg: RankConfig = RankConfig(),
) -> PcaRanking:
    """Full ranking pipeline on raw training features.

    Standardizes with a scaler fitted on these rows only, excludes constant
    features from the PCA input (they are reported unranked with score 0),
    and ranks the rest by weighted occurrence over the top components.
    """
    X_arr = np.asarray(X_train, dtype=float)
    if X_arr.ndim != 2:
        raise TooFewRows("need a 2-D matrix of training rows")
    names = tuple(feature_names)
    if X_arr.shape[1] != len(names):
        raise UsageError(
            f"{X_arr.shape[1]} columns but {len(names)} feature names"
        )
    scaler = standardize_fit(X_arr.tolist())
    usable = [i for i, s in enumerate(scaler.stds) if s > 0.0]
    if not usable:
        raise ZeroTotalVariance("every feature is constant")
    if len(usable) < len(names):
        constant = [names[i] for i in range(len(names)) if i not in usable]
        logger.warning("excluding constant features from PCA: %s", constant)
    standardized = np.asarray(
        standardize_apply(scaler, X_arr.tolist()), dtype=float
    )[:, usable]
    covariance = covariance_matrix(standardized)
    eigen = jacobi_eigen(covariance)
    ratios, cumulative = explained_variance(eigen.eigenvalues)
    n_components = min(cfg.n_components, eigen.dimension)
    loadings = eigen.eigenvectors[:, :n_components]
    used_names = tuple(names[i] for i in usable)
    contributions = valid_contributions(loadings, cfg)
    scored = {
        s.feature: s
        for s in weighted_occurrences(contributions, used_names, cfg)
    }
    all_scores = [
        scored.get(name, FeatureScore(feature=name, occurrences=0, weighted_occurrence=0))
        for name in names
    ]
    position = {name: i for i, name in enumerate(names)}
    ordered = sorted(
        all_scores,
        key=lambda s: (-s.weighted_occurrence, -s.occurrences, position[s.feature]),
    )
    selected, padded = select_top_features(all_scores, cfg.top_k, names)
    return PcaRanking(
        feature_names=names,
        used_features=used_names,
        explained_ratios=ratios,
        cumulative_ratios=cumulative,
        loadings=tuple(tuple(float(x) for x in row) for row in loadings),
        scores=tuple(ordered),
        selected=tuple(selected),
        padded=padded,
    )
