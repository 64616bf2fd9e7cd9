"""Game-phase discovery: k-means over per-frame pairwise-distance vectors.

Clusters are numbered 1..k by decreasing size. The number of clusters is
picked from the curve of between-deviance / total-deviance against k.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .errors import InputError, Misaligned, RosterMismatch, TooManyClusters
from .geometry import pairwise_distances
from .ingest import Frame
from .segmentation import Label, PlayLabel


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    rows: np.ndarray
    columns: tuple[tuple[str, str], ...]
    t_ms: np.ndarray

    def __len__(self):
        return self.rows.shape[0]


@dataclass(eq=False)
class PhaseModel:
    k: int
    centroids: np.ndarray
    assignments: np.ndarray
    bd_td: float
    iterations: int
    seed: int
    within: float
    between: float
    total: float
    objective_history: list[float] = field(default_factory=list)
    t_ms: np.ndarray | None = None
    columns: tuple[tuple[str, str], ...] = ()

    def sizes(self) -> np.ndarray:
        return np.bincount(self.assignments, minlength=self.k + 1)[1:]

    def to_dict(self) -> dict:
        t = self.t_ms if self.t_ms is not None else np.arange(len(self.assignments))
        return {
            "k": int(self.k),
            "seed": int(self.seed),
            "bd_td": float(self.bd_td),
            "iterations": int(self.iterations),
            "deviance": {"within": float(self.within), "between": float(self.between), "total": float(self.total)},
            "columns": [f"{a}-{b}" for a, b in self.columns],
            "centroids": [[float(v) for v in row] for row in self.centroids],
            "assignments": [{"t_ms": int(ti), "cluster": int(c)} for ti, c in zip(t, self.assignments)],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PhaseModel":
        assignments = data["assignments"]
        columns = tuple(tuple(c.split("-", 1)) for c in data.get("columns", []))
        dev = data.get("deviance", {})
        return cls(
            k=int(data["k"]),
            centroids=np.array(data["centroids"], dtype=float),
            assignments=np.array([a["cluster"] for a in assignments], dtype=int),
            bd_td=float(data["bd_td"]),
            iterations=int(data.get("iterations", 0)),
            seed=int(data["seed"]),
            within=float(dev.get("within", 0.0)),
            between=float(dev.get("between", 0.0)),
            total=float(dev.get("total", 0.0)),
            t_ms=np.array([a["t_ms"] for a in assignments], dtype=np.int64),
            columns=columns,
        )

    def to_json(self, layouts=None) -> str:
        data = self.to_dict()
        if layouts is not None:
            data["layouts"] = [lay.to_dict() for lay in layouts]
        return json.dumps(data, indent=2, sort_keys=False) + "\n"


@dataclass(frozen=True)
class CrosstabRow:
    cluster: int
    n_frames: int
    share_of_total: float
    offense_pct: float
    defense_pct: float


@dataclass(frozen=True)
class PhaseCrosstab:
    rows: tuple[CrosstabRow, ...]

    def __len__(self):
        return len(self.rows)

    def shares(self) -> dict[int, float]:
        return {r.cluster: r.share_of_total for r in self.rows}


def build_features(frames: Sequence[Frame]) -> FeatureMatrix:
    """One row per frame holding its pairwise distances in canonical pair order (unscaled meters)."""
    if len(frames) == 0:
        return FeatureMatrix(np.zeros((0, 0)), (), np.zeros(0, dtype=np.int64))
    tags = frames[0].tags
    columns = tuple(combinations(tags, 2))
    rows = np.empty((len(frames), len(columns)))
    for i, f in enumerate(frames):
        if f.tags != tags:
            raise RosterMismatch(f"frame t={f.t_ms} roster {f.tags} differs from {tags}")
        rows[i] = pairwise_distances(f).distances
    return FeatureMatrix(rows, columns, np.array([f.t_ms for f in frames], dtype=np.int64))


def _as_matrix(features) -> tuple[np.ndarray, FeatureMatrix | None]:
    if isinstance(features, FeatureMatrix):
        return np.asarray(features.rows, dtype=float), features
    X = np.asarray(features, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    return X, None


def deviances(X: np.ndarray, labels: np.ndarray, centroids: np.ndarray) -> tuple[float, float, float]:
    """(within, between, total) sums of squares; ``labels`` index ``centroids`` from 0."""
    grand = X.mean(axis=0)
    total = float(((X - grand) ** 2).sum())
    within = float(((X - centroids[labels]) ** 2).sum())
    counts = np.bincount(labels, minlength=len(centroids))
    between = float((counts * ((centroids - grand) ** 2).sum(axis=1)).sum())
    return within, between, total


def _sq_dists(X: np.ndarray, C: np.ndarray, xx: np.ndarray | None = None) -> np.ndarray:
    # |x|^2 - 2 x.c + |c|^2 avoids the (n, k, d) temporary
    if xx is None:
        xx = np.einsum("ij,ij->i", X, X)
    d2 = xx[:, None] - 2.0 * (X @ C.T) + np.einsum("ij,ij->i", C, C)[None, :]
    return np.maximum(d2, 0.0)


def kmeans_plusplus(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = X.shape[0]
    centers = [X[rng.integers(n)]]
    d2 = ((X - centers[0]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total > 0:
            idx = int(rng.choice(n, p=d2 / total))
        else:
            idx = int(rng.integers(n))
        centers.append(X[idx])
        d2 = np.minimum(d2, ((X - X[idx]) ** 2).sum(axis=1))
    return np.array(centers, dtype=float)


def lloyd(X: np.ndarray, centroids: np.ndarray, max_iter: int = 300):
    """Lloyd iterations from the given centroids.

    Returns ``(labels, centroids, n_iter, history)`` where ``history`` is the
    within-cluster deviance after every centroid update. An emptied cluster is
    re-seeded with the point farthest from its current centroid.
    """
    k = len(centroids)
    C = centroids.copy()
    labels = None
    history = []
    n_iter = 0
    xx = np.einsum("ij,ij->i", X, X)
    for n_iter in range(1, max_iter + 1):
        d2 = _sq_dists(X, C, xx)
        new = np.argmin(d2, axis=1)
        counts = np.bincount(new, minlength=k)
        for j in np.flatnonzero(counts == 0):
            own = d2[np.arange(len(X)), new]
            donors = counts[new] > 1
            if not donors.any():
                break
            far = int(np.argmax(np.where(donors, own, -1.0)))
            counts[new[far]] -= 1
            new[far] = j
            counts[j] = 1
            C[j] = X[far]
        converged = labels is not None and np.array_equal(new, labels)
        labels = new
        for j in range(k):
            members = labels == j
            if members.any():
                C[j] = X[members].mean(axis=0)
        history.append(float(((X - C[labels]) ** 2).sum()))
        if converged:
            break
    return labels, C, n_iter, history


def _relabel_by_size(labels: np.ndarray, C: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    k = len(C)
    counts = np.bincount(labels, minlength=k)
    first_seen = np.array([np.flatnonzero(labels == j)[0] if counts[j] else len(labels) for j in range(k)])
    order = sorted(range(k), key=lambda j: (-counts[j], first_seen[j]))
    remap = np.empty(k, dtype=int)
    remap[order] = np.arange(k)
    return remap[labels], C[order]


def kmeans(features, k: int, seed: int = 0, max_iter: int = 300, n_restarts: int = 10) -> PhaseModel:
    """Best-of-``n_restarts`` Lloyd k-means from k-means++ seeds, deterministic in ``seed``."""
    X, fm = _as_matrix(features)
    n = X.shape[0]
    if k < 1:
        raise InputError("k must be >= 1")
    if k > n:
        raise TooManyClusters(k, n)
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(max(1, n_restarts)):
        init = kmeans_plusplus(X, k, rng)
        labels, C, n_iter, history = lloyd(X, init, max_iter)
        if best is None or history[-1] < best[3][-1]:
            best = (labels, C, n_iter, history)
    labels, C, n_iter, history = best
    labels, C = _relabel_by_size(labels, C)
    within, between, total = deviances(X, labels, C)
    ratio = between / total if total > 0 else 0.0
    return PhaseModel(
        k=k,
        centroids=C,
        assignments=labels + 1,
        bd_td=min(max(ratio, 0.0), 1.0),
        iterations=n_iter,
        seed=seed,
        within=within,
        between=between,
        total=total,
        objective_history=history,
        t_ms=None if fm is None else fm.t_ms.copy(),
        columns=() if fm is None else fm.columns,
    )


def bd_td_curve(features, k_range: Iterable[int] = range(1, 13), seed: int = 0, **kwargs) -> list[tuple[int, float]]:
    X, _ = _as_matrix(features)
    ks = sorted(set(int(k) for k in k_range))
    if ks and (ks[0] < 1 or ks[-1] > X.shape[0]):
        raise TooManyClusters(ks[-1], X.shape[0]) if ks[-1] > X.shape[0] else InputError("k must be >= 1")
    return [(k, kmeans(X, k, seed=seed, **kwargs).bd_td) for k in ks]


def select_k(curve: Sequence[tuple[int, float]], min_gain: float = 0.05) -> int:
    """Smallest k whose step to the next k gains less than ``min_gain``; the last k otherwise."""
    if not curve:
        raise InputError("empty BD/TD curve")
    for (k, r), (_, r_next) in zip(curve, curve[1:]):
        if r_next - r < min_gain:
            return int(k)
    return int(curve[-1][0])


def crosstab(model: PhaseModel, labels: Sequence[PlayLabel]) -> PhaseCrosstab:
    if len(labels) != len(model.assignments):
        raise Misaligned(f"{len(model.assignments)} assignments vs {len(labels)} labels")
    if model.t_ms is not None:
        for t, lab in zip(model.t_ms, labels):
            if int(t) != lab.t_ms:
                raise Misaligned(f"assignment t={int(t)} paired with label t={lab.t_ms}")
    n = len(labels)
    rows = []
    for c in range(1, model.k + 1):
        idx = np.flatnonzero(model.assignments == c)
        n_c = len(idx)
        n_off = sum(1 for i in idx if labels[i].label is Label.OFFENSE)
        off = 100.0 * n_off / n_c if n_c else 0.0
        rows.append(
            CrosstabRow(
                cluster=c,
                n_frames=n_c,
                share_of_total=100.0 * n_c / n if n else 0.0,
                offense_pct=off,
                defense_pct=100.0 - off if n_c else 0.0,
            )
        )
    return PhaseCrosstab(tuple(rows))


class PhaseKMeans(ClusterMixin, BaseEstimator):
    """scikit-learn style front end to :func:`kmeans`.

    ``labels_`` holds cluster ids 1..k (largest cluster first); ``predict``
    returns ids on the same scale.
    """

    def __init__(self, n_clusters=8, seed=0, max_iter=300, n_restarts=10):
        self.n_clusters = n_clusters
        self.seed = seed
        self.max_iter = max_iter
        self.n_restarts = n_restarts

    def fit(self, X, y=None):
        X = check_array(X, dtype=float)
        self.model_ = kmeans(X, self.n_clusters, seed=self.seed, max_iter=self.max_iter, n_restarts=self.n_restarts)
        self.cluster_centers_ = self.model_.centroids
        self.labels_ = self.model_.assignments
        self.bd_td_ = self.model_.bd_td
        self.inertia_ = self.model_.within
        self.n_iter_ = self.model_.iterations
        return self

    def predict(self, X):
        check_is_fitted(self, "cluster_centers_")
        X = check_array(X, dtype=float)
        return np.argmin(_sq_dists(X, self.cluster_centers_), axis=1) + 1
