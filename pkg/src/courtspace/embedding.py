"""Classical (Torgerson) MDS maps of a phase's average inter-player distances."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array

from .errors import EigenFailure, EmptyCluster, InputError
from .ingest import Frame, sorted_tags, tag_sort_key


@dataclass(frozen=True, eq=False)
class AvgDistanceMatrix:
    cluster_id: int
    labels: tuple[str, ...]
    d: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.d, dtype=float)
        n = len(self.labels)
        if d.shape != (n, n):
            raise InputError(f"distance matrix shape {d.shape} does not match {n} labels")
        if not np.allclose(d, d.T, rtol=0, atol=1e-9) or np.any(np.abs(np.diag(d)) > 1e-12) or np.any(d < 0):
            raise InputError("distance matrix must be symmetric, non-negative, zero on the diagonal")
        object.__setattr__(self, "d", d)


@dataclass(frozen=True, eq=False)
class PhaseLayout:
    cluster_id: int
    labels: tuple[str, ...]
    coords: np.ndarray
    eigvals: np.ndarray
    stress: float

    def to_dict(self) -> dict:
        return {
            "cluster": int(self.cluster_id),
            "players": {tag: [float(u), float(v)] for tag, (u, v) in zip(self.labels, self.coords)},
            "eigvals": [float(e) for e in self.eigvals],
            "stress": float(self.stress),
        }


def avg_distance_matrix(frames: Sequence[Frame], cluster_id: int = 0) -> AvgDistanceMatrix:
    if len(frames) == 0:
        raise EmptyCluster(f"cluster {cluster_id} has no frames")
    tags = tuple(frames[0].tags)
    acc = np.zeros((len(tags), len(tags)))
    for f in frames:
        if tuple(f.tags) != tags:
            raise InputError(f"frame t={f.t_ms} roster differs from {tags}")
        p = f.as_array(tags)
        acc += np.sqrt(((p[:, None, :] - p[None, :, :]) ** 2).sum(axis=2))
    d = acc / len(frames)
    np.fill_diagonal(d, 0.0)
    return AvgDistanceMatrix(cluster_id, tags, 0.5 * (d + d.T))


def jacobi_eigh(A: np.ndarray, tol: float = 1e-12, max_sweeps: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi eigen-decomposition of a symmetric matrix.

    Returns eigenvalues sorted non-increasing and the matching eigenvectors
    as columns.
    """
    A = np.array(A, dtype=float)
    n = A.shape[0]
    V = np.eye(n)
    scale = max(np.abs(A).max(), 1.0) if n else 1.0
    for _ in range(max_sweeps):
        off = math.sqrt(float((np.triu(A, 1) ** 2).sum()))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) < 1e-300:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                R = np.eye(n)
                R[p, p] = R[q, q] = c
                R[p, q] = s
                R[q, p] = -s
                A = R.T @ A @ R
                A[p, q] = A[q, p] = 0.0
                V = V @ R
    else:
        off = math.sqrt(float((np.triu(A, 1) ** 2).sum()))
        if off > tol * scale * 1e3:
            raise EigenFailure(f"Jacobi did not converge (off-diagonal norm {off:.3e})")
    w = np.diag(A).copy()
    if not np.all(np.isfinite(w)):
        raise EigenFailure("non-finite eigenvalues")
    order = np.argsort(-w, kind="stable")
    return w[order], V[:, order]


def _pair_distances(coords: np.ndarray) -> np.ndarray:
    return np.sqrt(((coords[:, None, :] - coords[None, :, :]) ** 2).sum(axis=2))


def stress(d: np.ndarray, coords: np.ndarray) -> float:
    """Relative Frobenius error of the reconstructed distances (off-diagonal entries)."""
    d_hat = _pair_distances(coords)
    iu = np.triu_indices(len(d), 1)
    denom = math.sqrt(float((d[iu] ** 2).sum()))
    if denom == 0:
        return 0.0 if np.allclose(d_hat, 0) else math.inf
    return math.sqrt(float(((d_hat[iu] - d[iu]) ** 2).sum())) / denom


def classical_mds(dm: AvgDistanceMatrix, dim: int = 2) -> PhaseLayout:
    """Double-center the squared distances and scale the top eigenvectors.

    Negative eigenvalues are clamped to zero for the coordinates but reported
    untouched in ``eigvals``.
    """
    d = dm.d
    n = len(d)
    J = np.eye(n) - np.ones((n, n)) / n
    B = -0.5 * J @ (d**2) @ J
    B = 0.5 * (B + B.T)
    w, V = jacobi_eigh(B)
    k = min(dim, n)
    coords = np.zeros((n, dim))
    coords[:, :k] = V[:, :k] * np.sqrt(np.clip(w[:k], 0.0, None))
    coords -= coords.mean(axis=0)
    return PhaseLayout(dm.cluster_id, tuple(dm.labels), coords, w, stress(d, coords))


def _sign_anchor(values: np.ndarray, order: Sequence[int], tol: float) -> float:
    for i in order:
        if abs(values[i]) > tol:
            return math.copysign(1.0, values[i])
    return 1.0


def canonical_coords(coords: np.ndarray, labels: Sequence[str]) -> np.ndarray:
    C = np.asarray(coords, dtype=float)
    C = C - C.mean(axis=0)
    M = C.T @ C
    theta = 0.5 * math.atan2(2.0 * M[0, 1], M[0, 0] - M[1, 1])
    c, s = math.cos(theta), math.sin(theta)
    out = np.column_stack([C @ np.array([c, s]), C @ np.array([-s, c])])
    order = sorted(range(len(labels)), key=lambda i: tag_sort_key(labels[i]))
    tol = 1e-12 * max(1.0, float(np.abs(out).max()) if out.size else 1.0)
    out[:, 0] *= _sign_anchor(out[:, 0], order, tol)
    out[:, 1] *= _sign_anchor(out[:, 1], order, tol)
    out[np.abs(out) <= tol] = 0.0
    return out


def canonicalize_layout(layout: PhaseLayout) -> PhaseLayout:
    """Rotate the principal axis onto u, then fix reflections by the lowest tag id.

    The lowest-tag player gets u >= 0 and v >= 0; when its coordinate on an
    axis is zero, the next player in tag order decides that axis.
    """
    coords = canonical_coords(layout.coords, layout.labels)
    return PhaseLayout(layout.cluster_id, layout.labels, coords, layout.eigvals, layout.stress)


def phase_layouts(frames: Sequence[Frame], assignments: Sequence[int], k: int) -> list[PhaseLayout]:
    """Canonical MDS layout for every non-empty cluster 1..k."""
    out = []
    for c in range(1, k + 1):
        members = [f for f, a in zip(frames, assignments) if int(a) == c]
        if not members:
            continue
        out.append(canonicalize_layout(classical_mds(avg_distance_matrix(members, c))))
    return out


class ClassicalMDS(BaseEstimator):
    """Estimator wrapper over a precomputed distance matrix."""

    def __init__(self, n_components=2, canonical=True):
        self.n_components = n_components
        self.canonical = canonical

    def fit(self, X, y=None, labels=None):
        X = check_array(X, dtype=float)
        n = X.shape[0]
        labels = tuple(sorted_tags(range(n))) if labels is None else tuple(str(t) for t in labels)
        layout = classical_mds(AvgDistanceMatrix(0, labels, X), self.n_components)
        if self.canonical:
            layout = canonicalize_layout(layout)
        self.layout_ = layout
        self.embedding_ = layout.coords
        self.eigenvalues_ = layout.eigvals
        self.stress_ = layout.stress
        return self

    def fit_transform(self, X, y=None, labels=None):
        return self.fit(X, y, labels).embedding_
