"""Constant-velocity Kalman filtering of player positions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .errors import InputError, NonmonotonicTime
from .ingest import Trajectory

_H = np.array([[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]])


@dataclass(frozen=True)
class KalmanParams:
    process_noise_accel: float = 4.0
    measurement_noise: float = 0.09
    initial_position_var: float = 1.0
    initial_velocity_var: float = 4.0

    def __post_init__(self):
        for name in ("process_noise_accel", "measurement_noise", "initial_position_var", "initial_velocity_var"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")


@dataclass(frozen=True, eq=False)
class StateEstimate:
    t_ms: int
    position: tuple[float, float]
    velocity: tuple[float, float]
    covariance: np.ndarray


def _transition(dt: float, q: float) -> tuple[np.ndarray, np.ndarray]:
    F = np.eye(4)
    F[0, 2] = F[1, 3] = dt
    # discrete white-noise acceleration, per axis [[dt^4/4, dt^3/2], [dt^3/2, dt^2]]
    a, b, c = dt**4 / 4.0, dt**3 / 2.0, dt**2
    Q = q * np.array(
        [
            [a, 0.0, b, 0.0],
            [0.0, a, 0.0, b],
            [b, 0.0, c, 0.0],
            [0.0, b, 0.0, c],
        ]
    )
    return F, Q


def _run(t_ms: np.ndarray, z: np.ndarray, params: KalmanParams, tag_id=None):
    """Yield (state, covariance) after each measurement."""
    if len(t_ms) == 0:
        raise InputError("trajectory has no samples")
    if len(t_ms) > 1:
        bad = np.flatnonzero(np.diff(t_ms) <= 0)
        if len(bad):
            raise NonmonotonicTime(int(bad[0]) + 1, tag_id)
    R = params.measurement_noise * np.eye(2)
    eye = np.eye(4)
    x = np.array([z[0, 0], z[0, 1], 0.0, 0.0])
    P = np.diag([params.initial_position_var] * 2 + [params.initial_velocity_var] * 2)
    yield x.copy(), P.copy()
    for i in range(1, len(t_ms)):
        dt = (t_ms[i] - t_ms[i - 1]) / 1000.0
        F, Q = _transition(dt, params.process_noise_accel)
        x = F @ x
        P = F @ P @ F.T + Q
        S = _H @ P @ _H.T + R
        K = np.linalg.solve(S, _H @ P).T
        x = x + K @ (z[i] - _H @ x)
        # Joseph form keeps P positive semi-definite
        G = eye - K @ _H
        P = G @ P @ G.T + K @ R @ K.T
        P = 0.5 * (P + P.T)
        yield x.copy(), P.copy()


def kalman_filter(trajectory: Trajectory, params: KalmanParams | None = None) -> list[StateEstimate]:
    """Causal constant-velocity filter; one estimate per sample."""
    params = params or KalmanParams()
    t = np.asarray(trajectory.t_ms, dtype=np.int64)
    z = np.asarray(trajectory.xy, dtype=float).reshape(-1, 2)
    out = []
    for ti, (x, P) in zip(t, _run(t, z, params, getattr(trajectory, "tag_id", None))):
        out.append(StateEstimate(int(ti), (float(x[0]), float(x[1])), (float(x[2]), float(x[3])), P))
    return out


def smooth_trajectories(
    trajectories: Mapping[str, Trajectory], params: KalmanParams | None = None
) -> dict[str, Trajectory]:
    out = {}
    for tag, tr in trajectories.items():
        est = kalman_filter(tr, params)
        xy = np.array([e.position for e in est], dtype=float).reshape(-1, 2)
        out[tag] = Trajectory(tr.tag_id, tr.t_ms, xy)
    return out


class KalmanSmoother(TransformerMixin, BaseEstimator):
    """Estimator wrapper: ``X`` has columns ``(t_ms, x, y)``; ``transform`` returns filtered ``(x, y)``.

    Stateless apart from validating the noise parameters in ``fit``.
    """

    def __init__(self, process_noise_accel=4.0, measurement_noise=0.09, initial_position_var=1.0, initial_velocity_var=4.0):
        self.process_noise_accel = process_noise_accel
        self.measurement_noise = measurement_noise
        self.initial_position_var = initial_position_var
        self.initial_velocity_var = initial_velocity_var

    def fit(self, X=None, y=None):
        self.params_ = KalmanParams(
            self.process_noise_accel, self.measurement_noise, self.initial_position_var, self.initial_velocity_var
        )
        return self

    def transform(self, X):
        check_is_fitted(self, "params_")
        X = check_array(X, dtype=float)
        if X.shape[1] != 3:
            raise ValueError(f"expected 3 columns (t_ms, x, y), got {X.shape[1]}")
        t = X[:, 0].astype(np.int64)
        states = [s for s, _ in _run(t, X[:, 1:], self.params_)]
        return np.array(states)[:, :2]
