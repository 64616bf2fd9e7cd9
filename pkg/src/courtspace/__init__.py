"""Spacing metrics, offense/defense segmentation and k-means game phases from player-tracking streams."""

from .embedding import ClassicalMDS, avg_distance_matrix, canonicalize_layout, classical_mds
from .events import GameEvent, join_events, parse_events, period_map
from .geometry import convex_hull, hull_series, mean_distance, pairwise_distances, polygon_area
from .ingest import (
    CourtSpec,
    Frame,
    SensorSample,
    Trajectory,
    build_trajectories,
    parse_sensor_log,
    resample_to_grid,
    stream_stats,
)
from .kinematics import KalmanParams, KalmanSmoother, kalman_filter, smooth_trajectories
from .phases import PhaseKMeans, bd_td_curve, build_features, crosstab, kmeans, select_k
from .segmentation import Label, Metric, label_frames, segment_plays, spacing_summary

__version__ = "0.1.0"
