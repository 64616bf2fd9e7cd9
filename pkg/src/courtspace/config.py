"""Run configuration: an INI file read with :mod:`configparser`.

Example::

    [input]
    sensor_log = match.csv
    events = events.csv          ; optional
    events_format = csv          ; csv | json

    [columns]                    ; optional renames
    tag = tagid
    timestamp = timestamp_ms
    x = klm_x
    y = klm_y

    [court]
    length_m = 28
    width_m = 15
    attack_direction = 1:toward_positive_x, 2:toward_negative_x

    [roster]
    tags = 3, 7, 9, 12, 15       ; empty: the five most-sampled tags

    [resample]
    grid_hz = 5
    max_gap_ms = 1000

    [kalman]
    skip = false
    process_noise_accel = 4.0
    measurement_noise = 0.09

    [segmentation]
    min_duration_ms = 2000

    [phases]
    k_range = 1..12
    k =                          ; set to force a cluster count
    min_gain = 0.05
    seed = 0
    n_restarts = 10

    [events]
    window_ms = 1000

    [output]
    dir = out

Relative paths are resolved against the config file's directory.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import InputError
from .ingest import DEFAULT_COLUMNS, AttackDirection, CourtSpec
from .kinematics import KalmanParams


@dataclass(frozen=True)
class RunConfig:
    sensor_log: str | None = None
    events: str | None = None
    events_format: str = "csv"
    columns: dict = field(default_factory=lambda: dict(DEFAULT_COLUMNS))
    court: CourtSpec = field(default_factory=CourtSpec)
    roster: tuple[str, ...] | None = None
    grid_hz: float = 5.0
    max_gap_ms: float = 1000.0
    skip_kalman: bool = False
    kalman: KalmanParams = field(default_factory=KalmanParams)
    min_duration_ms: int = 2000
    k_range: tuple[int, ...] = tuple(range(1, 13))
    k: int | None = None
    min_gain: float = 0.05
    seed: int = 0
    n_restarts: int = 10
    max_iter: int = 300
    window_ms: float = 1000.0
    out_dir: str | None = None

    def with_overrides(self, **kwargs) -> "RunConfig":
        return replace(self, **{k: v for k, v in kwargs.items() if v is not None})

    def to_ini(self) -> str:
        """Effective configuration (output directory left out so copies compare equal)."""
        dirs = ", ".join(f"{p}:{d.value}" for p, d in sorted(self.court.attack_direction.items()))
        lines = [
            "[input]",
            f"sensor_log = {self.sensor_log or ''}",
            f"events = {self.events or ''}",
            f"events_format = {self.events_format}",
            "",
            "[columns]",
            *(f"{k} = {v}" for k, v in self.columns.items()),
            "",
            "[court]",
            f"length_m = {self.court.length_m!r}",
            f"width_m = {self.court.width_m!r}",
            f"attack_direction = {dirs}",
            "",
            "[roster]",
            f"tags = {', '.join(self.roster) if self.roster else ''}",
            "",
            "[resample]",
            f"grid_hz = {self.grid_hz!r}",
            f"max_gap_ms = {self.max_gap_ms!r}",
            "",
            "[kalman]",
            f"skip = {str(self.skip_kalman).lower()}",
            f"process_noise_accel = {self.kalman.process_noise_accel!r}",
            f"measurement_noise = {self.kalman.measurement_noise!r}",
            f"initial_position_var = {self.kalman.initial_position_var!r}",
            f"initial_velocity_var = {self.kalman.initial_velocity_var!r}",
            "",
            "[segmentation]",
            f"min_duration_ms = {self.min_duration_ms}",
            "",
            "[phases]",
            f"k_range = {format_k_range(self.k_range)}",
            f"k = {'' if self.k is None else self.k}",
            f"min_gain = {self.min_gain!r}",
            f"seed = {self.seed}",
            f"n_restarts = {self.n_restarts}",
            f"max_iter = {self.max_iter}",
            "",
            "[events]",
            f"window_ms = {self.window_ms!r}",
            "",
        ]
        return "\n".join(lines)


def parse_k_range(text: str) -> tuple[int, ...]:
    """``"1..12"``, ``"1-12"``, ``"1:12"`` (inclusive) or a comma list ``"2,3,8"``."""
    text = str(text).strip()
    try:
        for sep in ("..", ":", "-"):
            if sep in text:
                lo, hi = (int(p) for p in text.split(sep, 1))
                ks = tuple(range(lo, hi + 1))
                break
        else:
            ks = tuple(sorted({int(p) for p in text.split(",") if p.strip()}))
    except ValueError:
        raise InputError(f"bad k range {text!r}") from None
    if not ks or ks[0] < 1:
        raise InputError(f"k range {text!r} must be non-empty with k >= 1")
    return ks


def format_k_range(ks) -> str:
    ks = tuple(ks)
    if ks == tuple(range(ks[0], ks[-1] + 1)):
        return f"{ks[0]}..{ks[-1]}"
    return ",".join(str(k) for k in ks)


def parse_directions(text: str) -> dict[int, AttackDirection]:
    out = {}
    for part in text.split(","):
        if not part.strip():
            continue
        try:
            period, direction = part.split(":", 1)
            out[int(period)] = AttackDirection(direction.strip())
        except ValueError:
            raise InputError(f"bad attack_direction entry {part.strip()!r}") from None
    return out


def _bool(text: str) -> bool:
    v = text.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off", ""):
        return False
    raise InputError(f"not a boolean: {text!r}")


def load_config(path) -> RunConfig:
    path = Path(path)
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    base = path.parent

    def get(section, key, default=None):
        if cp.has_option(section, key):
            value = cp.get(section, key).strip()
            return value if value != "" else default
        return default

    def resolve(p):
        if p is None:
            return None
        q = Path(p)
        return str(q if q.is_absolute() else base / q)

    try:
        columns = dict(DEFAULT_COLUMNS)
        if cp.has_section("columns"):
            columns.update({k: v.strip() for k, v in cp.items("columns") if k in DEFAULT_COLUMNS})
        court_kwargs = {}
        if get("court", "length_m"):
            court_kwargs["length_m"] = float(get("court", "length_m"))
        if get("court", "width_m"):
            court_kwargs["width_m"] = float(get("court", "width_m"))
        if get("court", "attack_direction"):
            court_kwargs["attack_direction"] = parse_directions(get("court", "attack_direction"))
        tags = get("roster", "tags")
        roster = tuple(t.strip() for t in tags.split(",") if t.strip()) if tags else None
        kp = KalmanParams()
        kalman = KalmanParams(
            float(get("kalman", "process_noise_accel", kp.process_noise_accel)),
            float(get("kalman", "measurement_noise", kp.measurement_noise)),
            float(get("kalman", "initial_position_var", kp.initial_position_var)),
            float(get("kalman", "initial_velocity_var", kp.initial_velocity_var)),
        )
        k = get("phases", "k")
        cfg = RunConfig(
            sensor_log=resolve(get("input", "sensor_log")),
            events=resolve(get("input", "events")),
            events_format=get("input", "events_format", "csv"),
            columns=columns,
            court=CourtSpec(**court_kwargs),
            roster=roster,
            grid_hz=float(get("resample", "grid_hz", 5.0)),
            max_gap_ms=float(get("resample", "max_gap_ms", 1000.0)),
            skip_kalman=_bool(get("kalman", "skip", "false")),
            kalman=kalman,
            min_duration_ms=int(get("segmentation", "min_duration_ms", 2000)),
            k_range=parse_k_range(get("phases", "k_range", "1..12")),
            k=None if k is None else int(k),
            min_gain=float(get("phases", "min_gain", 0.05)),
            seed=int(get("phases", "seed", 0)),
            n_restarts=int(get("phases", "n_restarts", 10)),
            max_iter=int(get("phases", "max_iter", 300)),
            window_ms=float(get("events", "window_ms", 1000.0)),
            out_dir=resolve(get("output", "dir")),
        )
    except ValueError as exc:
        raise InputError(f"invalid config {path}: {exc}") from exc
    return cfg
