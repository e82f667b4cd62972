"""Closed-loop simulation: true robot, delayed channels, filter comparison.

Per tick, in order: the controller emits a wheel command into the control
channel; the actuator zero-order-holds the newest delivered command (zero
before the first arrival); the true pose advances under that command plus
wheel-speed noise; the sensor measures the pose and sends it into the
measurement channel; each filter runs its time update (the delay-aware
filter with the applied command, the naive baseline with the current
commanded one); delivered measurements are fused (delay-aware: against
their origin-step priors; naive: as if they observed the present); the
row is recorded. The truth never depends on any filter output.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .channel import Channel, DelayModel
from .estimator import (
    DelayAwareEKF,
    DelayedMeasurement,
    DelayNaiveEKF,
    GaussianEstimate,
)
from .kinematics import Pose, RobotParams, WheelSpeeds, step

FILTER_IDS = ("ekf", "po_ekf")
TRAJECTORIES = ("straight", "sinusoid", "custom")

RUN_CSV_BASE_COLUMNS = (
    "tick",
    "truth_x",
    "truth_y",
    "truth_theta",
    "cmd_wl",
    "cmd_wr",
    "applied_wl",
    "applied_wr",
    "meas_x",
    "meas_y",
    "meas_theta",
    "meas_origin",
)
RUN_CSV_FILTER_COLUMNS = (
    "est_x",
    "est_y",
    "est_theta",
    "cov_trace",
    "dev_x",
    "dev_y",
    "dev_theta",
)


def _fmt(v) -> str:
    return format(float(v), ".9g")


def _wrap_array(angles: np.ndarray) -> np.ndarray:
    w = np.mod(angles + np.pi, 2.0 * np.pi)
    w = np.where(w == 0.0, 2.0 * np.pi, w)
    return w - np.pi


@dataclass
class ScenarioConfig:
    """Everything that determines a run; (config, seed) fixes every value.

    Defaults describe the reference setup: 0.05 m wheels 0.51 m apart,
    100 ms sampling, noise scale 0.01, pose-measurement covariance
    diag(0.01, 0.01, 0.018), and constant 300 ms / 400 ms transport delays
    (3 and 4 ticks) on the control and measurement paths.
    """

    robot: RobotParams = RobotParams(0.05, 0.51, 0.1)
    delta: float = 0.01
    meas_cov: np.ndarray = field(
        default_factory=lambda: np.diag([0.01, 0.01, 0.018])
    )
    trajectory: str = "straight"
    base_rate: float = 2.0  # rad/s on both wheels
    sin_amplitude: float = 0.5  # rad/s differential swing
    sin_period: int = 100  # ticks per sinusoid cycle
    custom_profile: Sequence[tuple[float, float]] | None = None
    duration_steps: int = 500
    control_delay: DelayModel = field(
        default_factory=lambda: DelayModel(base_ms=300.0, load_dist="constant")
    )
    meas_delay: DelayModel = field(
        default_factory=lambda: DelayModel(base_ms=400.0, load_dist="constant")
    )
    seed: int = 0
    filters: tuple[str, ...] = FILTER_IDS
    start_pose: Pose = Pose(0.0, 0.0, 0.0)
    init_cov: np.ndarray = field(default_factory=lambda: np.zeros((3, 3)))
    history_capacity: int = 64
    warmup_steps: int = 0

    def validate(self) -> None:
        if self.duration_steps < 1:
            raise ValueError("duration_steps must be >= 1")
        if not 0 <= self.warmup_steps < self.duration_steps:
            raise ValueError("warmup_steps must lie in [0, duration_steps)")
        if self.delta < 0.0:
            raise ValueError("delta must be non-negative")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if self.trajectory not in TRAJECTORIES:
            raise ValueError(
                f"unknown trajectory {self.trajectory!r}; expected one of "
                f"{TRAJECTORIES}"
            )
        if self.trajectory == "custom" and not self.custom_profile:
            raise ValueError("custom trajectory requires custom_profile rows")
        if self.sin_period < 1:
            raise ValueError("sin_period must be >= 1")
        if not self.filters:
            raise ValueError("at least one filter must be enabled")
        for fid in self.filters:
            if fid not in FILTER_IDS:
                raise ValueError(
                    f"unknown filter {fid!r}; expected one of {FILTER_IDS}"
                )
        if len(set(self.filters)) != len(self.filters):
            raise ValueError("duplicate filter ids")
        mc = np.asarray(self.meas_cov, dtype=float)
        if mc.shape != (3, 3) or not np.allclose(mc, mc.T, atol=1e-12):
            raise ValueError("meas_cov must be a symmetric 3x3 matrix")
        try:
            np.linalg.cholesky(mc)
        except np.linalg.LinAlgError as exc:
            raise ValueError("meas_cov must be positive definite") from exc
        if self.history_capacity < 1:
            raise ValueError("history_capacity must be >= 1")


def wheel_profile(config: ScenarioConfig, tick: int) -> WheelSpeeds:
    """Commanded wheel speeds at a tick for the configured trajectory."""
    if config.trajectory == "straight":
        return WheelSpeeds(config.base_rate, config.base_rate)
    if config.trajectory == "sinusoid":
        swing = config.sin_amplitude * math.sin(
            2.0 * math.pi * tick / config.sin_period
        )
        return WheelSpeeds(config.base_rate + swing, config.base_rate - swing)
    if config.trajectory == "custom":
        rows = config.custom_profile
        wl, wr = rows[min(tick, len(rows) - 1)]
        return WheelSpeeds(float(wl), float(wr))
    raise ValueError(f"unknown trajectory {config.trajectory!r}")


@dataclass
class FilterTrack:
    """Per-tick estimates of one filter, plus its fusion bookkeeping."""

    est: np.ndarray  # (T, 3)
    cov_trace: np.ndarray  # (T,)
    dev: np.ndarray  # (T, 3), estimate - truth, heading wrapped
    fused: int
    rejected: int
    pending_at_end: int


@dataclass
class RunRecord:
    """Complete per-tick record of one simulation run."""

    config: ScenarioConfig
    ticks: np.ndarray  # (T,)
    truth: np.ndarray  # (T, 3)
    commanded: np.ndarray  # (T, 2) wl, wr
    applied: np.ndarray  # (T, 2)
    meas: np.ndarray  # (T, 3)
    meas_origin: np.ndarray  # (T,)
    meas_arrival: np.ndarray  # (T,)
    tracks: dict[str, FilterTrack]
    control_delays_ms: np.ndarray  # per sent control message
    control_delays_steps: np.ndarray
    meas_delays_ms: np.ndarray
    meas_delays_steps: np.ndarray

    @property
    def duration(self) -> int:
        return self.ticks.shape[0]


@dataclass
class FilterSummary:
    rmse_x: float
    rmse_y: float
    rmse_theta: float
    rmse_position: float
    mean_abs_x: float
    mean_abs_y: float
    mean_abs_theta: float
    max_abs_x: float
    max_abs_y: float
    max_abs_theta: float
    fused: int
    rejected: int
    pending_at_end: int


@dataclass
class SummaryStats:
    """Aggregate deviations and delay statistics of one run."""

    filters: dict[str, FilterSummary]
    control_delay_mean_ms: float
    control_delay_mean_steps: float
    meas_delay_mean_ms: float
    meas_delay_mean_steps: float
    duration_steps: int
    warmup_steps: int
    seed: int

    def to_kv_lines(self) -> list[str]:
        lines = [
            f"run.duration_steps={self.duration_steps}",
            f"run.warmup_steps={self.warmup_steps}",
            f"run.seed={self.seed}",
            f"delay.control.mean_ms={_fmt(self.control_delay_mean_ms)}",
            f"delay.control.mean_steps={_fmt(self.control_delay_mean_steps)}",
            f"delay.meas.mean_ms={_fmt(self.meas_delay_mean_ms)}",
            f"delay.meas.mean_steps={_fmt(self.meas_delay_mean_steps)}",
        ]
        for fid, s in self.filters.items():
            lines += [
                f"{fid}.rmse_x={_fmt(s.rmse_x)}",
                f"{fid}.rmse_y={_fmt(s.rmse_y)}",
                f"{fid}.rmse_theta={_fmt(s.rmse_theta)}",
                f"{fid}.rmse_position={_fmt(s.rmse_position)}",
                f"{fid}.mean_abs_x={_fmt(s.mean_abs_x)}",
                f"{fid}.mean_abs_y={_fmt(s.mean_abs_y)}",
                f"{fid}.mean_abs_theta={_fmt(s.mean_abs_theta)}",
                f"{fid}.max_abs_x={_fmt(s.max_abs_x)}",
                f"{fid}.max_abs_y={_fmt(s.max_abs_y)}",
                f"{fid}.max_abs_theta={_fmt(s.max_abs_theta)}",
                f"{fid}.fused={s.fused}",
                f"{fid}.rejected={s.rejected}",
                f"{fid}.pending_at_end={s.pending_at_end}",
            ]
        return lines


def run(config: ScenarioConfig) -> tuple[RunRecord, SummaryStats]:
    """Simulate one run; (config, seed) determines every recorded value."""
    config.validate()
    params = config.robot
    t_total = config.duration_steps

    rng_process = np.random.default_rng((config.seed, 0))
    rng_meas = np.random.default_rng((config.seed, 1))
    ctrl_ch = Channel(
        config.control_delay, params.sample_period, stream=(config.seed, 2)
    )
    meas_ch = Channel(
        config.meas_delay, params.sample_period, stream=(config.seed, 3)
    )

    meas_cov = np.asarray(config.meas_cov, dtype=float)
    meas_chol = np.linalg.cholesky(meas_cov)
    sqrt_delta = math.sqrt(config.delta)

    init = GaussianEstimate(config.start_pose.as_array(), config.init_cov)
    filters: dict[str, object] = {}
    for fid in config.filters:
        if fid == "ekf":
            filters[fid] = DelayNaiveEKF(params, config.delta, meas_cov, init)
        else:
            filters[fid] = DelayAwareEKF(
                params,
                config.delta,
                meas_cov,
                init,
                capacity=config.history_capacity,
            )

    truth_arr = np.empty((t_total, 3))
    cmd_arr = np.empty((t_total, 2))
    applied_arr = np.empty((t_total, 2))
    meas_arr = np.empty((t_total, 3))
    meas_origin = np.empty(t_total, dtype=int)
    meas_arrival = np.empty(t_total, dtype=int)
    est_arr = {fid: np.empty((t_total, 3)) for fid in config.filters}
    trace_arr = {fid: np.empty(t_total) for fid in config.filters}
    ctrl_steps: list[int] = []
    meas_steps: list[int] = []

    truth = config.start_pose
    applied = WheelSpeeds(0.0, 0.0)
    applied_origin = -1

    for t in range(t_total):
        # 1. command into the control channel
        cmd = wheel_profile(config, t)
        msg = ctrl_ch.send((cmd.omega_left, cmd.omega_right), t)
        ctrl_steps.append(msg.delivery_step - msg.origin_step)

        # 2. actuator holds the newest-origin delivered command
        for delivered in ctrl_ch.poll(t):
            if delivered.origin_step > applied_origin:
                applied_origin = delivered.origin_step
                applied = WheelSpeeds(*delivered.payload)

        # 3. truth advances under the applied command plus wheel noise
        g = rng_process.standard_normal(2)
        noisy = WheelSpeeds(
            applied.omega_left + sqrt_delta * abs(applied.omega_left) * g[0],
            applied.omega_right + sqrt_delta * abs(applied.omega_right) * g[1],
        )
        truth = step(truth, noisy, params)

        # 4. measurement of the new pose into the measurement channel
        z = truth.as_array() + meas_chol @ rng_meas.standard_normal(3)
        z[2] = _wrap_array(z[2:3])[0]
        zmsg = meas_ch.send(z, t)
        meas_steps.append(zmsg.delivery_step - zmsg.origin_step)

        # 5. filter time updates
        for fid, flt in filters.items():
            if fid == "ekf":
                flt.predict(cmd)  # commanded input, delay ignored
            else:
                flt.predict(applied)

        # 6. fuse delivered measurements
        delivered = meas_ch.poll(t)
        for fid, flt in filters.items():
            if fid == "ekf":
                for m in delivered:
                    flt.update(m.payload)
            else:
                flt.enqueue(
                    DelayedMeasurement(m.payload, m.origin_step, m.delivery_step)
                    for m in delivered
                )
                flt.fuse_pending()

        # 7. record the row
        truth_arr[t] = (truth.x, truth.y, truth.theta)
        cmd_arr[t] = (cmd.omega_left, cmd.omega_right)
        applied_arr[t] = (applied.omega_left, applied.omega_right)
        meas_arr[t] = z
        meas_origin[t] = t
        meas_arrival[t] = zmsg.delivery_step
        for fid, flt in filters.items():
            est_arr[fid][t] = flt.estimate.mean
            trace_arr[fid][t] = np.trace(flt.estimate.cov)

    tracks: dict[str, FilterTrack] = {}
    for fid, flt in filters.items():
        dev = est_arr[fid] - truth_arr
        dev[:, 2] = _wrap_array(dev[:, 2])
        if fid == "ekf":
            fused, rejected, pending = flt.fused, 0, 0
        else:
            fused, rejected, pending = flt.fused, flt.rejected, flt.pending_count
        tracks[fid] = FilterTrack(
            est=est_arr[fid],
            cov_trace=trace_arr[fid],
            dev=dev,
            fused=fused,
            rejected=rejected,
            pending_at_end=pending,
        )

    ctrl_ms = np.array([d for _, d in ctrl_ch.delay_log])
    meas_ms = np.array([d for _, d in meas_ch.delay_log])
    record = RunRecord(
        config=config,
        ticks=np.arange(t_total),
        truth=truth_arr,
        commanded=cmd_arr,
        applied=applied_arr,
        meas=meas_arr,
        meas_origin=meas_origin,
        meas_arrival=meas_arrival,
        tracks=tracks,
        control_delays_ms=ctrl_ms,
        control_delays_steps=np.array(ctrl_steps),
        meas_delays_ms=meas_ms,
        meas_delays_steps=np.array(meas_steps),
    )
    return record, summarize(record)


def summarize(record: RunRecord) -> SummaryStats:
    """Aggregate a run into per-filter RMSE/deviation and delay statistics."""
    w = record.config.warmup_steps
    summaries: dict[str, FilterSummary] = {}
    for fid, track in record.tracks.items():
        dev = track.dev[w:]
        ax = np.abs(dev)
        summaries[fid] = FilterSummary(
            rmse_x=float(np.sqrt(np.mean(dev[:, 0] ** 2))),
            rmse_y=float(np.sqrt(np.mean(dev[:, 1] ** 2))),
            rmse_theta=float(np.sqrt(np.mean(dev[:, 2] ** 2))),
            rmse_position=float(
                np.sqrt(np.mean(dev[:, 0] ** 2 + dev[:, 1] ** 2))
            ),
            mean_abs_x=float(np.mean(ax[:, 0])),
            mean_abs_y=float(np.mean(ax[:, 1])),
            mean_abs_theta=float(np.mean(ax[:, 2])),
            max_abs_x=float(np.max(ax[:, 0])),
            max_abs_y=float(np.max(ax[:, 1])),
            max_abs_theta=float(np.max(ax[:, 2])),
            fused=track.fused,
            rejected=track.rejected,
            pending_at_end=track.pending_at_end,
        )
    return SummaryStats(
        filters=summaries,
        control_delay_mean_ms=float(np.mean(record.control_delays_ms)),
        control_delay_mean_steps=float(np.mean(record.control_delays_steps)),
        meas_delay_mean_ms=float(np.mean(record.meas_delays_ms)),
        meas_delay_mean_steps=float(np.mean(record.meas_delays_steps)),
        duration_steps=record.duration,
        warmup_steps=w,
        seed=record.config.seed,
    )


def deviation_series(
    record: RunRecord, filter_id: str, axis: str
) -> np.ndarray:
    """Per-tick (tick, deviation) pairs for one filter and axis.

    ``axis`` is one of ``x``, ``y``, ``theta``, ``position`` (Euclidean
    norm of the x/y deviations).
    """
    if filter_id not in record.tracks:
        raise ValueError(f"unknown filter {filter_id!r} in this record")
    dev = record.tracks[filter_id].dev
    if axis == "x":
        series = dev[:, 0]
    elif axis == "y":
        series = dev[:, 1]
    elif axis == "theta":
        series = dev[:, 2]
    elif axis == "position":
        series = np.hypot(dev[:, 0], dev[:, 1])
    else:
        raise ValueError(f"unknown axis {axis!r}")
    return np.column_stack([record.ticks, series])


# ---------------------------------------------------------------------------
# Monte Carlo


@dataclass
class MonteCarloReport:
    """RMSE distributions over repeated runs with consecutive seeds."""

    runs: int
    seeds: np.ndarray
    filters: tuple[str, ...]
    rmse: dict[str, np.ndarray]  # (runs, 4): x, y, theta, position
    win_fraction: float | None  # po_ekf position RMSE < ekf, if both ran

    def mean_rmse_position(self, fid: str) -> float:
        return float(np.mean(self.rmse[fid][:, 3]))

    def median_rmse_position(self, fid: str) -> float:
        return float(np.median(self.rmse[fid][:, 3]))


def monte_carlo(config: ScenarioConfig, runs: int) -> MonteCarloReport:
    """Run ``runs`` simulations with seeds seed..seed+runs-1 and aggregate."""
    if runs < 1:
        raise ValueError("runs must be >= 1")
    config.validate()
    seeds = np.arange(config.seed, config.seed + runs)
    rmse = {fid: np.empty((runs, 4)) for fid in config.filters}
    for i, seed in enumerate(seeds):
        _, stats = run(replace(config, seed=int(seed)))
        for fid, s in stats.filters.items():
            rmse[fid][i] = (s.rmse_x, s.rmse_y, s.rmse_theta, s.rmse_position)
    win = None
    if "ekf" in rmse and "po_ekf" in rmse:
        win = float(np.mean(rmse["po_ekf"][:, 3] < rmse["ekf"][:, 3]))
    return MonteCarloReport(
        runs=runs,
        seeds=seeds,
        filters=tuple(config.filters),
        rmse=rmse,
        win_fraction=win,
    )


# ---------------------------------------------------------------------------
# CSV serialization


def write_run_csv(record: RunRecord, path) -> None:
    """Write the per-tick record; column order is part of the contract.

    Ticks without a measurement (origin < 0) leave the measurement fields
    empty.
    """
    fids = tuple(record.tracks)
    header = list(RUN_CSV_BASE_COLUMNS)
    for fid in fids:
        header += [f"{fid}_{c}" for c in RUN_CSV_FILTER_COLUMNS]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for t in range(record.duration):
            row = [
                str(int(record.ticks[t])),
                _fmt(record.truth[t, 0]),
                _fmt(record.truth[t, 1]),
                _fmt(record.truth[t, 2]),
                _fmt(record.commanded[t, 0]),
                _fmt(record.commanded[t, 1]),
                _fmt(record.applied[t, 0]),
                _fmt(record.applied[t, 1]),
            ]
            if record.meas_origin[t] < 0:
                row += ["", "", "", ""]
            else:
                row += [
                    _fmt(record.meas[t, 0]),
                    _fmt(record.meas[t, 1]),
                    _fmt(record.meas[t, 2]),
                    str(int(record.meas_origin[t])),
                ]
            for fid in fids:
                track = record.tracks[fid]
                row += [
                    _fmt(track.est[t, 0]),
                    _fmt(track.est[t, 1]),
                    _fmt(track.est[t, 2]),
                    _fmt(track.cov_trace[t]),
                    _fmt(track.dev[t, 0]),
                    _fmt(track.dev[t, 1]),
                    _fmt(track.dev[t, 2]),
                ]
            writer.writerow(row)


def write_summary_text(stats: SummaryStats, path) -> None:
    with open(path, "w") as fh:
        fh.write("\n".join(stats.to_kv_lines()) + "\n")


def write_summary_csv(stats: SummaryStats, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["key", "value"])
        for line in stats.to_kv_lines():
            writer.writerow(line.split("=", 1))


def write_montecarlo_csv(report: MonteCarloReport, path) -> None:
    """One row per run: seed plus each filter's RMSEs."""
    header = ["seed"]
    for fid in report.filters:
        header += [
            f"{fid}_rmse_x",
            f"{fid}_rmse_y",
            f"{fid}_rmse_theta",
            f"{fid}_rmse_position",
        ]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i, seed in enumerate(report.seeds):
            row = [str(int(seed))]
            for fid in report.filters:
                row += [_fmt(v) for v in report.rmse[fid][i]]
            writer.writerow(row)
