"""Differential-drive kinematics: discrete step, speeds, and filter Jacobians.

State convention is ``[x, y, theta]`` with ``theta`` wrapped to the
half-open interval ``(-pi, pi]``. The robot is driven by the rotational
speeds of its two wheels; turning rate is proportional to
``omega_left - omega_right``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_TWO_PI = 2.0 * math.pi


def wrap_angle(theta: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    w = math.fmod(theta + math.pi, _TWO_PI)
    if w <= 0.0:
        w += _TWO_PI
    return w - math.pi


@dataclass(frozen=True)
class RobotParams:
    """Physical parameters of a two-wheel differential-drive robot."""

    wheel_radius: float  # m
    wheel_base: float  # m, distance between the wheels
    sample_period: float  # s

    def __post_init__(self) -> None:
        if not (
            self.wheel_radius > 0.0
            and self.wheel_base > 0.0
            and self.sample_period > 0.0
        ):
            raise ValueError(
                "wheel_radius, wheel_base and sample_period must all be positive"
            )


@dataclass(frozen=True)
class Pose:
    """Planar pose; the heading is stored wrapped to (-pi, pi]."""

    x: float
    y: float
    theta: float

    def __post_init__(self) -> None:
        if not (
            math.isfinite(self.x)
            and math.isfinite(self.y)
            and math.isfinite(self.theta)
        ):
            raise ValueError("pose components must be finite")
        object.__setattr__(self, "theta", wrap_angle(self.theta))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.theta])

    @classmethod
    def from_array(cls, v) -> "Pose":
        return cls(float(v[0]), float(v[1]), float(v[2]))


@dataclass(frozen=True)
class WheelSpeeds:
    """Rotational speeds of the left and right wheels in rad/s."""

    omega_left: float
    omega_right: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.omega_left) and math.isfinite(self.omega_right)):
            raise ValueError("wheel speeds must be finite")


def translational_speed(u: WheelSpeeds, params: RobotParams) -> float:
    """Forward speed of the wheel-axis center, (R/2) * (wl + wr)."""
    return 0.5 * params.wheel_radius * (u.omega_left + u.omega_right)


def step(pose: Pose, u: WheelSpeeds, params: RobotParams) -> Pose:
    """Advance the pose by one sample period.

    The trigonometric terms use the pre-step heading:

        x'     = x + (R/2) Ts (wl + wr) cos(theta)
        y'     = y + (R/2) Ts (wl + wr) sin(theta)
        theta' = theta + (R/L) Ts (wl - wr)
    """
    ts = params.sample_period
    v = translational_speed(u, params)
    dtheta = (params.wheel_radius / params.wheel_base) * ts * (
        u.omega_left - u.omega_right
    )
    return Pose(
        pose.x + ts * v * math.cos(pose.theta),
        pose.y + ts * v * math.sin(pose.theta),
        pose.theta + dtheta,
    )


def state_jacobian(
    pose_estimate: Pose, u: WheelSpeeds, params: RobotParams
) -> np.ndarray:
    """Jacobian of :func:`step` with respect to the pose, at the given estimate."""
    ts = params.sample_period
    v = translational_speed(u, params)
    a = np.eye(3)
    a[0, 2] = -ts * v * math.sin(pose_estimate.theta)
    a[1, 2] = ts * v * math.cos(pose_estimate.theta)
    return a


def noise_jacobian(pose_estimate: Pose, params: RobotParams) -> np.ndarray:
    """Jacobian of the step with respect to (translational, rotational) noise.

    Columns map an additive forward-speed disturbance and an additive
    heading-rate disturbance into the state:

        [[Ts cos(theta), 0],
         [Ts sin(theta), 0],
         [0,            Ts]]
    """
    ts = params.sample_period
    w = np.zeros((3, 2))
    w[0, 0] = ts * math.cos(pose_estimate.theta)
    w[1, 0] = ts * math.sin(pose_estimate.theta)
    w[2, 1] = ts
    return w


def process_noise_cov(u: WheelSpeeds, delta: float) -> np.ndarray:
    """Wheel-speed noise covariance, diag(delta * wr^2, delta * wl^2).

    The disturbance on each wheel scales with how fast it spins; ``delta``
    is the dimensionless proportionality constant.
    """
    if delta < 0.0:
        raise ValueError("delta must be non-negative")
    return np.diag(
        [delta * u.omega_right**2, delta * u.omega_left**2]
    )
