"""Pure-numpy kernels for the filter hot path.

This is the fallback backend; ``delaykf._core`` provides the same
functions compiled. Conventions shared by both backends:

* shapes: d = state dim, p = input dim, q = measurement dim;
* every returned covariance is symmetrized;
* ``angle_index >= 0`` marks a circular component: the corresponding
  innovation entry and output mean entry are wrapped to (-pi, pi];
* a singular innovation covariance raises ``numpy.linalg.LinAlgError``.
"""

import math

import numpy as np

BACKEND_NAME = "python"

_TWO_PI = 2.0 * math.pi


def wrap_angle(theta):
    w = math.fmod(theta + math.pi, _TWO_PI)
    if w <= 0.0:
        w += _TWO_PI
    return w - math.pi


def _sym(p):
    return 0.5 * (p + p.T)


def linear_predict(mean, cov, a, b, u, q):
    """Time update: returns (a @ mean + b @ u, a @ cov @ a.T + q)."""
    new_mean = a @ mean + b @ u
    new_cov = _sym(a @ cov @ a.T + q)
    return new_mean, new_cov


def linear_update(mean, cov, h, r, z, angle_index=-1):
    """Measurement update; returns (mean, cov, gain)."""
    hp = h @ cov
    s = hp @ h.T + r
    gain = np.linalg.solve(s, hp).T  # cov @ h.T @ inv(s), via symmetry of cov and s
    innov = z - h @ mean
    if angle_index >= 0:
        innov = innov.copy()
        innov[angle_index] = wrap_angle(innov[angle_index])
    new_mean = mean + gain @ innov
    if angle_index >= 0:
        new_mean[angle_index] = wrap_angle(new_mean[angle_index])
    new_cov = _sym(cov - gain @ hp)
    return new_mean, new_cov, gain


def delayed_update(mean_k, cov_k, mean_i, cov_i, f, h, r, z, angle_index=-1):
    """Fuse a measurement of the origin-step state into the current estimate.

    The gain maps the origin-step innovation to the present through ``f``,
    the accumulated transition/gain product:

        K  = f @ cov_i @ h.T @ inv(h @ cov_i @ h.T + r)
        x+ = x_k + K (z - h @ x_i)
        P+ = P_k - K @ h @ cov_i @ f.T
    """
    hpi = h @ cov_i
    s = hpi @ h.T + r
    g = f @ hpi.T
    gain = np.linalg.solve(s, g.T).T
    innov = z - h @ mean_i
    if angle_index >= 0:
        innov = innov.copy()
        innov[angle_index] = wrap_angle(innov[angle_index])
    new_mean = mean_k + gain @ innov
    if angle_index >= 0:
        new_mean[angle_index] = wrap_angle(new_mean[angle_index])
    new_cov = _sym(cov_k - gain @ (hpi @ f.T))
    return new_mean, new_cov, gain


def robot_predict(mean, cov, wl, wr, wheel_radius, wheel_base, dt, delta):
    """One differential-drive time update; returns (mean, cov, a).

    The mean advances through the exact kinematic step; the covariance is
    propagated through the pose Jacobian ``a`` plus the wheel-noise term
    mapped through the (translational, rotational) noise Jacobian.
    """
    x, y, th = mean
    c = math.cos(th)
    s = math.sin(th)
    v = 0.5 * wheel_radius * (wl + wr)
    new_mean = np.array(
        [
            x + dt * v * c,
            y + dt * v * s,
            wrap_angle(th + (wheel_radius / wheel_base) * dt * (wl - wr)),
        ]
    )
    a = np.eye(3)
    a[0, 2] = -dt * v * s
    a[1, 2] = dt * v * c
    qr = delta * wr * wr
    ql = delta * wl * wl
    dt2 = dt * dt
    wqw = np.array(
        [
            [dt2 * c * c * qr, dt2 * c * s * qr, 0.0],
            [dt2 * c * s * qr, dt2 * s * s * qr, 0.0],
            [0.0, 0.0, dt2 * ql],
        ]
    )
    new_cov = _sym(a @ cov @ a.T) + wqw
    return new_mean, new_cov, a


def robot_update(mean, cov, r, z):
    """Full-pose measurement update (measurement matrix = identity)."""
    return linear_update(mean, cov, np.eye(3), r, z, angle_index=2)


def robot_delayed_update(mean_k, cov_k, mean_i, cov_i, f, r, z):
    """Delayed full-pose update (measurement matrix = identity)."""
    return delayed_update(
        mean_k, cov_k, mean_i, cov_i, f, np.eye(3), r, z, angle_index=2
    )
