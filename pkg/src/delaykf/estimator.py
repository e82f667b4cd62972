"""State estimators that tolerate network-delayed inputs and measurements.

The delay-aware filters keep a bounded per-step history (prior estimate,
transition Jacobian, applied gain, measurement Jacobian). A measurement
that observed the state at step ``i`` but arrives at step ``k`` is fused
against the recorded step-``i`` prior, and the correction is carried to
the present through the ordered product of per-step factors

    F = A_{k-1} (I - K_{k-1} H_{k-1}) @ ... @ A_i (I - K_i H_i)

(most recent factor leftmost; a step without fusion contributes its bare
transition). The fused gain and posterior covariance are

    K  = F P_i H^T (H P_i H^T + R)^-1
    x+ = x_k + K (z - H x_i)
    P+ = P_k - K H P_i F^T

``augmented_oracle`` provides an independent reference for this algebra:
it tracks the exact joint distribution of the current state and a frozen
copy of the origin-step state, without ever forming ``F``.
"""

from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from ._backend import kernels
from .kinematics import Pose, RobotParams, WheelSpeeds, wrap_angle


class DelayExceedsHistory(RuntimeError):
    """A delayed measurement predates the oldest retained history record."""


# ---------------------------------------------------------------------------
# value types


@dataclass
class GaussianEstimate:
    """Mean/covariance pair; serves as both predicted and corrected estimate."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self) -> None:
        self.mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        self.cov = np.atleast_2d(np.asarray(self.cov, dtype=float))
        d = self.mean.shape[0]
        if self.mean.ndim != 1 or self.cov.shape != (d, d):
            raise ValueError(
                f"inconsistent estimate shapes {self.mean.shape} / {self.cov.shape}"
            )

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    def copy(self) -> "GaussianEstimate":
        return GaussianEstimate(self.mean.copy(), self.cov.copy())

    def validate(self, sym_tol: float = 1e-9, eig_tol: float = -1e-9) -> None:
        """Check that the covariance is symmetric and positive semi-definite."""
        if not np.all(np.isfinite(self.mean)) or not np.all(np.isfinite(self.cov)):
            raise ValueError("estimate contains non-finite values")
        if np.max(np.abs(self.cov - self.cov.T), initial=0.0) > sym_tol:
            raise ValueError("covariance is not symmetric")
        if np.linalg.eigvalsh(self.cov).min() < eig_tol:
            raise ValueError("covariance is not positive semi-definite")


@dataclass
class LinearModel:
    """Time-invariant linear system x' = A x + B u + w, z = H x + v.

    Q and R are the process and measurement noise covariances. R is
    expected to be positive definite so the innovation covariance is
    invertible; fusing with a singular innovation covariance raises
    ``numpy.linalg.LinAlgError``.
    """

    A: np.ndarray
    B: np.ndarray
    H: np.ndarray
    Q: np.ndarray
    R: np.ndarray

    def __post_init__(self) -> None:
        self.A = np.ascontiguousarray(np.atleast_2d(self.A), dtype=float)
        self.B = np.ascontiguousarray(np.atleast_2d(self.B), dtype=float)
        self.H = np.ascontiguousarray(np.atleast_2d(self.H), dtype=float)
        self.Q = np.ascontiguousarray(np.atleast_2d(self.Q), dtype=float)
        self.R = np.ascontiguousarray(np.atleast_2d(self.R), dtype=float)
        d = self.A.shape[0]
        q = self.H.shape[0]
        if self.A.shape != (d, d):
            raise ValueError("A must be square")
        if self.B.shape[0] != d:
            raise ValueError("B must have as many rows as A")
        if self.H.shape[1] != d:
            raise ValueError("H must have as many columns as A")
        if self.Q.shape != (d, d) or self.R.shape != (q, q):
            raise ValueError("Q/R shapes inconsistent with A/H")
        if not np.allclose(self.Q, self.Q.T, atol=1e-9) or not np.allclose(
            self.R, self.R.T, atol=1e-9
        ):
            raise ValueError("Q and R must be symmetric")

    @property
    def state_dim(self) -> int:
        return self.A.shape[0]

    @property
    def input_dim(self) -> int:
        return self.B.shape[1]

    @property
    def meas_dim(self) -> int:
        return self.H.shape[0]


@dataclass(frozen=True)
class DelayedMeasurement:
    """A measurement taken at ``origin_step`` that arrives at ``arrival_step``."""

    value: np.ndarray
    origin_step: int
    arrival_step: int

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "value", np.atleast_1d(np.asarray(self.value, dtype=float))
        )
        if self.arrival_step < self.origin_step:
            raise ValueError("arrival_step must be >= origin_step")

    @property
    def delay(self) -> int:
        return self.arrival_step - self.origin_step


@dataclass
class HistoryRecord:
    """Per-step filter snapshot enabling delayed-measurement fusion.

    ``state_jacobian`` is the transition used when leaving this step (set
    by the next predict); ``gain``/``meas_jacobian`` describe the fusion
    applied at this step, ``None`` when no measurement was fused.
    """

    step: int
    prior: GaussianEstimate
    state_jacobian: np.ndarray | None = None
    gain: np.ndarray | None = None
    meas_jacobian: np.ndarray | None = None


class HistoryBuffer:
    """Bounded FIFO of per-step records with contiguous, increasing steps."""

    def __init__(self, capacity: int = 64):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self._records: deque[HistoryRecord] = deque(maxlen=capacity)

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self):
        return iter(self._records)

    @property
    def first_step(self) -> int | None:
        return self._records[0].step if self._records else None

    @property
    def last_step(self) -> int | None:
        return self._records[-1].step if self._records else None

    @property
    def last_record(self) -> HistoryRecord | None:
        return self._records[-1] if self._records else None

    def append(self, record: HistoryRecord) -> None:
        if self._records and record.step != self._records[-1].step + 1:
            raise ValueError(
                f"non-contiguous history append: {record.step} after "
                f"{self._records[-1].step}"
            )
        self._records.append(record)  # deque(maxlen) evicts the oldest

    def get(self, step: int) -> HistoryRecord:
        first = self.first_step
        if first is None or step > self.last_step:
            raise ValueError(f"no history record for step {step}")
        if step < first:
            raise DelayExceedsHistory(
                f"step {step} is older than the retained history "
                f"(oldest is {first}; capacity {self.capacity})"
            )
        return self._records[step - first]

    def span(self, start_step: int, stop_step: int) -> list[HistoryRecord]:
        """Records for steps [start_step, stop_step)."""
        if start_step > stop_step:
            raise ValueError("start_step must be <= stop_step")
        if start_step == stop_step:
            return []
        first = self.first_step
        if first is None or stop_step - 1 > self.last_step:
            raise ValueError(
                f"history does not cover steps [{start_step}, {stop_step})"
            )
        if start_step < first:
            raise DelayExceedsHistory(
                f"step {start_step} is older than the retained history "
                f"(oldest is {first}; capacity {self.capacity})"
            )
        lo = start_step - first
        return [self._records[i] for i in range(lo, lo + stop_step - start_step)]


# ---------------------------------------------------------------------------
# linear filter operations


def _as_input(u, model: LinearModel) -> np.ndarray:
    if u is None:
        return np.zeros(model.input_dim)
    return np.atleast_1d(np.asarray(u, dtype=float))


def kf_predict(
    est: GaussianEstimate, model: LinearModel, u=None
) -> GaussianEstimate:
    """Standard time update. ``u`` is whichever input drove the plant over
    this interval (the caller resolves any transport delay); ``None`` means
    zero input, the convention before the first command arrives."""
    mean, cov = kernels().linear_predict(
        est.mean, est.cov, model.A, model.B, _as_input(u, model), model.Q
    )
    return GaussianEstimate(mean, cov)


def kf_update_with_gain(
    est: GaussianEstimate, model: LinearModel, z
) -> tuple[GaussianEstimate, np.ndarray]:
    """Standard measurement update; returns the posterior and the gain used."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    mean, cov, gain = kernels().linear_update(
        est.mean, est.cov, model.H, model.R, z
    )
    return GaussianEstimate(mean, cov), gain


def kf_update(est: GaussianEstimate, model: LinearModel, z) -> GaussianEstimate:
    """Standard measurement update."""
    posterior, _ = kf_update_with_gain(est, model, z)
    return posterior


def propagation_matrix(
    history: HistoryBuffer, origin_step: int, current_step: int
) -> np.ndarray:
    """Ordered product of per-step factors from ``origin_step`` to
    ``current_step`` (exclusive), most recent factor leftmost.

    Each step contributes ``A (I - K H)``, or bare ``A`` when no
    measurement was fused at it. An empty span yields the identity.
    """
    if origin_step > current_step:
        raise ValueError("origin_step must be <= current_step")
    origin = history.get(origin_step)
    d = origin.prior.dim
    f = np.eye(d)
    for rec in history.span(origin_step, current_step):
        a = rec.state_jacobian
        if a is None:
            raise ValueError(f"history record {rec.step} has no transition yet")
        if rec.gain is None:
            factor = a
        else:
            factor = a @ (np.eye(d) - rec.gain @ rec.meas_jacobian)
        f = factor @ f  # newer factors accumulate on the left
    return f


def delayed_update(
    est: GaussianEstimate,
    history: HistoryBuffer,
    meas: DelayedMeasurement,
    model: LinearModel,
    current_step: int | None = None,
) -> tuple[GaussianEstimate, np.ndarray]:
    """Fuse a delayed measurement into the current prior ``est``.

    ``est`` must be the prior recorded for ``current_step`` (defaults to
    the newest history step). Returns the posterior and the applied gain,
    which the caller records into the current step so later fusions see it.
    """
    if current_step is None:
        current_step = history.last_step
    if current_step is None:
        raise ValueError("history is empty")
    if meas.origin_step > current_step:
        raise ValueError("measurement originates in the future")
    rec = history.get(meas.origin_step)
    f = propagation_matrix(history, meas.origin_step, current_step)
    mean, cov, gain = kernels().delayed_update(
        est.mean,
        est.cov,
        rec.prior.mean,
        rec.prior.cov,
        f,
        model.H,
        model.R,
        meas.value,
    )
    return GaussianEstimate(mean, cov), gain


def posterior_cov_for_gain(p_current, p_origin, l, h, r, gain) -> np.ndarray:
    """Posterior covariance of a delayed fusion with an arbitrary gain.

    ``l`` is the origin/current error cross-covariance (``P_i @ F.T`` for
    the propagation product ``F``). Evaluates

        P_k - L^T H^T K^T - K H L + K H P_i H^T K^T + K R K^T

    which is minimized over ``K`` by the delayed-fusion gain.
    """
    kh = gain @ h
    return (
        p_current
        - l.T @ kh.T
        - kh @ l
        + kh @ p_origin @ kh.T
        + gain @ r @ gain.T
    )


# ---------------------------------------------------------------------------
# differential-drive (nonlinear) filter operations


def robot_time_update(
    est: GaussianEstimate,
    u: WheelSpeeds,
    params: RobotParams,
    delta: float,
) -> GaussianEstimate:
    """EKF time update for the differential-drive robot.

    The mean advances through the exact kinematic step with ``u`` (the
    input actually applied over this interval); the covariance through the
    pose Jacobian plus the wheel-noise term.
    """
    if delta < 0.0:
        raise ValueError("delta must be non-negative")
    mean, cov, _ = kernels().robot_predict(
        est.mean,
        est.cov,
        u.omega_left,
        u.omega_right,
        params.wheel_radius,
        params.wheel_base,
        params.sample_period,
        delta,
    )
    return GaussianEstimate(mean, cov)


def robot_update(
    est: GaussianEstimate, meas_cov: np.ndarray, z
) -> GaussianEstimate:
    """Standard EKF pose update (measurement = full pose, wrapped heading)."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    mean, cov, _ = kernels().robot_update(est.mean, est.cov, meas_cov, z)
    return GaussianEstimate(mean, cov)


def robot_delayed_update(
    est: GaussianEstimate,
    history: HistoryBuffer,
    meas: DelayedMeasurement,
    meas_cov: np.ndarray,
    current_step: int | None = None,
) -> tuple[GaussianEstimate, np.ndarray]:
    """Delayed pose update; the heading innovation is wrapped to (-pi, pi]."""
    if current_step is None:
        current_step = history.last_step
    if current_step is None:
        raise ValueError("history is empty")
    if meas.origin_step > current_step:
        raise ValueError("measurement originates in the future")
    rec = history.get(meas.origin_step)
    f = propagation_matrix(history, meas.origin_step, current_step)
    mean, cov, gain = kernels().robot_delayed_update(
        est.mean, est.cov, rec.prior.mean, rec.prior.cov, f, meas_cov, meas.value
    )
    return GaussianEstimate(mean, cov), gain


# ---------------------------------------------------------------------------
# augmented-state oracle


@dataclass(frozen=True)
class OracleTransition:
    """One forward step between a measurement's origin and its fusion time.

    ``interim`` is an optional (H, R, z) measurement fused at this step
    before predicting to the next one; ``bu`` is the already-multiplied
    input effect ``B @ u`` (``None`` for zero input).
    """

    a: np.ndarray
    q: np.ndarray
    bu: np.ndarray | None = None
    interim: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None


def augmented_oracle(
    prior_at_origin: GaussianEstimate,
    transitions: Sequence[OracleTransition],
    delayed_h: np.ndarray,
    delayed_r: np.ndarray,
    z,
) -> GaussianEstimate:
    """Brute-force reference posterior for a single delayed fusion.

    Runs a Kalman filter on the stacked state [current; origin-copy]: the
    copy is carried with identity dynamics and zero process noise, and the
    delayed measurement observes it. Interim fusions apply their standard
    gain to the live block only (the copy is never retro-corrected, since
    the filter under test never revises its stored priors), with exact
    arbitrary-gain covariance bookkeeping. The final update uses the
    jointly optimal stacked gain. Returns the marginal on the current
    state; no propagation product is ever formed.
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    d = prior_at_origin.dim
    eye2d = np.eye(2 * d)
    mean = np.concatenate([prior_at_origin.mean, prior_at_origin.mean])
    p0 = prior_at_origin.cov
    cov = np.block([[p0, p0], [p0, p0]])

    for tr in transitions:
        if tr.interim is not None:
            h, r, zi = tr.interim
            zi = np.atleast_1d(np.asarray(zi, dtype=float))
            marg = cov[:d, :d]
            s = h @ marg @ h.T + r
            k_live = np.linalg.solve(s, h @ marg).T
            k = np.vstack([k_live, np.zeros((d, h.shape[0]))])
            h_full = np.hstack([h, np.zeros_like(h)])
            mean = mean + k @ (zi - h_full @ mean)
            imkh = eye2d - k @ h_full
            cov = imkh @ cov @ imkh.T + k @ r @ k.T
        a_full = np.block(
            [[tr.a, np.zeros((d, d))], [np.zeros((d, d)), np.eye(d)]]
        )
        mean = a_full @ mean
        if tr.bu is not None:
            mean[:d] += tr.bu
        cov = a_full @ cov @ a_full.T
        cov[:d, :d] += tr.q

    h_full = np.hstack([np.zeros_like(delayed_h), delayed_h])
    s = h_full @ cov @ h_full.T + delayed_r
    k = np.linalg.solve(s, h_full @ cov).T
    mean = mean + k @ (z - h_full @ mean)
    cov = cov - k @ s @ k.T
    top = cov[:d, :d]
    return GaussianEstimate(mean[:d], 0.5 * (top + top.T))


# ---------------------------------------------------------------------------
# stateful filters


class _DelayedFilterCore:
    """Shared per-tick machinery: history, pending queue, fusion policy.

    One fusion per step (each history record holds a single gain); extra
    deliveries wait in an origin-ordered queue and fuse on later ticks,
    which keeps the propagation product exact. A delivery whose origin
    precedes the last fused origin is out-of-sequence: it is rejected and
    counted, never fused.
    """

    def __init__(
        self,
        init: GaussianEstimate,
        start_step: int = 0,
        capacity: int = 64,
        init_is_prior: bool = False,
    ):
        self.estimate = init.copy()
        self.history = HistoryBuffer(capacity)
        self.fused = 0
        self.rejected = 0
        self._pending: list[tuple[int, int, DelayedMeasurement]] = []
        self._pending_seq = 0
        self._last_fused_origin: int | None = None
        self._fused_this_step = False
        if init_is_prior:
            self.step_index = start_step
            self.history.append(
                HistoryRecord(step=start_step, prior=self.estimate.copy())
            )
        else:
            # init is the posterior before start_step; the first predict
            # produces the prior at start_step
            self.step_index = start_step - 1

    # subclass hooks -------------------------------------------------------

    def _transition(self, u) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        raise NotImplementedError

    def _fuse_current(self, z) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        raise NotImplementedError

    def _fuse_delayed(
        self, rec: HistoryRecord, f: np.ndarray, z: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        raise NotImplementedError

    # tick machinery -------------------------------------------------------

    @property
    def pending_count(self) -> int:
        return len(self._pending)

    def predict(self, u=None) -> GaussianEstimate:
        """Advance one tick with the input that drove the plant over it."""
        mean, cov, a = self._transition(u)
        last = self.history.last_record
        if last is not None:
            last.state_jacobian = a
        self.step_index += 1
        self.estimate = GaussianEstimate(mean, cov)
        self.history.append(
            HistoryRecord(step=self.step_index, prior=self.estimate.copy())
        )
        self._fused_this_step = False
        return self.estimate

    def _require_record(self) -> HistoryRecord:
        rec = self.history.last_record
        if rec is None or rec.step != self.step_index:
            raise RuntimeError("no prior recorded for the current step")
        if self._fused_this_step:
            raise RuntimeError(
                f"step {self.step_index} already fused a measurement"
            )
        return rec

    def _commit_fusion(
        self, rec: HistoryRecord, mean, cov, gain, h, origin_step: int
    ) -> None:
        rec.gain = gain
        rec.meas_jacobian = h
        self.estimate = GaussianEstimate(mean, cov)
        self._fused_this_step = True
        self.fused += 1
        self._last_fused_origin = origin_step

    def update(self, z) -> GaussianEstimate:
        """Fuse a measurement of the current step's state."""
        rec = self._require_record()
        mean, cov, gain, h = self._fuse_current(np.asarray(z, dtype=float))
        self._commit_fusion(rec, mean, cov, gain, h, self.step_index)
        return self.estimate

    def fuse_delayed(self, meas: DelayedMeasurement) -> np.ndarray | None:
        """Fuse one delayed measurement; returns the gain, or None if the
        measurement is out-of-sequence and was rejected."""
        rec = self._require_record()
        if (
            self._last_fused_origin is not None
            and meas.origin_step < self._last_fused_origin
        ):
            self.rejected += 1
            return None
        if meas.origin_step > self.step_index:
            raise ValueError("measurement originates in the future")
        origin_rec = self.history.get(meas.origin_step)
        f = propagation_matrix(self.history, meas.origin_step, self.step_index)
        mean, cov, gain, h = self._fuse_delayed(origin_rec, f, meas.value)
        self._commit_fusion(rec, mean, cov, gain, h, meas.origin_step)
        return gain

    def enqueue(self, deliveries: Iterable[DelayedMeasurement]) -> None:
        for meas in deliveries:
            heapq.heappush(
                self._pending, (meas.origin_step, self._pending_seq, meas)
            )
            self._pending_seq += 1

    def fuse_pending(self) -> np.ndarray | None:
        """Fuse the oldest-origin pending measurement, discarding any that
        are out-of-sequence; at most one fusion per step."""
        while self._pending:
            origin, _, meas = self._pending[0]
            if (
                self._last_fused_origin is not None
                and origin < self._last_fused_origin
            ):
                heapq.heappop(self._pending)
                self.rejected += 1
                continue
            heapq.heappop(self._pending)
            return self.fuse_delayed(meas)
        return None

    def advance(
        self, u=None, deliveries: Iterable[DelayedMeasurement] = ()
    ) -> GaussianEstimate:
        """One tick: predict, absorb deliveries, fuse at most one."""
        self.predict(u)
        self.enqueue(deliveries)
        self.fuse_pending()
        return self.estimate


class DelayAwareKalmanFilter(_DelayedFilterCore):
    """Linear filter fusing measurements that arrive with transport delay.

    With zero delays it reduces exactly to the standard Kalman filter.
    """

    def __init__(
        self,
        model: LinearModel,
        init: GaussianEstimate,
        start_step: int = 0,
        capacity: int = 64,
        init_is_prior: bool = False,
    ):
        super().__init__(init, start_step, capacity, init_is_prior)
        self.model = model

    @classmethod
    def from_prior(
        cls,
        model: LinearModel,
        prior: GaussianEstimate,
        step: int = 0,
        capacity: int = 64,
    ) -> "DelayAwareKalmanFilter":
        """Start from a prior already aligned with ``step``."""
        return cls(model, prior, start_step=step, capacity=capacity, init_is_prior=True)

    def _transition(self, u):
        m = self.model
        mean, cov = kernels().linear_predict(
            self.estimate.mean, self.estimate.cov, m.A, m.B, _as_input(u, m), m.Q
        )
        return mean, cov, m.A

    def _fuse_current(self, z):
        m = self.model
        mean, cov, gain = kernels().linear_update(
            self.estimate.mean, self.estimate.cov, m.H, m.R, z
        )
        return mean, cov, gain, m.H

    def _fuse_delayed(self, rec, f, z):
        m = self.model
        mean, cov, gain = kernels().delayed_update(
            self.estimate.mean,
            self.estimate.cov,
            rec.prior.mean,
            rec.prior.cov,
            f,
            m.H,
            m.R,
            z,
        )
        return mean, cov, gain, m.H


class DelayAwareEKF(_DelayedFilterCore):
    """Differential-drive pose filter fusing delayed pose measurements.

    The time update consumes the command actually applied by the actuator
    (which lags the commanded one when the control path is delayed); the
    data update fuses each measurement against the prior recorded at its
    origin step. Heading innovations are wrapped to (-pi, pi].
    """

    FILTER_ID = "po_ekf"

    def __init__(
        self,
        params: RobotParams,
        delta: float,
        meas_cov: np.ndarray,
        init: GaussianEstimate,
        start_step: int = 0,
        capacity: int = 64,
        init_is_prior: bool = False,
    ):
        if delta < 0.0:
            raise ValueError("delta must be non-negative")
        super().__init__(init, start_step, capacity, init_is_prior)
        self.params = params
        self.delta = delta
        self.meas_cov = np.ascontiguousarray(meas_cov, dtype=float)
        self._eye3 = np.eye(3)

    def _transition(self, u):
        if u is None:
            u = WheelSpeeds(0.0, 0.0)
        p = self.params
        return kernels().robot_predict(
            self.estimate.mean,
            self.estimate.cov,
            u.omega_left,
            u.omega_right,
            p.wheel_radius,
            p.wheel_base,
            p.sample_period,
            self.delta,
        )

    def _fuse_current(self, z):
        mean, cov, gain = kernels().robot_update(
            self.estimate.mean, self.estimate.cov, self.meas_cov, z
        )
        return mean, cov, gain, self._eye3

    def _fuse_delayed(self, rec, f, z):
        mean, cov, gain = kernels().robot_delayed_update(
            self.estimate.mean,
            self.estimate.cov,
            rec.prior.mean,
            rec.prior.cov,
            f,
            self.meas_cov,
            z,
        )
        return mean, cov, gain, self._eye3


class DelayNaiveEKF:
    """Baseline EKF that ignores transport delay entirely.

    It predicts with the currently commanded input and fuses every
    delivered measurement as if it observed the present state.
    """

    FILTER_ID = "ekf"

    def __init__(
        self,
        params: RobotParams,
        delta: float,
        meas_cov: np.ndarray,
        init: GaussianEstimate,
    ):
        if delta < 0.0:
            raise ValueError("delta must be non-negative")
        self.params = params
        self.delta = delta
        self.meas_cov = np.ascontiguousarray(meas_cov, dtype=float)
        self.estimate = init.copy()
        self.fused = 0

    def predict(self, u: WheelSpeeds | None = None) -> GaussianEstimate:
        if u is None:
            u = WheelSpeeds(0.0, 0.0)
        p = self.params
        mean, cov, _ = kernels().robot_predict(
            self.estimate.mean,
            self.estimate.cov,
            u.omega_left,
            u.omega_right,
            p.wheel_radius,
            p.wheel_base,
            p.sample_period,
            self.delta,
        )
        self.estimate = GaussianEstimate(mean, cov)
        return self.estimate

    def update(self, z) -> GaussianEstimate:
        z = np.atleast_1d(np.asarray(z, dtype=float))
        mean, cov, _ = kernels().robot_update(
            self.estimate.mean, self.estimate.cov, self.meas_cov, z
        )
        self.estimate = GaussianEstimate(mean, cov)
        self.fused += 1
        return self.estimate
