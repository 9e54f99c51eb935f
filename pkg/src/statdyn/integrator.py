"""Adaptive embedded Runge-Kutta integration with dense output and events.

A Dormand-Prince 4(5) stepper with proportional step control, cubic Hermite
dense output between accepted steps, monitored scalar quantities recorded at
every accepted step, and sign-crossing events located by bisection on the
dense output to a fixed time tolerance. Works on real or complex 1-D state
vectors. Deterministic: identical inputs produce bit-identical trajectories.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "IntegrationError",
    "StepSizeUnderflowError",
    "MaxStepsExceededError",
    "NonFiniteStateError",
    "IntegratorConfig",
    "Event",
    "EventHit",
    "Trajectory",
    "integrate",
]

EVENT_TIME_TOL = 1e-10


class IntegrationError(Exception):
    """Base class for integration failures."""


class StepSizeUnderflowError(IntegrationError):
    """Step size collapsed below the resolvable limit (stiff or singular flow)."""


class MaxStepsExceededError(IntegrationError):
    """Exceeded the configured accepted-step budget."""


class NonFiniteStateError(IntegrationError):
    """State or derivative became non-finite during a step."""


@dataclass(frozen=True)
class IntegratorConfig:
    """Tolerances and limits for integrate().

    Attributes
    ----------
    t_end : float
        Final time (integration starts at 0).
    rel_tol, abs_tol : float
        Local error control per step: the weighted RMS of the embedded
        error estimate against abs_tol + rel_tol * |y| must not exceed 1.
    max_step : float
        Upper bound on the step size.
    initial_step : float or None
        Starting step; None selects one automatically.
    max_steps : int
        Cap on accepted steps.
    """

    t_end: float
    rel_tol: float = 1e-9
    abs_tol: float = 1e-11
    max_step: float = math.inf
    initial_step: float | None = None
    max_steps: int = 10_000_000

    def __post_init__(self) -> None:
        if not math.isfinite(self.t_end) or self.t_end <= 0.0:
            raise ValueError("t_end must be finite and positive")
        if self.rel_tol <= 0.0 or self.abs_tol <= 0.0:
            raise ValueError("tolerances must be positive")
        if self.max_step <= 0.0:
            raise ValueError("max_step must be positive")
        if self.initial_step is not None and self.initial_step <= 0.0:
            raise ValueError("initial_step must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")


@dataclass(frozen=True)
class Event:
    """Sign-crossing detector g(t, y) tracked along the trajectory.

    direction > 0 records only upward crossings, < 0 only downward, 0 both.
    A terminal event stops the integration at the located crossing.
    """

    fn: Callable[[float, np.ndarray], float]
    direction: int = 0
    terminal: bool = False
    name: str = ""


@dataclass(frozen=True)
class EventHit:
    """A located event crossing."""

    index: int
    name: str
    t: float
    y: np.ndarray


# Dormand-Prince 4(5) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_A_ROWS = tuple(np.array(row) for row in _A)
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
# Difference between the 5th and 4th order weights
_E = np.array(
    [71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40]
)


@dataclass
class Trajectory:
    """Accepted-step record of one integration.

    Attributes
    ----------
    times : numpy.ndarray
        Accepted step times, starting at 0.
    states : numpy.ndarray
        State at each accepted time, shape (len(times), dim).
    derivs : numpy.ndarray
        Flow evaluated at each accepted state (enables dense output).
    conserved_log : numpy.ndarray
        Monitored scalars at each accepted time, shape (len(times), n_mon).
    events : list of EventHit
        Located event crossings in time order.
    """

    times: np.ndarray
    states: np.ndarray
    derivs: np.ndarray
    conserved_log: np.ndarray
    events: list[EventHit] = field(default_factory=list)

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    def _locate(self, ts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        ts = np.asarray(ts, dtype=float)
        if np.any(ts < self.times[0] - 1e-12) or np.any(ts > self.times[-1] + 1e-12):
            raise ValueError("sample times outside the integrated interval")
        ts = np.clip(ts, self.times[0], self.times[-1])
        idx = np.clip(np.searchsorted(self.times, ts, side="right") - 1, 0, len(self.times) - 2)
        return ts, idx

    def sample(self, ts: np.ndarray | float) -> np.ndarray:
        """Cubic Hermite interpolation of the state at arbitrary times."""
        scalar = np.isscalar(ts)
        ts, idx = self._locate(np.atleast_1d(ts))
        t0 = self.times[idx]
        h = self.times[idx + 1] - t0
        theta = ((ts - t0) / h)[:, None]
        y0, y1 = self.states[idx], self.states[idx + 1]
        f0, f1 = self.derivs[idx], self.derivs[idx + 1]
        hh = h[:, None]
        one = 1.0 - theta
        h00 = (1.0 + 2.0 * theta) * one * one
        h10 = theta * one * one
        h01 = theta * theta * (3.0 - 2.0 * theta)
        h11 = theta * theta * (theta - 1.0)
        out = h00 * y0 + h10 * hh * f0 + h01 * y1 + h11 * hh * f1
        return out[0] if scalar else out

    def sample_derivative(self, ts: np.ndarray | float) -> np.ndarray:
        """Time derivative of the Hermite interpolant at arbitrary times."""
        scalar = np.isscalar(ts)
        ts, idx = self._locate(np.atleast_1d(ts))
        t0 = self.times[idx]
        h = self.times[idx + 1] - t0
        theta = ((ts - t0) / h)[:, None]
        y0, y1 = self.states[idx], self.states[idx + 1]
        f0, f1 = self.derivs[idx], self.derivs[idx + 1]
        hh = h[:, None]
        d00 = 6.0 * theta * (theta - 1.0) / hh
        d10 = 3.0 * theta * theta - 4.0 * theta + 1.0
        d01 = -6.0 * theta * (theta - 1.0) / hh
        d11 = 3.0 * theta * theta - 2.0 * theta
        out = d00 * y0 + d10 * f0 + d01 * y1 + d11 * f1
        return out[0] if scalar else out

    def truncate(self, t_cut: float) -> "Trajectory":
        """Restrict the trajectory to [0, t_cut], interpolating the endpoint."""
        if not self.times[0] <= t_cut <= self.times[-1]:
            raise ValueError("t_cut outside the integrated interval")
        keep = int(np.searchsorted(self.times, t_cut, side="left"))
        times = np.append(self.times[:keep], t_cut)
        states = np.vstack([self.states[:keep], self.sample(t_cut)[None, :]])
        derivs = np.vstack([self.derivs[:keep], self.sample_derivative(t_cut)[None, :]])
        if self.conserved_log.size:
            grid = np.empty((len(times), self.conserved_log.shape[1]))
            grid[:keep] = self.conserved_log[:keep]
            for j in range(self.conserved_log.shape[1]):
                grid[keep, j] = np.interp(t_cut, self.times, self.conserved_log[:, j])
            log = grid
        else:
            log = np.zeros((len(times), 0))
        events = [ev for ev in self.events if ev.t <= t_cut]
        return Trajectory(times, states, derivs, log, events)


def _error_norm(err: np.ndarray, y0: np.ndarray, y1: np.ndarray, cfg: IntegratorConfig) -> float:
    scale = cfg.abs_tol + cfg.rel_tol * np.maximum(np.abs(y0), np.abs(y1))
    return float(np.sqrt(np.mean(np.abs(err / scale) ** 2)))


def _initial_step(
    flow: Callable, y0: np.ndarray, f0: np.ndarray, cfg: IntegratorConfig
) -> float:
    """Hairer-style automatic initial step selection."""
    scale = cfg.abs_tol + cfg.rel_tol * np.abs(y0)
    d0 = float(np.sqrt(np.mean(np.abs(y0 / scale) ** 2)))
    d1 = float(np.sqrt(np.mean(np.abs(f0 / scale) ** 2)))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, cfg.t_end)
    y1 = y0 + h0 * f0
    f1 = np.asarray(flow(h0, y1))
    d2 = float(np.sqrt(np.mean(np.abs((f1 - f0) / scale) ** 2))) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100.0 * h0, h1, cfg.t_end, cfg.max_step)


def _hermite_point(
    t0: float, h: float, y0: np.ndarray, y1: np.ndarray, f0: np.ndarray, f1: np.ndarray, t: float
) -> np.ndarray:
    theta = (t - t0) / h
    one = 1.0 - theta
    return (
        (1.0 + 2.0 * theta) * one * one * y0
        + theta * one * one * h * f0
        + theta * theta * (3.0 - 2.0 * theta) * y1
        + theta * theta * (theta - 1.0) * h * f1
    )


def integrate(
    flow: Callable[[float, np.ndarray], np.ndarray],
    y0: np.ndarray | Sequence[complex],
    cfg: IntegratorConfig,
    monitors: Sequence[Callable[[float, np.ndarray], float]] = (),
    events: Sequence[Event] = (),
) -> Trajectory:
    """Integrate dy/dt = flow(t, y) from t = 0 to cfg.t_end.

    Parameters
    ----------
    flow : callable
        Right-hand side; receives (t, y) and returns dy/dt. Exceptions it
        raises propagate unchanged.
    y0 : array_like
        Initial state, real or complex 1-D.
    cfg : IntegratorConfig
    monitors : sequence of callables
        Scalars evaluated and logged at every accepted step.
    events : sequence of Event
        Sign-crossing detectors; crossings are bisected to 1e-10 in time on
        the dense output and recorded. Terminal events stop the run.

    Returns
    -------
    Trajectory
    """
    y = np.atleast_1d(np.asarray(y0))
    if y.ndim != 1:
        raise ValueError("state must be one-dimensional")
    if not np.all(np.isfinite(np.abs(y))):
        raise NonFiniteStateError("initial state is not finite")

    t = 0.0
    f = np.asarray(flow(t, y))
    h = cfg.initial_step if cfg.initial_step is not None else _initial_step(flow, y, f, cfg)
    h = min(h, cfg.max_step, cfg.t_end)

    times = [t]
    states = [y.copy()]
    derivs = [f.copy()]
    mon_log = [[float(m(t, y)) for m in monitors]]
    hits: list[EventHit] = []
    g_prev = [float(ev.fn(t, y)) for ev in events]

    k = np.empty((7, y.size), dtype=np.result_type(y.dtype, f.dtype, np.float64))
    n_accepted = 0
    finished = False

    while not finished:
        if n_accepted >= cfg.max_steps:
            raise MaxStepsExceededError(f"exceeded {cfg.max_steps} accepted steps")
        if h < 16.0 * np.finfo(float).eps * max(1.0, abs(t)):
            raise StepSizeUnderflowError(f"step size underflow at t = {t:.6g}")
        remaining = cfg.t_end - t
        h = min(h, remaining)
        last = h >= remaining * (1.0 - 1e-12)

        k[0] = f
        for i in range(1, 7):
            yi = y + h * (k[:i].T @ _A_ROWS[i])
            k[i] = flow(t + _C[i] * h, yi)
        y_new = y + h * (k.T @ _B)
        err_vec = h * (k.T @ _E)
        if not np.all(np.isfinite(np.abs(y_new))) or not np.all(np.isfinite(np.abs(k[6]))):
            raise NonFiniteStateError(f"non-finite state during step at t = {t:.6g}")
        err = _error_norm(err_vec, y, y_new, cfg)

        if err > 1.0:
            h *= max(0.2, 0.9 * err**-0.2)
            continue

        t_new = cfg.t_end if last else t + h
        # FSAL: stage 7 is the flow at (t_new, y_new). Copy it out of the
        # stage array, which the next attempt overwrites in place.
        f_new = k[6].copy()

        # event handling on the dense output of this step
        stop_at: tuple[float, np.ndarray] | None = None
        for ie, ev in enumerate(events):
            g_new = float(ev.fn(t_new, y_new))
            crossed = (
                (g_prev[ie] < 0.0 <= g_new and ev.direction >= 0)
                or (g_prev[ie] > 0.0 >= g_new and ev.direction <= 0)
            )
            if crossed:
                lo, hi = t, t_new
                g_lo = g_prev[ie]
                while hi - lo > EVENT_TIME_TOL:
                    mid = 0.5 * (lo + hi)
                    y_mid = _hermite_point(t, h, y, y_new, f, f_new, mid)
                    g_mid = float(ev.fn(mid, y_mid))
                    if (g_lo < 0.0) == (g_mid < 0.0):
                        lo, g_lo = mid, g_mid
                    else:
                        hi = mid
                t_star = 0.5 * (lo + hi)
                y_star = _hermite_point(t, h, y, y_new, f, f_new, t_star)
                hits.append(EventHit(index=ie, name=ev.name, t=t_star, y=y_star))
                if ev.terminal and stop_at is None:
                    stop_at = (t_star, y_star)
            g_prev[ie] = g_new

        if stop_at is not None:
            t_new, y_new = stop_at
            f_new = np.asarray(flow(t_new, y_new))
            finished = True
        elif last:
            finished = True

        t, y, f = t_new, y_new, f_new
        times.append(t)
        states.append(y.copy())
        derivs.append(f.copy())
        mon_log.append([float(m(t, y)) for m in monitors])
        n_accepted += 1

        factor = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err**-0.2))
        h = min(h * factor, cfg.max_step)

    return Trajectory(
        times=np.array(times),
        states=np.array(states),
        derivs=np.array(derivs),
        conserved_log=np.array(mon_log, dtype=float).reshape(len(times), len(monitors)),
        events=hits,
    )
