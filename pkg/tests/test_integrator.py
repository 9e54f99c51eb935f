"""Unit tests for the adaptive embedded Runge-Kutta integrator: accuracy,
dense output, events, monitors, and failure modes."""

import math

import numpy as np
import pytest

from statdyn.dynamics import ScenarioIHO, run_iho
from statdyn.integrator import (
    Event,
    IntegratorConfig,
    MaxStepsExceededError,
    NonFiniteStateError,
    StepSizeUnderflowError,
    integrate,
)
from statdyn.statcore import Statistics


def rotation_flow(t, y):
    return -1j * y


def growth_flow(t, y):
    return y.astype(complex)


# ---------------------------------------------------------------------------
# Accuracy on closed-form flows
# ---------------------------------------------------------------------------


def test_circular_rotation_returns_to_start():
    cfg = IntegratorConfig(t_end=2.0 * math.pi)
    traj = integrate(rotation_flow, np.array([1.0 + 0.0j]), cfg)
    assert abs(traj.states[-1, 0] - 1.0) < 1e-8


def test_exponential_growth():
    cfg = IntegratorConfig(t_end=3.0)
    traj = integrate(growth_flow, np.array([1.0 + 0.0j]), cfg)
    assert traj.states[-1, 0].real == pytest.approx(math.exp(3.0), rel=1e-8)


def test_dense_output_matches_analytic_solution():
    cfg = IntegratorConfig(t_end=10.0)
    traj = integrate(rotation_flow, np.array([1.0 + 0.0j]), cfg)
    ts = np.linspace(0.0, 10.0, 257)
    got = traj.sample(ts)[:, 0]
    want = np.exp(-1j * ts)
    assert np.max(np.abs(got - want)) < 1e-7
    dgot = traj.sample_derivative(ts)[:, 0]
    assert np.max(np.abs(dgot - (-1j * want))) < 1e-5


def test_final_time_is_exact():
    cfg = IntegratorConfig(t_end=1.7)
    traj = integrate(rotation_flow, np.array([1.0 + 0.0j]), cfg)
    assert traj.times[-1] == 1.7
    assert np.all(np.diff(traj.times) > 0)


def test_monitor_logged_at_every_accepted_step():
    cfg = IntegratorConfig(t_end=5.0)
    traj = integrate(
        rotation_flow,
        np.array([1.0 + 0.0j]),
        cfg,
        monitors=[lambda t, y: abs(y[0]) ** 2],
    )
    assert traj.conserved_log.shape == (len(traj.times), 1)
    # a few parts in 1e9 of drift is expected at rel_tol = 1e-9 over t = 5
    assert np.max(np.abs(traj.conserved_log - 1.0)) < 1e-8


def test_iho_energy_conservation_over_ten_units():
    # inverted-oscillator run, the conserved-energy monitor must stay within
    # 1e-6 relative drift across t in [0, 10]
    traj = run_iho(ScenarioIHO(Statistics.DISTINGUISHABLE, 0.7, -0.3), t_end=10.0)
    log = traj.conserved_log[:, 0]
    assert np.max(np.abs(log - log[0])) / abs(log[0]) <= 1e-6


# ---------------------------------------------------------------------------
# Convergence and determinism
# ---------------------------------------------------------------------------


def _iho_final_state(statistics, xdot0, rel_tol, abs_tol):
    traj = run_iho(
        ScenarioIHO(statistics, 0.7, xdot0), t_end=8.0, rel_tol=rel_tol, abs_tol=abs_tol
    )
    return traj.states[-1, 0]


def test_tolerance_halving_never_increases_error():
    for statistics in (Statistics.DISTINGUISHABLE, Statistics.FERMION):
        for xdot0 in (-0.3, -0.8, -1.3):
            reference = _iho_final_state(statistics, xdot0, 1e-12, 1e-14)
            errors = []
            rel, absolute = 1e-5, 1e-7
            for _ in range(5):
                state = _iho_final_state(statistics, xdot0, rel, absolute)
                errors.append(abs(state - reference) / max(1.0, abs(reference)))
                rel, absolute = rel / 2.0, absolute / 2.0
            for coarse, fine in zip(errors, errors[1:]):
                assert fine <= coarse * (1.0 + 1e-12), errors


def test_event_times_reproducible_and_accurate():
    # Im z = -sin t crosses zero upward at t = pi
    event = Event(fn=lambda t, y: y[0].imag, direction=+1, name="crossing")
    cfg = IntegratorConfig(t_end=5.0)
    times = []
    for _ in range(2):
        traj = integrate(rotation_flow, np.array([1.0 + 0.0j]), cfg, events=[event])
        hits = [e for e in traj.events if e.name == "crossing"]
        assert len(hits) == 1
        times.append(hits[0].t)
    assert times[0] == times[1]
    assert times[0] == pytest.approx(math.pi, abs=1e-6)


def test_terminal_event_stops_integration():
    event = Event(fn=lambda t, y: y[0].real, direction=-1, terminal=True, name="stop")
    cfg = IntegratorConfig(t_end=50.0)
    traj = integrate(rotation_flow, np.array([1.0 + 0.0j]), cfg, events=[event])
    # Re z = cos t first crosses zero downward at t = pi/2
    assert traj.times[-1] == pytest.approx(math.pi / 2.0, abs=1e-6)
    assert traj.times[-1] < 2.0


def test_event_direction_filtering():
    rising = Event(fn=lambda t, y: y[0].imag, direction=+1, name="up")
    falling = Event(fn=lambda t, y: y[0].imag, direction=-1, name="down")
    cfg = IntegratorConfig(t_end=4.0 * math.pi)
    traj = integrate(
        rotation_flow, np.array([1.0 + 0.0j]), cfg, events=[rising, falling]
    )
    ups = [e.t for e in traj.events if e.name == "up"]
    downs = [e.t for e in traj.events if e.name == "down"]
    assert np.allclose(ups, [math.pi, 3.0 * math.pi], atol=1e-6)
    assert np.allclose(downs, [2.0 * math.pi, 4.0 * math.pi], atol=1e-4) or np.allclose(
        downs, [2.0 * math.pi], atol=1e-6
    )


def test_truncate_cuts_trajectory():
    cfg = IntegratorConfig(t_end=10.0)
    traj = integrate(
        rotation_flow,
        np.array([1.0 + 0.0j]),
        cfg,
        monitors=[lambda t, y: abs(y[0]) ** 2],
    )
    cut = traj.truncate(4.0)
    assert cut.times[-1] == 4.0
    assert abs(cut.states[-1, 0] - np.exp(-4j)) < 1e-7
    assert cut.conserved_log.shape[0] == len(cut.times)
    sampled = cut.sample(np.array([3.9999]))[0, 0]
    assert abs(sampled - np.exp(-1j * 3.9999)) < 1e-7


# ---------------------------------------------------------------------------
# Failure modes
# ---------------------------------------------------------------------------


def test_max_steps_exceeded():
    cfg = IntegratorConfig(t_end=1000.0, max_steps=10)
    with pytest.raises(MaxStepsExceededError):
        integrate(rotation_flow, np.array([1.0 + 0.0j]), cfg)


def test_step_size_underflow_near_singularity():
    # y' = -1 / (2 y) drives y = sqrt(1 - t) into a square-root singularity
    def flow(t, y):
        return -0.5 / y

    cfg = IntegratorConfig(t_end=2.0, max_steps=10_000_000)
    with pytest.raises((StepSizeUnderflowError, NonFiniteStateError)):
        integrate(flow, np.array([1.0 + 0.0j]), cfg)


def test_non_finite_state_detected():
    def flow(t, y):
        if t > 0.5:
            return np.array([complex(float("nan"), 0.0)])
        return y

    cfg = IntegratorConfig(t_end=2.0)
    with pytest.raises((NonFiniteStateError, StepSizeUnderflowError)):
        integrate(flow, np.array([1.0 + 0.0j]), cfg)


def test_rejects_non_finite_initial_state():
    cfg = IntegratorConfig(t_end=1.0)
    with pytest.raises(NonFiniteStateError):
        integrate(rotation_flow, np.array([complex(float("inf"), 0.0)]), cfg)


def test_config_validation():
    with pytest.raises(ValueError):
        IntegratorConfig(t_end=-1.0)
    with pytest.raises(ValueError):
        IntegratorConfig(t_end=1.0, rel_tol=0.0)
    with pytest.raises(ValueError):
        IntegratorConfig(t_end=1.0, max_steps=0)


def test_sample_outside_interval_rejected():
    cfg = IntegratorConfig(t_end=1.0)
    traj = integrate(rotation_flow, np.array([1.0 + 0.0j]), cfg)
    with pytest.raises(ValueError):
        traj.sample(np.array([1.5]))
    with pytest.raises(ValueError):
        traj.truncate(2.0)
