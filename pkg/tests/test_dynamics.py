"""Tests for integration, equilibria, limit cycles and the regime scan."""
import math

import numpy as np
import pytest
from scipy.linalg import expm

from carbonate import CarbonateSystem, LinearSystem
from dynamics import (
    Direction,
    LimitCycle,
    Method,
    Regime,
    RegimeReport,
    Stability,
    Trajectory,
    classify_regime,
    eigenvalues,
    find_cycles,
    find_fixed_point,
    find_limit_cycle,
    find_thresholds,
    integrate,
    is_monotone,
    is_stable,
    scan_regimes,
)
from config import get_config
from dynamics import regimes as regimes_module
from errors import CycleSearchError, DomainError, DomainExitError, NoCycleError


# Integration

def test_trajectory_validation():
    with pytest.raises(ValueError):
        Trajectory(times=[0.0, 1.0], states=np.zeros((3, 2)), dt=1.0)
    with pytest.raises(ValueError):
        Trajectory(times=[0.0, 0.0], states=np.zeros((2, 2)), dt=1.0)


def test_integrate_lands_on_end_time(linear):
    traj = integrate(linear, (1.0, 0.5), t_end=1.0, dt=0.3)
    assert len(traj) == 5
    assert traj.times[-1] == pytest.approx(1.0, rel=1e-14)
    assert traj.dt == pytest.approx(0.25)
    assert traj.metadata == {"direction": "forward", "method": "rk4"}


def test_integrate_stays_at_fixed_point(carbonate):
    fp = find_fixed_point(carbonate)
    traj = integrate(carbonate, fp, t_end=2.0, dt=1e-3)
    assert np.max(np.abs(traj.states - fp)) < 1e-6


def test_rk4_is_fourth_order():
    matrix = np.array([[-0.5, 1.0], [-1.0, -0.5]])
    system = LinearSystem(matrix)
    x0 = np.array([1.0, 0.0])
    exact = expm(matrix * 2.0) @ x0
    errors = [
        np.linalg.norm(integrate(system, x0, 2.0, dt).end - exact)
        for dt in (0.1, 0.05)
    ]
    assert errors[0] / errors[1] == pytest.approx(16.0, rel=0.1)


def test_euler_is_first_order():
    system = LinearSystem()
    x0 = np.array([1.0, 2.0])
    exact = math.exp(-1.0) * x0
    errors = [
        np.linalg.norm(integrate(system, x0, 1.0, dt, method=Method.EULER).end - exact)
        for dt in (1e-3, 5e-4)
    ]
    assert errors[0] / errors[1] == pytest.approx(2.0, rel=0.05)


def test_backward_integration_inverts_forward(linear):
    forward = integrate(linear, (0.3, -0.7), 1.5, 1e-3)
    back = integrate(linear, forward.end, 1.5, 1e-3, direction=Direction.BACKWARD)
    np.testing.assert_allclose(back.end, [0.3, -0.7], atol=1e-10)
    assert back.metadata["direction"] == "backward"
    assert np.all(np.diff(back.times) > 0)


def test_integrate_rejects_bad_step(linear):
    with pytest.raises(DomainError):
        integrate(linear, (0.0, 0.0), 1.0, 0.0)


def test_domain_exit_is_reported(bistable_params):
    system = CarbonateSystem(bistable_params)
    # A coarse Euler step overshoots c below zero
    with pytest.raises(DomainExitError) as exc:
        integrate(system, (5.0, 0.0), t_end=10.0, dt=1.0, method=Method.EULER)
    assert exc.value.time == pytest.approx(1.0)


# Fixed points

def test_fixed_point_residual_and_stability(carbonate):
    fp = find_fixed_point(carbonate)
    assert np.max(np.abs(carbonate.drift(fp))) < 1e-10
    assert is_stable(carbonate, fp)
    assert np.all(eigenvalues(carbonate, fp).real < 0)


def test_fixed_point_independent_of_guess(carbonate):
    reference = find_fixed_point(carbonate)
    perturbed = find_fixed_point(carbonate, guess=reference * np.array([1.01, 0.995]))
    np.testing.assert_allclose(perturbed, reference, rtol=1e-9)


def test_fixed_point_of_reference_systems(double_well, oscillator):
    np.testing.assert_allclose(find_fixed_point(double_well, guess=np.array([0.9, 0.1])), [1.0, 0.0], atol=1e-10)
    np.testing.assert_array_equal(find_fixed_point(oscillator), [0.0, 0.0])
    assert is_stable(oscillator, np.zeros(2))
    assert not is_stable(double_well, np.zeros(2))


# Limit cycles

def _radii(cycle: LimitCycle) -> np.ndarray:
    return np.linalg.norm(cycle.points, axis=1)


def test_oscillator_cycles(oscillator):
    unstable, stable = find_cycles(oscillator, np.zeros(2), n_points=512)
    assert unstable.stability is Stability.UNSTABLE
    assert stable.stability is Stability.STABLE
    np.testing.assert_allclose(_radii(unstable), oscillator.unstable_radius, rtol=1e-4)
    np.testing.assert_allclose(_radii(stable), oscillator.stable_radius, rtol=1e-4)
    assert unstable.period == pytest.approx(2 * math.pi, rel=1e-4)
    assert stable.period == pytest.approx(2 * math.pi, rel=1e-4)
    assert stable.n_points == 512
    assert stable.closure < 1e-12


def test_cycle_follows_forward_orientation(oscillator):
    unstable, stable = find_cycles(oscillator, np.zeros(2))
    for cycle in (unstable, stable):
        x, y = cycle.points[:-1, 0], cycle.points[:-1, 1]
        signed_area = 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)
        assert signed_area > 0  # counter-clockwise, like the flow


def test_cycle_containment_and_distance(oscillator):
    unstable, stable = find_cycles(oscillator, np.zeros(2))
    assert stable.contains(np.zeros((1, 2)))[0]
    assert unstable.contains(np.zeros((1, 2)))[0]
    inside = stable.contains(np.array([[1.0, 0.0], [2.0, 0.0]]))
    assert list(inside) == [True, False]
    dist = stable.distance(np.array([[2.0, 0.0]]))
    assert dist[0] == pytest.approx(2.0 - oscillator.stable_radius, abs=1e-3)


def test_no_unstable_cycle_around_unstable_point(double_well):
    with pytest.raises(NoCycleError):
        find_limit_cycle(double_well, Stability.UNSTABLE, fixed_point=np.zeros(2))


def test_stable_focus_without_cycle_diverges():
    focus = LinearSystem(np.array([[-0.5, 1.0], [-1.0, -0.5]]))
    with pytest.raises(NoCycleError):
        find_limit_cycle(focus, Stability.UNSTABLE, fixed_point=np.zeros(2))


def test_cycle_search_out_of_steps_is_inconclusive(oscillator, monkeypatch):
    monkeypatch.setattr(get_config().cycles, "max_steps", 10)
    with pytest.raises(CycleSearchError):
        find_limit_cycle(oscillator, Stability.UNSTABLE, fixed_point=np.zeros(2))


def test_limit_cycle_validation():
    with pytest.raises(ValueError):
        LimitCycle(points=np.zeros((10, 2)), period=1.0, stability="stable")
    with pytest.raises(ValueError):
        LimitCycle(points=np.zeros((100, 2)), period=0.0, stability="stable")


# Regimes

def test_is_monotone():
    def report(c_x, regime):
        return RegimeReport(c_x=c_x, regime=regime)
    ordered = [
        report(50.0, Regime.SINGLE_STABLE_POINT),
        report(58.0, Regime.BISTABLE),
        report(59.0, Regime.FAILED),
        report(70.0, Regime.CYCLE_ONLY),
    ]
    assert is_monotone(ordered)
    assert not is_monotone(ordered + [report(75.0, Regime.BISTABLE)])


def test_scan_rejects_values_outside_window(bistable_params):
    with pytest.raises(DomainError):
        scan_regimes([30.0], bistable_params)


@pytest.mark.params
@pytest.mark.slow
def test_regimes_at_reference_points(params):
    assert classify_regime(50.0, params).regime is Regime.SINGLE_STABLE_POINT
    report = classify_regime(62.0, params, with_cycles=True)
    assert report.regime is Regime.BISTABLE
    assert report.fixed_point_stable
    assert report.stable_cycle.contains(report.unstable_cycle.points).all()
    assert classify_regime(70.0, params).regime is Regime.CYCLE_ONLY


@pytest.mark.params
@pytest.mark.slow
def test_scan_thresholds(params):
    reports = scan_regimes(np.linspace(50.0, 70.0, 11), params)
    assert is_monotone(reports)
    assert not any(r.regime is Regime.FAILED for r in reports)
    thresholds = find_thresholds(reports, params)
    assert thresholds["single-stable-point/bistable"] == pytest.approx(55.89, abs=0.5)
    assert thresholds["bistable/cycle-only"] == pytest.approx(62.61, abs=0.5)


def _stub_stable_point(monkeypatch, cycle_error):
    monkeypatch.setattr(regimes_module, "find_fixed_point", lambda system: np.array([100.0, 2100.0]))
    monkeypatch.setattr(regimes_module, "is_stable", lambda system, fp: True)

    def no_cycle(*args, **kwargs):
        raise cycle_error
    monkeypatch.setattr(regimes_module, "find_limit_cycle", no_cycle)


def test_missing_unstable_cycle_means_single_point(synthetic_params, monkeypatch):
    _stub_stable_point(monkeypatch, NoCycleError("return map diverged (amplitude 1e9)"))
    assert classify_regime(50.0, synthetic_params).regime is Regime.SINGLE_STABLE_POINT


def test_inconclusive_cycle_search_is_failed(synthetic_params, monkeypatch):
    _stub_stable_point(monkeypatch, CycleSearchError("return map not converged after 10 steps"))
    report = classify_regime(50.0, synthetic_params)
    assert report.regime is Regime.FAILED
    assert report.error.startswith("CycleSearchError")


def test_empty_scan(synthetic_params):
    assert scan_regimes([], synthetic_params) == []
