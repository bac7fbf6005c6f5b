"""Tests for the Euler-Maruyama simulator and transition statistics."""
import math

import numpy as np
import pytest
from pydantic import ValidationError

from carbonate import BistableOscillator, CarbonateSystem
from dynamics import Method, Trajectory, find_cycles, integrate
from gmam import GmamConfig, quasipotential_to_cycle
from stochastic import (
    BLOCK_STEPS,
    SimConfig,
    TransitionBundle,
    block_generator,
    block_normals,
    bundle_concordance,
    choose_epsilon,
    detect_transition,
    euler_maruyama,
    simulate_ensemble,
    transition_counts,
    transition_segment,
)


@pytest.fixture(scope="module")
def oscillator_cycles():
    system = BistableOscillator()
    unstable, stable = find_cycles(system, np.zeros(2), n_points=512)
    return system, unstable, stable


def _ramp_trajectory(escape_at=5.0, ramp=2.0, r0=0.01, r1=None, n=400, dt=0.05, excursion=None):
    """Circular motion at radius r0, then a linear ramp onto the stable cycle."""
    r1 = BistableOscillator().stable_radius if r1 is None else r1
    t = np.arange(n) * dt
    s = np.clip(t - escape_at, 0.0, ramp)
    r = r0 + (r1 - r0) * s / ramp
    if excursion is not None:
        lo, hi, radius = excursion
        r = np.where((t >= lo) & (t < hi), radius, r)
    states = np.column_stack([r * np.cos(t), r * np.sin(t)])
    return Trajectory(times=t, states=states, dt=dt)


# Random streams

def test_block_streams_are_keyed():
    a = block_generator(7, 3, 0).standard_normal(4)
    assert np.array_equal(a, block_generator(7, 3, 0).standard_normal(4))
    assert not np.array_equal(a, block_generator(7, 3, 1).standard_normal(4))
    assert not np.array_equal(a, block_generator(7, 4, 0).standard_normal(4))
    assert not np.array_equal(a, block_generator(8, 3, 0).standard_normal(4))


def test_block_normals_shape_and_independence_of_batch():
    both = block_normals(11, np.array([0, 5]), 2, 100)
    alone = block_normals(11, np.array([5]), 2, 100)
    assert both.shape == (100, 2, 2)
    assert np.array_equal(both[:, 1], alone[:, 0])


def test_seed_accepts_full_u64_range():
    block_generator(2 ** 64 - 1, 0, 0).standard_normal()
    SimConfig(seed=2 ** 64 - 1)
    with pytest.raises(ValidationError):
        SimConfig(seed=-1)


def test_sim_config_validation():
    with pytest.raises(ValidationError):
        SimConfig(epsilon=0.0)
    with pytest.raises(ValidationError):
        SimConfig(n_paths=10, paths=10)


# Simulation

def test_zero_noise_reproduces_euler(oscillator):
    config = SimConfig(dt=1e-3, t_max=2.0, record_every=1, n_paths=1)
    noisy_free = euler_maruyama(oscillator, (0.5, 0.3), config, epsilon=0.0)
    euler = integrate(oscillator, (0.5, 0.3), 2.0, 1e-3, method=Method.EULER)
    assert np.array_equal(noisy_free.states, euler.states)
    assert np.array_equal(noisy_free.times, euler.times)


def test_recording_includes_final_step(linear):
    config = SimConfig(dt=0.1, t_max=1.05, record_every=4, epsilon=0.1)
    traj = euler_maruyama(linear, (1.0, 1.0), config)
    # 11 steps recorded at 0, 4, 8 and 11
    assert len(traj) == 4
    assert traj.times[-1] == pytest.approx(1.05)


def test_ensemble_is_independent_of_workers(oscillator):
    config = SimConfig(epsilon=0.3, dt=1e-3, t_max=0.5, n_paths=130, seed=42, record_every=50)
    inline = simulate_ensemble(oscillator, (0.1, 0.0), config, workers=1)
    pooled = simulate_ensemble(oscillator, (0.1, 0.0), config, workers=2)
    assert len(inline) == len(pooled) == 130
    for a, b in zip(inline, pooled):
        assert np.array_equal(a.states, b.states)


def test_single_path_matches_its_ensemble_slot(oscillator):
    config = SimConfig(epsilon=0.3, dt=1e-3, t_max=0.5, n_paths=80, seed=9, record_every=25)
    ensemble = simulate_ensemble(oscillator, (0.1, 0.0), config)
    single = euler_maruyama(oscillator, (0.1, 0.0), config, path_id=70)
    assert np.array_equal(single.states, ensemble[70].states)
    assert ensemble[70].metadata["path_id"] == 70
    shifted = simulate_ensemble(oscillator, (0.1, 0.0), config.model_copy(update={"n_paths": 5}),
                                first_path_id=70)
    assert np.array_equal(shifted[0].states, ensemble[70].states)


def test_streams_cross_block_boundary(linear):
    config = SimConfig(epsilon=0.2, dt=1e-3, t_max=(BLOCK_STEPS + 500) * 1e-3, n_paths=2, seed=5)
    first = simulate_ensemble(linear, (0.0, 0.0), config)
    again = simulate_ensemble(linear, (0.0, 0.0), config)
    assert np.array_equal(first[1].states, again[1].states)
    assert not np.array_equal(first[0].states, first[1].states)


def test_ornstein_uhlenbeck_moments(linear):
    eps = 0.5
    config = SimConfig(epsilon=eps, dt=1e-3, t_max=1.0, n_paths=1000, seed=2024, record_every=1000)
    finals = np.array([t.end for t in simulate_ensemble(linear, (1.0, 0.0), config)])
    variance = eps ** 2 * (1.0 - math.exp(-2.0)) / 2.0
    stderr = math.sqrt(variance / len(finals))
    np.testing.assert_allclose(finals.mean(axis=0), [math.exp(-1.0), 0.0], atol=4 * stderr)
    np.testing.assert_allclose(finals.var(axis=0), variance, rtol=0.15)


def test_non_finite_state_aborts_path(oscillator):
    config = SimConfig(epsilon=0.01, dt=0.1, t_max=5.0, record_every=1)
    with np.errstate(over="ignore", invalid="ignore"):
        traj = euler_maruyama(oscillator, (10.0, 0.0), config)
    assert traj.aborted
    assert len(traj) < 51
    assert np.all(np.isfinite(traj.states))


def test_concentration_floor_is_clamped(bistable_params):
    system = CarbonateSystem(bistable_params, c_min=1.0)
    config = SimConfig(epsilon=0.5, dt=1e-3, t_max=0.1, record_every=1, seed=1)
    traj = euler_maruyama(system, (1.0, 2000.0), config)
    assert traj.clamp_count > 0
    assert np.all(traj.states[:, 0] >= 1.0)
    assert not traj.aborted


# Transition detection

def test_no_transition_when_staying_home(oscillator_cycles):
    _, unstable, stable = oscillator_cycles
    traj = _ramp_trajectory(escape_at=1e9)
    record = detect_transition(traj, np.zeros(2), stable, unstable)
    assert not record.transitioned
    assert record.inner_fraction == 1.0


def test_transition_exit_and_arrival(oscillator_cycles):
    _, unstable, stable = oscillator_cycles
    traj = _ramp_trajectory()
    record = detect_transition(traj, np.zeros(2), stable, unstable)
    assert record.transitioned
    assert record.exit_index == 116
    assert record.arrival_index == 138
    assert record.exit_time == pytest.approx(5.8)
    assert record.arrival_time == pytest.approx(6.9)


def test_exit_is_last_crossing_before_arrival(oscillator_cycles):
    _, unstable, stable = oscillator_cycles
    traj = _ramp_trajectory(excursion=(2.0, 2.5, 0.8))
    record = detect_transition(traj, np.zeros(2), stable, unstable)
    assert record.exit_index == 116


def test_short_visit_is_not_a_transition(oscillator_cycles):
    _, unstable, stable = oscillator_cycles
    # Half a period on the stable cycle, then back home for good
    traj = _ramp_trajectory(escape_at=1e9, excursion=(5.0, 5.0 + math.pi, BistableOscillator().stable_radius))
    record = detect_transition(traj, np.zeros(2), stable, unstable)
    assert not record.transitioned


def _visit_trajectory(samples_on_cycle, begin=100, n=400, dt=0.05):
    """Near the origin, on the stable cycle for a given number of samples, then back."""
    t = np.arange(n) * dt
    r = np.full(n, 0.01)
    r[begin:begin + samples_on_cycle] = BistableOscillator().stable_radius
    states = np.column_stack([r * np.cos(t), r * np.sin(t)])
    return Trajectory(times=t, states=states, dt=dt)


def test_dwell_must_span_a_full_period(oscillator_cycles):
    _, unstable, stable = oscillator_cycles
    samples = math.ceil(stable.period / 0.05)
    # samples points cover only (samples - 1) * dt < period
    short = detect_transition(_visit_trajectory(samples), np.zeros(2), stable, unstable)
    assert not short.transitioned
    full = detect_transition(_visit_trajectory(samples + 1), np.zeros(2), stable, unstable)
    assert full.transitioned
    assert full.arrival_index == 100


def test_transition_segment_starts_at_last_ball_exit(oscillator_cycles):
    _, unstable, stable = oscillator_cycles
    traj = _ramp_trajectory()
    record = detect_transition(traj, np.zeros(2), stable, unstable)
    delta = 0.02 * unstable.bounding_box_diagonal
    segment = transition_segment(traj, record, np.zeros(2), delta)
    assert len(segment) == 39
    np.testing.assert_array_equal(segment[0], traj.states[100])
    np.testing.assert_array_equal(segment[-1], traj.states[138])


def test_concordance_on_synthetic_bundle(oscillator_cycles):
    _, _, stable = oscillator_cycles
    hist = np.zeros((10, 10))
    hist[np.arange(10), np.arange(10)] = 0.08
    hist[0, 9] = 0.2
    edges = np.linspace(10.0, 20.0, 11)
    bundle = TransitionBundle(
        histogram=hist, c_edges=edges, w_edges=edges, n_transitions=1, n_paths=1,
        epsilon=0.1, seed=0, delta=0.0, tube_w=0.0,
    )
    diagonal = np.column_stack([np.linspace(10.5, 19.5, 10)] * 2)
    assert bundle_concordance(bundle, diagonal, np.zeros(2), stable) == 1.0
    corner = np.array([[12.5, 17.5], [17.5, 12.5], [25.0, 25.0]])
    assert bundle_concordance(bundle, corner, np.zeros(2), stable) == 0.0


@pytest.fixture(scope="module")
def stiff_oscillator_cycles():
    # Low barrier (about 0.05) and a stable cycle that attracts fast enough
    # for noisy paths to stay inside the 2% tube for a whole period
    system = BistableOscillator(a=-1.0, b=10.0)
    unstable, stable = find_cycles(system, np.zeros(2), n_points=512)
    return system, unstable, stable


@pytest.fixture(scope="module")
def anisotropic_cycles():
    # Radial decay faster than the rotation and weak noise in y: escapes
    # leave along the noisy axis instead of in every direction
    system = BistableOscillator(a=-2.0, b=10.0, sigma=(1.0, 0.25))
    unstable, stable = find_cycles(system, np.zeros(2), n_points=512)
    return system, unstable, stable


@pytest.mark.slow
def test_bundle_follows_minimum_action_path(anisotropic_cycles):
    system, unstable, stable = anisotropic_cycles
    config = SimConfig(epsilon=0.25, dt=1e-3, t_max=20.0, n_paths=64, seed=17)
    bundle = choose_epsilon(system, config, np.zeros(2), stable, unstable, min_transitions=20, bins=40)
    assert bundle.n_transitions >= 20
    assert bundle.histogram.sum() == pytest.approx(1.0)
    assert bundle.histogram.shape == (40, 40)
    assert bundle.metadata()["bins"] == [40, 40]

    result = quasipotential_to_cycle(
        system, np.zeros(2), stable, n_candidates=24,
        config=GmamConfig(n_points=150, max_outer_iters=3000),
    )
    assert bundle_concordance(bundle, result.path.points, np.zeros(2), stable) >= 0.7


@pytest.mark.slow
def test_choose_epsilon_doubles_until_enough(stiff_oscillator_cycles):
    system, unstable, stable = stiff_oscillator_cycles
    config = SimConfig(epsilon=0.1, dt=2e-3, t_max=10.0, n_paths=64, seed=3)
    bundle = choose_epsilon(system, config, np.zeros(2), stable, unstable, min_transitions=20)
    assert bundle.n_transitions >= 20
    assert bundle.epsilon >= 0.1
    assert math.log2(bundle.epsilon / 0.1) == pytest.approx(round(math.log2(bundle.epsilon / 0.1)))


@pytest.mark.slow
def test_fewer_transitions_at_weaker_noise(stiff_oscillator_cycles):
    system, unstable, stable = stiff_oscillator_cycles
    config = SimConfig(epsilon=0.4, dt=2e-3, t_max=10.0, n_paths=64, seed=11)
    counts = transition_counts(system, config, np.zeros(2), stable, unstable, [0.4, 0.2, 0.1])
    assert counts[0] >= counts[1] >= counts[2]
    assert counts[0] > counts[2]
