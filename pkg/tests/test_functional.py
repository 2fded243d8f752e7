import math

import numpy as np
import pytest

from backflow.errors import DomainError
from backflow.functional import backflow_functional, positive_intervals
from backflow.trajectory import Trajectory


def test_four_sample_example():
    traj = Trajectory(np.array([0.0, 1.0, 2.0, 3.0]),
                      np.array([0.0, 1.0, 0.5, 2.0]))
    res = backflow_functional(traj)
    assert res.n_i == 2.5
    assert [(a, b) for a, b, _ in res.intervals] == [(0.0, 1.0), (2.0, 3.0)]
    assert [r for _, _, r in res.intervals] == [1.0, 1.5]
    assert positive_intervals(traj) == [(0.0, 1.0), (2.0, 3.0)]


def test_monotone_decreasing_is_zero():
    t = np.linspace(0.0, 5.0, 200)
    res = backflow_functional(Trajectory(t, np.exp(-t)))
    assert res.n_i == 0.0
    assert res.intervals == ()


def test_constant_is_zero():
    t = np.linspace(0.0, 1.0, 50)
    assert backflow_functional(Trajectory(t, np.full(50, 0.7))).n_i == 0.0


def test_flat_segments_merge_one_rise():
    # a plateau inside a rise must not split the interval
    t = np.arange(6.0)
    v = np.array([0.0, 1.0, 1.0, 1.0, 2.0, 1.5])
    res = backflow_functional(Trajectory(t, v))
    assert len(res.intervals) == 1
    t0, t1, rise = res.intervals[0]
    assert (t0, t1) == (0.0, 4.0)
    assert rise == 2.0


def test_edge_flats_are_trimmed():
    t = np.arange(6.0)
    v = np.array([1.0, 1.0, 0.5, 1.5, 1.5, 1.5])
    res = backflow_functional(Trajectory(t, v))
    assert [(a, b) for a, b, _ in res.intervals] == [(2.0, 3.0)]


def test_epsilon_filters_small_intervals():
    t = np.arange(5.0)
    v = np.array([0.0, 0.3, 0.0, 2.0, 0.0])
    res = backflow_functional(Trajectory(t, v), epsilon=0.5)
    assert res.n_i == 2.0
    assert len(res.intervals) == 1
    assert res.epsilon == 0.5
    # threshold is strict: rise equal to epsilon is discarded
    res2 = backflow_functional(Trajectory(t, v), epsilon=2.0)
    assert res2.n_i == 0.0


def test_epsilon_suppresses_noise_floor():
    rng = np.random.default_rng(3)
    t = np.linspace(0.0, 5.0, 400)
    sigma = 1e-3
    v = np.exp(-t) + sigma * rng.standard_normal(t.size)
    noisy = backflow_functional(Trajectory(t, v))
    assert noisy.n_i > 0.0
    cleaned = backflow_functional(Trajectory(t, v), epsilon=6.0 * sigma)
    assert cleaned.n_i == 0.0


def test_telescoping_identity_random_trajectories():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        n = int(rng.integers(2, 60))
        t = np.cumsum(rng.uniform(0.1, 1.0, n))
        v = rng.standard_normal(n).cumsum()
        traj = Trajectory(t, v)
        rises = backflow_functional(traj).n_i
        rev = Trajectory(t, v[::-1].copy())
        falls = backflow_functional(rev).n_i
        assert abs((v[-1] - v[0]) - (rises - falls)) < 1e-12


def test_time_reversal_swaps_rises_and_falls():
    rng = np.random.default_rng(5)
    t = np.cumsum(rng.uniform(0.1, 1.0, 300))
    v = rng.standard_normal(300).cumsum()
    fwd = backflow_functional(Trajectory(t, v))
    rev = backflow_functional(Trajectory(t, v[::-1].copy()))
    drop = math.fsum(  # total fall of the forward path, interval by interval
        r for _, _, r in rev.intervals)
    assert abs((fwd.n_i - drop) - (v[-1] - v[0])) < 1e-12


def test_oscillatory_closed_form_against_extremum_oracle():
    # I(t) = 1/4 e^{-2t} sin^2(3t): maxima where tan(3t) = 3, minima at
    # multiples of pi/3 where I = 0, so the exact backflow is the sum of
    # the maxima values plus the partial rise cut off at the horizon
    t = np.linspace(0.0, 20.0, 400001)
    v = 0.25 * np.exp(-2.0 * t) * np.sin(3.0 * t) ** 2
    got = backflow_functional(Trajectory(t, v)).n_i

    ref = 0.0
    k = 0
    while True:
        tk = (math.atan(3.0) + k * math.pi) / 3.0
        if tk > 20.0:
            # horizon lands inside segment k: rising part from the segment
            # start (value 0) up to t = 20 if the maximum was cut off
            seg_start = k * math.pi / 3.0
            if seg_start < 20.0:
                ref += 0.25 * math.exp(-40.0) * math.sin(60.0) ** 2
            break
        ref += 0.25 * math.exp(-2.0 * tk) * 0.9
        k += 1
    assert abs(got - ref) < 1e-6


def test_refinement_consistency():
    # doubling sample density moves n_i by at most the curvature bound
    def signal(t):
        return 0.25 * np.exp(-2.0 * t) * np.sin(3.0 * t) ** 2

    t1 = np.linspace(0.0, 20.0, 20001)
    t2 = np.linspace(0.0, 20.0, 40001)
    n1 = backflow_functional(Trajectory(t1, signal(t1))).n_i
    n2 = backflow_functional(Trajectory(t2, signal(t2))).n_i
    # |I''| <= 13/4 on [0,20]; ~13 extrema each biased by I'' dt^2 / 8
    dt = t1[1] - t1[0]
    assert abs(n2 - n1) < 13 * (13.0 / 4.0) * dt * dt / 8.0


def test_rejects_bad_inputs():
    with pytest.raises(DomainError):
        Trajectory(np.array([0.0, 0.0, 1.0]), np.zeros(3))
    with pytest.raises(DomainError):
        Trajectory(np.array([0.0]), np.array([1.0]))
    with pytest.raises(DomainError):
        Trajectory(np.array([0.0, 1.0]), np.array([1.0, np.inf]))
    traj = Trajectory(np.array([0.0, 1.0]), np.array([0.0, 1.0]))
    with pytest.raises(DomainError):
        backflow_functional(traj, epsilon=-1.0)
