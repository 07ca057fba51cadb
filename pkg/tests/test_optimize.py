import numpy as np
import pytest

from qentangle.bell import BellSettings, Classification, evaluate
from qentangle.errors import ArgumentError, BracketError
from qentangle.models import Model3Params, Model4Params, phi1, psi5, psi7
from qentangle.optimize import (
    Mode,
    OptimizerConfig,
    TransitionQuery,
    count_distinct,
    find_transition,
    optimize,
    restart_angles,
    sample_direction,
    _Objective,
)
from qentangle.states import correlation_tensor, ghz_state, random_state, w_state


def test_sample_direction():
    rng = np.random.default_rng(0)
    vs = np.array([sample_direction(rng).as_array() for _ in range(100_000)])
    assert np.abs(np.linalg.norm(vs, axis=1) - 1).max() < 1e-12
    assert np.abs(vs.mean(axis=0)).max() < 0.02
    a = [sample_direction(np.random.default_rng(3)) for _ in range(2)]
    assert a[0] == a[1]


def test_config_validation():
    with pytest.raises(ArgumentError):
        OptimizerConfig(restarts=0)
    with pytest.raises(ArgumentError):
        OptimizerConfig(local_tol=0)
    assert OptimizerConfig(mode="b").mode is Mode.MaximizeSumSq


def test_gradient_matches_finite_difference():
    rng = np.random.default_rng(1)
    for n in (3, 4):
        T = correlation_tensor(random_state(n, n))
        for mode in Mode:
            obj = _Objective(T, mode, False)
            x = rng.uniform(0, np.pi, 4 * n)
            val, grad = obj(x)
            h = 1e-6
            fd = np.array([(obj(x + h * e)[0] - obj(x - h * e)[0]) / (2 * h) for e in np.eye(x.size)])
            assert np.abs(fd - grad).max() < 1e-6


def test_reference_optima():
    o = optimize(ghz_state(3))
    assert abs(o.value_f - 4.0) < 0.01 and abs(o.value_fprime) < 0.02 and abs(o.sum_sq - 16) < 0.05
    o = optimize(w_state(3))
    assert abs(o.value_f - 3.05) < 0.01
    assert abs(abs(o.value_fprime) - 0.05) < 0.02
    assert abs(o.sum_sq - 9.305) < 0.05
    assert o.classification is Classification.ThreeQubitCompatible
    o = optimize(psi7(Model3Params(1, 5)), OptimizerConfig(mode=Mode.MaximizeSumSq))
    assert abs(o.sum_sq - 8.0) < 0.02


def test_ghz4_ladder():
    for mode in Mode:
        o = optimize(ghz_state(4), OptimizerConfig(mode=mode, restarts=16))
        assert o.sum_sq <= 32 + 1e-6
        assert abs(o.sum_sq - 32) < 1e-3
        assert abs(o.value_f) <= 4 * np.sqrt(2) + 1e-6


def test_settings_reproduce_value():
    for seed in range(5):
        s = random_state(3 + seed % 2, seed)
        for mode in Mode:
            o = optimize(s, OptimizerConfig(mode=mode, restarts=8, seed=seed))
            again = evaluate(s, o.settings)
            assert abs(again.value_f - o.value_f) < 1e-9
            assert abs(again.value_fprime - o.value_fprime) < 1e-9


def test_mode_b_dominates_mode_a():
    for seed in range(10):
        s = random_state(3 + seed % 2, 100 + seed)
        a = optimize(s, OptimizerConfig(restarts=16, seed=seed))
        b = optimize(s, OptimizerConfig(mode=Mode.MaximizeSumSq, restarts=16, seed=seed))
        assert b.sum_sq >= a.sum_sq - 1e-6
        assert a.value_f >= 0


def test_determinism_and_monotonicity():
    s = random_state(3, 42)
    a = optimize(s, OptimizerConfig(restarts=8, seed=5))
    b = optimize(s, OptimizerConfig(restarts=8, seed=5))
    assert a == b
    prev = -np.inf
    for k in (1, 2, 4, 8, 16):
        o = optimize(s, OptimizerConfig(restarts=k, seed=5))
        assert o.value_f >= prev
        prev = o.value_f
    assert np.array_equal(restart_angles(5, 3, 3), restart_angles(5, 3, 3))


def test_warm_start_used():
    s = w_state(3)
    best = optimize(s, OptimizerConfig(restarts=16))
    warm = optimize(s, OptimizerConfig(restarts=1, seed=99), [best.settings])
    assert warm.value_f >= best.value_f - 1e-9


def test_wrong_size():
    with pytest.raises(ArgumentError):
        optimize(random_state(2, 0))
    with pytest.raises(ArgumentError):
        optimize(random_state(5, 0))


def test_count_distinct():
    assert count_distinct([1.0, 1.0 + 1e-8, 2.0]) == 2
    assert count_distinct([]) == 0


def test_xy_plane_keeps_z_zero():
    o = optimize(ghz_state(3), OptimizerConfig(restarts=8, xy_plane=True))
    assert np.abs(o.settings.as_array()[..., 2]).max() < 1e-12
    assert abs(o.value_f - 4) < 1e-6


def test_transitions():
    cfg = OptimizerConfig(restarts=16)
    q = TransitionQuery(lambda d: psi5(Model3Params(1, d)), "delta", (0.5, 2.0))
    assert abs(find_transition(q, cfg) - 1.03) < 0.05
    q = TransitionQuery(lambda d: psi7(Model3Params(1, d)), "delta", (2.0, 4.0))
    assert abs(find_transition(q, cfg) - 2.97) < 0.05
    q = TransitionQuery(lambda J: phi1(Model4Params(J, 2.0)), "J", (1.0, 3.0))
    assert abs(find_transition(q, cfg) - 1.94) < 0.05


def test_transition_errors():
    with pytest.raises(ArgumentError):
        TransitionQuery(lambda d: psi5(Model3Params(1, d)), "delta", (2.0, 1.0))
    with pytest.raises(ArgumentError):
        TransitionQuery(lambda d: psi5(Model3Params(1, d)), "delta", (1.0, 2.0), threshold=0)
    q = TransitionQuery(lambda d: psi5(Model3Params(1, d)), "delta", (3.0, 5.0), scan_points=3)
    with pytest.raises(BracketError):
        find_transition(q, OptimizerConfig(restarts=4))
