"""Oracle tests: reference policy competence, feedback sign/threshold/error logic."""

import numpy as np
import pytest

from ppmp.envs import Pendulum, MountainCar, make_env
from ppmp.oracle import OracleConfig, reference_action, feedback, availability


def rollout_reference(env_name: str, seed: int) -> float:
    env = make_env(env_name)
    rng = np.random.default_rng(seed)
    obs = env.reset(rng)
    total = 0.0
    while True:
        res = env.step(reference_action(env, obs))
        total += res.reward
        obs = res.observation
        if res.done:
            return total


def test_pendulum_reference_upright_rest_is_zero():
    obs = np.array([1.0, 0.0, 0.0])
    np.testing.assert_array_equal(reference_action("pendulum", obs), [0.0])


def test_pendulum_reference_stabilizer_gains():
    # inside the catch zone the action is the linear law -6*theta - 2*thetadot
    theta, thd = 0.05, -0.2
    obs = np.array([np.cos(theta), np.sin(theta), thd])
    expected = np.clip(-6.0 * theta - 2.0 * thd, -1, 1)
    assert abs(reference_action("pendulum", obs)[0] - expected) < 1e-12


def test_pendulum_reference_pumps_along_velocity():
    # hanging, low energy: push in the direction of motion
    theta = np.pi - 0.2
    obs = np.array([np.cos(theta), np.sin(theta), 1.5])
    assert reference_action("pendulum", obs)[0] == 1.0
    obs = np.array([np.cos(theta), np.sin(theta), -1.5])
    assert reference_action("pendulum", obs)[0] == -1.0


def test_pendulum_reference_coasts_when_energetic():
    # plenty of energy outside the catch zone: no torque
    theta = 1.0
    obs = np.array([np.cos(theta), np.sin(theta), 6.0])
    assert reference_action("pendulum", obs)[0] == 0.0


def test_mountaincar_reference_pushes_along_velocity():
    assert reference_action("mountaincar", np.array([-0.5, -0.01]))[0] == -1.0
    assert reference_action("mountaincar", np.array([-0.5, 0.01]))[0] == 1.0
    # at the standstill start it must commit to a direction
    assert reference_action("mountaincar", np.array([-0.5, 0.0]))[0] == 1.0


def test_mountaincar_reference_coasts_with_enough_energy():
    # moving right near the goal with speed: coast
    assert reference_action("mountaincar", np.array([0.3, 0.05]))[0] == 0.0


def test_reference_unknown_env():
    with pytest.raises(ValueError):
        reference_action("acrobot", np.zeros(2))


def test_pendulum_reference_return():
    returns = [rollout_reference("pendulum", seed) for seed in range(100)]
    assert np.mean(returns) >= -300.0


def test_mountaincar_reference_return():
    returns = [rollout_reference("mountaincar", seed) for seed in range(100)]
    assert np.mean(returns) >= 90.0
    assert min(returns) > 0.0  # every episode actually reaches the goal


def always_on() -> OracleConfig:
    return OracleConfig(env="pendulum", anneal=0.0)


def test_feedback_sign():
    # reference at upright rest is 0; a suggestion of -0.8 earns h = +1
    rng = np.random.default_rng(0)
    obs = np.array([1.0, 0.0, 0.0])
    h = feedback(obs, np.array([-0.8]), 0, always_on(), rng)
    np.testing.assert_array_equal(h, [1.0])
    h = feedback(obs, np.array([0.8]), 0, always_on(), rng)
    np.testing.assert_array_equal(h, [-1.0])


def test_feedback_indifference_region():
    # difference below d never triggers feedback, even with the coin forced on
    rng = np.random.default_rng(1)
    obs = np.array([1.0, 0.0, 0.0])  # reference action 0
    for a in (0.05, -0.06, 0.124, -0.1249):
        h = feedback(obs, np.array([a]), 0, always_on(), rng)
        np.testing.assert_array_equal(h, [0.0])
    h = feedback(obs, np.array([0.126]), 0, always_on(), rng)
    np.testing.assert_array_equal(h, [-1.0])


def test_feedback_exact_reference_value():
    # craft a state whose reference action is exactly +0.5 and check both sides
    theta = -1.0 / 12.0
    obs = np.array([np.cos(theta), np.sin(theta), 0.0])
    np.testing.assert_allclose(reference_action("pendulum", obs), [0.5], atol=1e-12)
    rng = np.random.default_rng(2)
    h = feedback(obs, np.array([-0.8]), 0, always_on(), rng)
    np.testing.assert_array_equal(h, [1.0])
    h = feedback(obs, np.array([0.45]), 0, always_on(), rng)  # within d
    np.testing.assert_array_equal(h, [0.0])


def test_feedback_points_toward_reference():
    rng = np.random.default_rng(3)
    cfg = always_on()
    env = Pendulum()
    for _ in range(500):
        obs = env.reset(rng)
        a = rng.uniform(-1, 1, size=1)
        h = feedback(obs, a, 0, cfg, rng)
        if h[0] != 0.0:
            a_star = reference_action("pendulum", obs)
            assert np.sign(a_star[0] - a[0]) == h[0]


def test_availability_formula_and_annealing():
    cfg = OracleConfig(env="pendulum", p0=1.0, anneal=2.3e-4)
    assert availability(cfg, 0) == 1.0
    assert abs(availability(cfg, 10_000) - np.exp(-2.3)) < 1e-12
    rng = np.random.default_rng(4)
    obs = np.array([1.0, 0.0, 0.0])
    early = sum(feedback(obs, np.array([0.9]), k, cfg, rng)[0] != 0
                for k in range(0, 2000))
    late = sum(feedback(obs, np.array([0.9]), k, cfg, rng)[0] != 0
               for k in range(18_000, 20_000))
    assert early > 1500
    assert late < early * 0.05


def test_error_rate_flip_frequency():
    # with a forced-on oracle and a saturated difference, every call yields
    # feedback; about error_rate of them must be flipped to -h
    cfg = OracleConfig(env="pendulum", anneal=0.0, error_rate=0.3)
    rng = np.random.default_rng(5)
    obs = np.array([1.0, 0.0, 0.0])  # reference 0, suggestion -0.9 => true h = +1
    n = 100_000
    flips = 0
    for _ in range(n):
        h = feedback(obs, np.array([-0.9]), 0, cfg, rng)
        assert h[0] != 0.0
        if h[0] == -1.0:
            flips += 1
    assert abs(flips / n - 0.3) < 0.01


def test_zero_error_rate_never_flips():
    cfg = OracleConfig(env="pendulum", anneal=0.0, error_rate=0.0)
    rng = np.random.default_rng(6)
    obs = np.array([1.0, 0.0, 0.0])
    for _ in range(2000):
        assert feedback(obs, np.array([-0.9]), 0, cfg, rng)[0] == 1.0


def test_config_validation():
    with pytest.raises(ValueError):
        OracleConfig(error_rate=0.5)
    with pytest.raises(ValueError):
        OracleConfig(error_rate=-0.1)
    with pytest.raises(ValueError):
        OracleConfig(d=0.0)
    with pytest.raises(ValueError):
        OracleConfig(p0=1.5)
    with pytest.raises(ValueError):
        OracleConfig(anneal=-1e-4)


def test_feedback_rejects_out_of_box_action():
    with pytest.raises(ValueError):
        feedback(np.array([1.0, 0.0, 0.0]), np.array([1.4]), 0, always_on(),
                 np.random.default_rng(0))


def test_feedback_determinism():
    cfg = OracleConfig(env="pendulum", error_rate=0.2)
    obs = np.array([0.5, np.sqrt(3) / 2, 2.0])
    a = np.array([0.3])
    rng1, rng2 = np.random.default_rng(9), np.random.default_rng(9)
    seq1 = [feedback(obs, a, k, cfg, rng1)[0] for k in range(50)]
    seq2 = [feedback(obs, a, k, cfg, rng2)[0] for k in range(50)]
    assert seq1 == seq2
