"""Agent tests: OU noise, gating, training updates, mode identity, checkpoints."""

import numpy as np
import pytest

from ppmp.agent import Agent, AgentConfig, OUProcess, save_checkpoint, load_checkpoint
from ppmp.envs import make_env
from ppmp.oracle import OracleConfig, feedback
from ppmp.predictor import predict, q_filter


def tiny_cfg(**kw) -> AgentConfig:
    base = dict(hidden=(16, 12), n_heads=4, batch_size=8, n_pred=10, n_qfilter=20)
    base.update(kw)
    return AgentConfig(**base)


def deterministic_feedback(ocfg: OracleConfig):
    """Stateless feedback closure: reproducible from the step index alone."""
    def fn(s, a_q, k):
        return feedback(s, a_q, k, ocfg, np.random.default_rng(k))
    return fn


# -- OU noise -------------------------------------------------------------------


def test_ou_zero_volatility_geometric_decay():
    ou = OUProcess(1, volatility=0.0, damping=0.5, dt=0.1)
    ou.nu = np.array([1.0])
    rng = np.random.default_rng(0)
    for i in range(1, 20):
        nu = ou.step(rng)
        assert abs(nu[0] - (1.0 - 0.05) ** i) < 1e-12


def test_ou_stationary_std():
    # long run std approaches volatility / sqrt(2 * damping)
    ou = OUProcess(1, volatility=0.3, damping=0.15, dt=0.01)
    rng = np.random.default_rng(1)
    burn = 20_000
    draws = []
    for i in range(200_000):
        nu = ou.step(rng)
        if i >= burn:
            draws.append(nu[0])
    target = 0.3 / np.sqrt(2 * 0.15)
    assert abs(np.std(draws) - target) < 0.05 * target


def test_ou_reset_zeroes_state():
    ou = OUProcess(2)
    ou.step(np.random.default_rng(2))
    assert np.any(ou.nu != 0.0)
    ou.reset()
    np.testing.assert_array_equal(ou.nu, [0.0, 0.0])


def test_ou_parameter_validation():
    with pytest.raises(ValueError):
        OUProcess(1, dt=0.0)
    with pytest.raises(ValueError):
        OUProcess(1, volatility=-0.1)


# -- acting ---------------------------------------------------------------------


def test_act_is_policy_plus_noise_clipped():
    agent = Agent(3, 1, tiny_cfg(), rng=0)
    agent.begin_episode()
    for p in agent.actor.params():
        p[...] = 0.0
    # zero actor: the action is exactly the OU noise (clipped)
    rng_clone = np.random.default_rng()
    rng_clone.bit_generator.state = agent.rng.bit_generator.state
    ou_clone = OUProcess(1, agent.cfg.ou_volatility, agent.cfg.ou_damping,
                         agent.cfg.ou_dt)
    ou_clone.nu = agent.ou.nu.copy()
    for _ in range(50):
        expected = np.clip(ou_clone.step(rng_clone), -1, 1)
        np.testing.assert_array_equal(agent.act(np.zeros(3)), expected)


def test_act_clips_saturated_policy():
    agent = Agent(3, 1, tiny_cfg(), rng=0)
    agent.begin_episode()
    agent.actor.head_b[...] = 10.0  # tanh ~ 1 for every head
    for _ in range(20):
        a = agent.act(np.zeros(3))
        assert -1.0 <= a[0] <= 1.0


def test_eval_action_is_single_head_and_draws_nothing():
    agent = Agent(3, 1, tiny_cfg(), rng=3)
    s = np.array([0.5, -0.5, 1.0])
    state_before = agent.rng.bit_generator.state
    for head in range(agent.cfg.n_heads):
        out = agent.eval_action(s, head)
        np.testing.assert_allclose(out, agent.actor.forward(s, head=head), atol=1e-15)
    assert agent.rng.bit_generator.state == state_before


def test_eval_action_uses_filter_once_predictor_ready():
    env = make_env("pendulum")
    agent = Agent(env.obs_dim, env.act_dim, tiny_cfg(n_pred=5, n_qfilter=10), rng=6)
    fb = deterministic_feedback(OracleConfig(env="pendulum"))
    s = env.reset(1)
    agent.begin_episode()
    for _ in range(30):
        _, res, _ = agent.step_and_train(env, s, fb)
        s = res.observation
    assert agent.gate.predictor_ready and agent.gate.qfilter_enabled
    probe = np.array([0.3, -0.4, 0.2])
    a_p = agent.actor.forward(probe, head=2)
    a_c = predict(agent.predictor, probe, agent.gate, 0.0, None)
    a = agent.eval_action(probe, head=2)
    np.testing.assert_array_equal(a, q_filter(probe, a_p, a_c, agent.critic, agent.gate))
    assert np.array_equal(a, a_p) or np.array_equal(a, a_c)


def test_eval_action_ignores_predictor_outside_ppmp():
    for mode in ("pmp", "ddpg"):
        agent = Agent(3, 1, tiny_cfg(mode=mode, n_pred=0, n_qfilter=0), rng=8)
        agent.gate.train_updates = 1  # gates wide open; mode must still win
        s = np.array([0.1, 0.2, -0.3])
        np.testing.assert_array_equal(agent.eval_action(s, 1),
                                      agent.actor.forward(s, head=1))


def test_head_usage_frequency():
    agent = Agent(3, 1, tiny_cfg(n_heads=4), rng=4)
    counts = np.zeros(4)
    n = 10_000
    for _ in range(n):
        agent.begin_episode()
        counts[agent.active_head] += 1
    np.testing.assert_allclose(counts / n, 0.25, atol=0.02)


# -- gating through the step loop -------------------------------------------------


def test_suggestion_is_policy_action_before_predictor_gate():
    env = make_env("pendulum")
    agent = Agent(env.obs_dim, env.act_dim, tiny_cfg(n_pred=40, n_qfilter=80), rng=5)
    s = env.reset(0)
    agent.begin_episode()
    for _ in range(39):
        _, res, diag = agent.step_and_train(env, s, None)
        np.testing.assert_array_equal(diag["a_q"], diag["a_p"])
        assert diag["a_c"] is None
        s = res.observation


def test_prediction_used_between_gates():
    env = make_env("pendulum")
    ocfg = OracleConfig(env="pendulum")
    agent = Agent(env.obs_dim, env.act_dim, tiny_cfg(n_pred=30, n_qfilter=10 ** 9),
                  rng=6)
    s = env.reset(0)
    agent.begin_episode()
    fb = deterministic_feedback(ocfg)
    saw_prediction = False
    for _ in range(120):
        _, res, diag = agent.step_and_train(env, s, fb)
        if diag["a_c"] is not None:
            np.testing.assert_array_equal(diag["a_q"], diag["a_c"])
            saw_prediction = True
        s = res.observation
    assert saw_prediction
    assert agent.gate.train_updates > 0


def test_qfilter_returns_candidate_after_gate():
    env = make_env("pendulum")
    ocfg = OracleConfig(env="pendulum")
    agent = Agent(env.obs_dim, env.act_dim, tiny_cfg(n_pred=20, n_qfilter=40), rng=7)
    s = env.reset(0)
    agent.begin_episode()
    fb = deterministic_feedback(ocfg)
    checked = 0
    for _ in range(120):
        _, res, diag = agent.step_and_train(env, s, fb)
        if agent.total_steps > 40 and diag["a_c"] is not None:
            assert (np.array_equal(diag["a_q"], diag["a_p"])
                    or np.array_equal(diag["a_q"], diag["a_c"]))
            checked += 1
        s = res.observation
    assert checked > 50


def test_feedback_fills_corrected_buffer_with_executed_action():
    env = make_env("pendulum")
    agent = Agent(env.obs_dim, env.act_dim, tiny_cfg(), rng=8)
    s = env.reset(0)
    agent.begin_episode()
    always_right = lambda s_, a_, k_: np.array([1.0])
    a, res, diag = agent.step_and_train(env, s, always_right)
    assert len(agent.corrected) == 1
    stored_s, stored_a = agent.corrected.items()[0]
    np.testing.assert_array_equal(stored_s, s)
    np.testing.assert_array_equal(stored_a, a)
    assert diag["correction"] > 0.0
    assert a[0] > diag["a_q"][0]  # h = +1 pushes up


def test_correction_magnitude_in_bounds():
    env = make_env("pendulum")
    agent = Agent(env.obs_dim, env.act_dim, tiny_cfg(), rng=9)
    s = env.reset(1)
    agent.begin_episode()
    always_right = lambda s_, a_, k_: np.array([1.0])
    for _ in range(30):
        a, res, diag = agent.step_and_train(env, s, always_right)
        if -1.0 < a[0] < 1.0:  # unclipped
            assert 0.25 - 1e-9 <= diag["correction"] <= 0.75 + 1e-9
        s = res.observation
        if res.done:
            break


def test_ddpg_ignores_feedback_fn():
    env = make_env("pendulum")
    agent = Agent(env.obs_dim, env.act_dim, tiny_cfg(mode="ddpg"), rng=10)
    s = env.reset(0)
    agent.begin_episode()
    calls = []

    def spy(s_, a_, k_):
        calls.append(k_)
        return np.array([1.0])

    for _ in range(30):
        _, res, diag = agent.step_and_train(env, s, spy)
        np.testing.assert_array_equal(diag["h"], [0.0])
        s = res.observation
    assert calls == []
    assert len(agent.corrected) == 0


# -- training updates --------------------------------------------------------------


def test_no_training_until_full_batch():
    env = make_env("pendulum")
    agent = Agent(env.obs_dim, env.act_dim, tiny_cfg(batch_size=12), rng=11)
    s = env.reset(0)
    agent.begin_episode()
    before = [p.copy() for p in agent.critic.params()]
    for _ in range(11):
        _, res, diag = agent.step_and_train(env, s, None)
        assert "critic_loss" not in diag
        s = res.observation
    for b, p in zip(before, agent.critic.params()):
        np.testing.assert_array_equal(b, p)
    _, res, diag = agent.step_and_train(env, s, None)
    assert "critic_loss" in diag


def test_critic_targets_gamma_zero_is_reward():
    agent = Agent(3, 1, tiny_cfg(gamma=0.0), rng=12)
    rng = np.random.default_rng(0)
    r = rng.normal(size=6)
    s2 = rng.normal(size=(6, 3))
    done = np.zeros(6)
    heads = np.zeros(6, dtype=int)
    np.testing.assert_allclose(agent.critic_targets(r, s2, done, heads), r, atol=1e-15)


def test_critic_targets_terminal_ignores_next_state():
    agent = Agent(3, 1, tiny_cfg(), rng=13)
    rng = np.random.default_rng(1)
    r = rng.normal(size=4)
    done = np.ones(4)
    heads = np.arange(4) % agent.cfg.n_heads
    y1 = agent.critic_targets(r, rng.normal(size=(4, 3)), done, heads)
    y2 = agent.critic_targets(r, rng.normal(size=(4, 3)), done, heads)
    np.testing.assert_allclose(y1, r, atol=1e-15)
    np.testing.assert_array_equal(y1, y2)


def test_critic_targets_use_stored_head():
    agent = Agent(3, 1, tiny_cfg(), rng=14)
    # make head outputs differ a lot
    agent.actor_target.head_b[0] = 3.0
    agent.actor_target.head_b[1] = -3.0
    s2 = np.zeros((1, 3))
    r = np.zeros(1)
    done = np.zeros(1)
    y_h0 = agent.critic_targets(r, s2, done, np.array([0]))
    y_h1 = agent.critic_targets(r, s2, done, np.array([1]))
    assert y_h0[0] != y_h1[0]
    # matches a manual evaluation through the target networks
    a2 = agent.actor_target.forward(s2[0], head=0)
    q2 = agent.critic_target.forward(np.concatenate([s2[0], a2]), head=0)
    assert abs(y_h0[0] - agent.cfg.gamma * q2[0]) < 1e-15


def test_nonfinite_reward_skips_critic_update():
    env = make_env("pendulum")
    agent = Agent(env.obs_dim, env.act_dim, tiny_cfg(batch_size=4), rng=15)
    s = env.reset(0)
    agent.begin_episode()
    for _ in range(4):
        a = agent.act(s)
        res = env.step(a)
        agent.observe(s, a, np.nan, res.observation, res.done)  # poison
        s = res.observation
    before = [p.copy() for p in agent.critic.params()]
    diag = agent.train_step()
    assert not np.isfinite(diag["critic_loss"])
    assert agent.train_faults >= 1
    for b, p in zip(before, agent.critic.params()):
        np.testing.assert_array_equal(b, p)


class PlantedCritic:
    """Critic stand-in scoring -(a - target)^2 with exact input gradients."""

    def __init__(self, obs_dim, target):
        self.obs_dim, self.target = obs_dim, target

    def input_gradient(self, x, upstream, head=0):
        x = np.atleast_2d(x)
        grad = np.zeros_like(x)
        grad[:, self.obs_dim:] = -2.0 * (x[:, self.obs_dim:] - self.target)
        return grad * upstream


def test_actor_update_moves_all_heads_toward_planted_optimum():
    agent = Agent(3, 1, tiny_cfg(lr_actor=5e-3), rng=16)
    agent.critic = PlantedCritic(3, target=0.3)
    rng = np.random.default_rng(2)
    s = rng.normal(size=(16, 3))
    for _ in range(800):
        agent._train_actor(s)
    outs = agent.actor.forward(s, head=None)  # (16, heads, 1)
    np.testing.assert_allclose(outs, 0.3, atol=0.05)


def test_actor_update_zero_gradient_fixpoint():
    agent = Agent(3, 1, tiny_cfg(), rng=17)

    class ZeroCritic:
        def input_gradient(self, x, upstream, head=0):
            return np.zeros_like(np.atleast_2d(x))

    agent.critic = ZeroCritic()
    before = [p.copy() for p in agent.actor.params()]
    agent._train_actor(np.random.default_rng(3).normal(size=(8, 3)))
    for b, p in zip(before, agent.actor.params()):
        np.testing.assert_array_equal(b, p)


def test_target_networks_start_as_copies_and_lag():
    env = make_env("pendulum")
    agent = Agent(env.obs_dim, env.act_dim, tiny_cfg(), rng=18)
    for o, t in zip(agent.actor.params(), agent.actor_target.params()):
        np.testing.assert_array_equal(o, t)
    for o, t in zip(agent.critic.params(), agent.critic_target.params()):
        np.testing.assert_array_equal(o, t)
    s = env.reset(0)
    agent.begin_episode()
    for _ in range(30):
        _, res, _ = agent.step_and_train(env, s, None)
        s = res.observation
    # online moved; target trails between old and new by the small tau blend
    diffs = [np.max(np.abs(o - t)) for o, t in
             zip(agent.critic.params(), agent.critic_target.params())]
    assert max(diffs) > 0.0


# -- mode identity ------------------------------------------------------------------


def run_trajectory(mode: str, steps: int, seed: int = 99):
    env = make_env("pendulum")
    cfg = tiny_cfg(mode=mode, n_pred=50, n_qfilter=100)
    ss = np.random.SeedSequence(seed).spawn(2)
    env_rng = np.random.default_rng(ss[0])
    agent = Agent(env.obs_dim, env.act_dim, cfg, rng=np.random.default_rng(ss[1]))
    s = env.reset(env_rng)
    agent.begin_episode()
    actions, states = [], []
    for _ in range(steps):
        a, res, _ = agent.step_and_train(env, s, None)
        actions.append(a.copy())
        states.append(res.observation.copy())
        s = res.observation
        if res.done:
            s = env.reset(env_rng)
            agent.begin_episode()
    return np.array(actions), np.array(states)


def test_modes_identical_without_feedback():
    # with zero feedback the corrective machinery must be exactly inert:
    # all three modes produce bit-identical trajectories from equal seeds
    a_ppmp, s_ppmp = run_trajectory("ppmp", 400)
    a_pmp, s_pmp = run_trajectory("pmp", 400)
    a_ddpg, s_ddpg = run_trajectory("ddpg", 400)
    np.testing.assert_array_equal(a_ppmp, a_pmp)
    np.testing.assert_array_equal(a_ppmp, a_ddpg)
    np.testing.assert_array_equal(s_ppmp, s_ddpg)


# -- golden trace ---------------------------------------------------------------------


def test_golden_trace():
    """30-step reference run, values frozen from the recorded reference."""
    cfg = tiny_cfg(n_pred=10, n_qfilter=20)
    env = make_env("pendulum")
    ss = np.random.SeedSequence(2024).spawn(3)
    env_rng, agent_rng, oracle_rng = (np.random.default_rng(x) for x in ss)
    agent = Agent(env.obs_dim, env.act_dim, cfg, rng=agent_rng)
    ocfg = OracleConfig(env="pendulum")
    s = env.reset(env_rng)
    agent.begin_episode()
    actions, rewards, closses = [], [], []
    for _ in range(30):
        a, res, diag = agent.step_and_train(
            env, s, lambda s_, a_, k_: feedback(s_, a_, k_, ocfg, oracle_rng))
        actions.append(a[0])
        rewards.append(res.reward)
        closses.append(diag.get("critic_loss", np.nan))
        s = res.observation
    expected_actions = [0.6095497523, 0.5920454585, 0.5876249657, 0.6009643293,
                        0.6436490083, 0.671185383, 0.6896420003, 0.6642040094,
                        0.6320204541, 0.5949384734]
    expected_rewards = [-0.8968589184, -1.0509879554, -1.4227495339, -2.0507827291,
                        -2.9962398522, -4.3386026596, -6.1432599788, -8.4371604015,
                        -11.1547536926, -14.145623485]
    expected_closs = [60.3106779744, 23.9981432465, 84.3560889543, 24.1393938879,
                      58.882403923, 35.2159780216, 46.0196832208, 11.6287547661,
                      19.1586695467, 36.7528004299]
    np.testing.assert_allclose(actions[:10], expected_actions, atol=1e-9)
    np.testing.assert_allclose(rewards[:10], expected_rewards, atol=1e-9)
    np.testing.assert_allclose(closses[20:30], expected_closs, atol=1e-7)
    assert agent.active_head == 3
    assert len(agent.corrected) == 19
    assert agent.gate.train_updates == 23


# -- checkpointing ----------------------------------------------------------------------


def test_checkpoint_round_trip_continues_identically(tmp_path):
    env = make_env("pendulum")
    cfg = tiny_cfg(n_pred=5, n_qfilter=15)
    agent = Agent(env.obs_dim, env.act_dim, cfg, rng=20)
    ocfg = OracleConfig(env="pendulum")
    fb = deterministic_feedback(ocfg)
    s = env.reset(7)
    agent.begin_episode()
    executed = []
    for _ in range(30):
        a, res, _ = agent.step_and_train(env, s, fb)
        executed.append(a)
        s = res.observation
    path = tmp_path / "agent.npz"
    save_checkpoint(agent, path)

    cont_a = []
    for _ in range(20):
        a, res, _ = agent.step_and_train(env, s, fb)
        cont_a.append(a.copy())
        s = res.observation

    loaded = load_checkpoint(path)
    env2 = make_env("pendulum")
    s2 = env2.reset(7)
    for a in executed:  # replay the recorded actions to restore env state
        s2 = env2.step(a).observation
    cont_b = []
    for _ in range(20):
        a, res, _ = loaded.step_and_train(env2, s2, fb)
        cont_b.append(a.copy())
        s2 = res.observation

    np.testing.assert_array_equal(np.array(cont_a), np.array(cont_b))


def test_checkpoint_preserves_counters(tmp_path):
    env = make_env("pendulum")
    agent = Agent(env.obs_dim, env.act_dim, tiny_cfg(n_pred=5), rng=21)
    fb = deterministic_feedback(OracleConfig(env="pendulum"))
    s = env.reset(3)
    agent.begin_episode()
    for _ in range(25):
        _, res, _ = agent.step_and_train(env, s, fb)
        s = res.observation
    path = tmp_path / "c.npz"
    save_checkpoint(agent, path)
    loaded = load_checkpoint(path)
    assert loaded.total_steps == agent.total_steps
    assert loaded.gate.steps == agent.gate.steps
    assert loaded.gate.train_updates == agent.gate.train_updates
    assert loaded.active_head == agent.active_head
    assert len(loaded.buffer) == len(agent.buffer)
    assert len(loaded.corrected) == len(agent.corrected)
    assert loaded.critic_adam.t == agent.critic_adam.t
    np.testing.assert_array_equal(loaded.ou.nu, agent.ou.nu)
    for o, l in zip(agent.actor.params(), loaded.actor.params()):
        np.testing.assert_array_equal(o, l)
    for o, l in zip(agent.critic_target.params(), loaded.critic_target.params()):
        np.testing.assert_array_equal(o, l)


def test_config_validation():
    with pytest.raises(ValueError):
        AgentConfig(mode="sac")
    with pytest.raises(ValueError):
        AgentConfig(n_heads=1)
    with pytest.raises(ValueError):
        AgentConfig(gamma=1.0)
    with pytest.raises(ValueError):
        AgentConfig(tau=0.0)
    with pytest.raises(ValueError):
        AgentConfig(lr_actor=0.0)


def test_default_constants():
    cfg = AgentConfig()
    assert cfg.hidden == (400, 300)
    assert cfg.n_heads == 10
    assert cfg.gamma == 0.99
    assert cfg.lr_critic == 2e-3
    assert cfg.lr_actor == 1e-4
    assert cfg.lr_predictor == 2e-4
    assert cfg.tau == 0.003
    assert cfg.batch_size == 64
    assert cfg.buffer_size == 1_000_000
    assert cfg.corrected_buffer_size == 1600
    assert cfg.ou_volatility == 0.3
    assert cfg.ou_damping == 0.15
    assert cfg.ou_dt == 0.01
    assert cfg.d == 0.125
    assert cfg.c_s == 0.5
    assert cfg.sigma_hh == 1e-8
    assert cfg.predictor_noise == 0.025
    assert cfg.n_pred == 1500
    assert cfg.n_qfilter == 4000
    assert abs(cfg.init_std - np.sqrt(1e-3)) < 1e-15
