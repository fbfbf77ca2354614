"""Checkpointing an agent mid-run and resuming bit for bit.

Trains briefly, saves everything (networks, optimizers, buffers, noise
state, gate counters), reloads into a fresh agent, and shows both agents
produce identical actions from there on.
"""

import os
import tempfile

import numpy as np

from ppmp.agent import Agent, load_checkpoint
from ppmp.envs import make_env
from ppmp.harness import ExperimentConfig, _streams
from ppmp.oracle import feedback

cfg = ExperimentConfig(env="pendulum", algo="ppmp", episodes=2)
rngs = _streams(0)
env = make_env(cfg.env)
agent = Agent(env.obs_dim, env.act_dim, cfg.agent, rng=rngs["agent"])
oracle_rng = rngs["oracle"]

s = env.reset(rngs["env"])
agent.begin_episode()
for _ in range(300):
    _, res, _ = agent.step_and_train(
        env, s, lambda s_, a_, t: feedback(s_, a_, t, cfg.oracle, oracle_rng))
    s = res.observation
    if res.done:
        s = env.reset(rngs["env"])
        agent.begin_episode()
print(f"trained for {agent.total_steps} steps, "
      f"buffer {len(agent.buffer)}, corrected {len(agent.corrected)}")

path = os.path.join(tempfile.mkdtemp(), "agent.npz")
agent.save(path)
print(f"checkpoint: {os.path.getsize(path) / 1e6:.1f} MB at {path}")

clone = load_checkpoint(path)
print(f"restored: mode {clone.cfg.mode}, steps {clone.total_steps}, "
      f"buffer {len(clone.buffer)}")

# both agents continue deterministically and identically
probe = np.array([0.7, -0.7, 1.0])
a1 = agent.eval_action(probe, head=0)
a2 = clone.eval_action(probe, head=0)
print(f"eval action original {a1}, restored {a2}")
assert np.array_equal(a1, a2)

same = all(
    np.array_equal(agent.act(p), clone.act(p))
    for p in (probe, np.array([0.0, 1.0, -2.0]), np.array([-0.3, 0.5, 4.0]))
)
print("noisy policy actions identical after restore:", same)
assert same
