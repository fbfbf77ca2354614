"""The native environments under their scripted reference policies.

Rolls out the pendulum and the mountain car with the same hand policies
the synthetic oracle consults, and prints what a good episode looks like.
"""

import numpy as np

from ppmp.envs import make_env
from ppmp.oracle import reference_action

for name in ("pendulum", "mountaincar"):
    env = make_env(name)
    rng = np.random.default_rng(1)
    obs = env.reset(rng)
    print(f"{name}: obs_dim {env.obs_dim}, act_dim {env.act_dim}, "
          f"timeout {env.max_steps} steps")
    print("  start:", np.round(obs, 3))

    total = 0.0
    steps = 0
    while True:
        a = reference_action(env, obs)
        res = env.step(a)
        obs = res.observation
        total += res.reward
        steps += 1
        if steps % 50 == 0:
            print(f"  step {steps:4d}: obs {np.round(obs, 3)}, "
                  f"return so far {total:8.1f}")
        if res.done:
            break
    print(f"  done after {steps} steps, return {total:.1f}")
    print()

# a do-nothing policy for contrast: the pendulum hangs, the car never
# leaves the valley
for name in ("pendulum", "mountaincar"):
    env = make_env(name)
    obs = env.reset(np.random.default_rng(1))
    total = 0.0
    while True:
        res = env.step(np.zeros(env.act_dim))
        total += res.reward
        if res.done:
            break
    print(f"{name} with zero torque: return {total:.1f}")
