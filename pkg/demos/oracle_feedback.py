"""Synthetic corrective feedback and its availability schedule.

The oracle compares a suggested action with a scripted reference policy
and answers with a sign per channel once the gap passes the deadband d.
The chance of getting an answer at all decays with the global step count,
like a human trainer losing interest.
"""

import numpy as np

from ppmp.envs import make_env
from ppmp.oracle import OracleConfig, availability, feedback, reference_action

cfg = OracleConfig(env="pendulum")
print(f"deadband d={cfg.d}, starting rate p0={cfg.p0}, anneal={cfg.anneal}")
print("availability over training:")
for step in (0, 2_000, 5_000, 10_000, 20_000):
    print(f"  step {step:6d}: p = {availability(cfg, step):.3f}")
print()

env = make_env("pendulum")
rng = np.random.default_rng(3)
obs = env.reset(rng)
a_star = float(reference_action(env, obs)[0])
print(f"state {np.round(obs, 3)}, reference action {a_star:+.3f}")
probes = (np.clip(a_star + 0.05, -1, 1), np.clip(a_star + 0.3, -1, 1),
          -a_star)
for a in probes:
    h = feedback(obs, [a], 0, cfg, np.random.default_rng(0))
    inside = abs(a_star - a) <= cfg.d
    note = "inside the deadband" if inside else "outside the deadband"
    print(f"  suggested {a:+.3f} ({note}) -> h = {h}")
print()

# an erroneous teacher flips signs at error_rate; measure it empirically
noisy = OracleConfig(env="pendulum", error_rate=0.2, anneal=0.0)
rng = np.random.default_rng(4)
flips = 0
events = 0
while events < 20_000:
    obs = env.reset(rng)
    true_h = np.where(np.abs(reference_action(env, obs)) > noisy.d,
                      np.sign(reference_action(env, obs)), 0.0)
    h = feedback(obs, [0.0], 0, noisy, rng)
    if h[0] != 0.0:
        events += 1
        if h[0] != true_h[0]:
            flips += 1
print(f"measured flip rate at error_rate=0.2: {flips / events:.3f} "
      f"over {events} feedback events")
