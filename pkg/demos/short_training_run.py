"""A short feedback-driven training run, narrated episode by episode.

A handful of pendulum episodes is enough to watch the pieces interact:
feedback arrives often at the start, the corrected pairs train the
predictor, and the evaluation return starts to climb. Use --episodes 50
for a run like the benchmark campaigns (takes a few minutes).
"""

import argparse

import numpy as np

from ppmp.agent import Agent
from ppmp.envs import make_env
from ppmp.harness import ExperimentConfig, _streams, evaluate
from ppmp.oracle import feedback


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--env", default="pendulum",
                    choices=("pendulum", "mountaincar"))
    ap.add_argument("--algo", default="ppmp", choices=("ppmp", "pmp", "ddpg"))
    ap.add_argument("--episodes", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    cfg = ExperimentConfig(env=args.env, algo=args.algo, seeds=(args.seed,),
                           episodes=args.episodes)
    rngs = _streams(args.seed)
    env = make_env(cfg.env)
    eval_env = make_env(cfg.env)
    agent = Agent(env.obs_dim, env.act_dim, cfg.agent, rng=rngs["agent"])

    if cfg.algo != "ddpg":
        oracle_rng = rngs["oracle"]

        def feedback_fn(s, a_q, step):
            return feedback(s, a_q, step, cfg.oracle, oracle_rng)
    else:
        feedback_fn = None

    print(f"{cfg.algo} on {cfg.env}, seed {args.seed}, "
          f"{args.episodes} episodes")
    for ep in range(args.episodes):
        s = env.reset(rngs["env"])
        agent.begin_episode()
        train_return = 0.0
        fb = 0
        corrected = 0
        while True:
            a, res, diag = agent.step_and_train(env, s, feedback_fn)
            train_return += res.reward
            if np.any(diag["h"]):
                fb += 1
            if diag["correction"] > 0:
                corrected += 1
            s = res.observation
            if res.done:
                break
        eval_return = evaluate(agent, eval_env, rngs["eval"])
        print(f"  ep {ep:3d}: train {train_return:8.1f}  eval "
              f"{eval_return:8.1f}  feedback on {fb:3d} steps  "
              f"corrected {corrected:3d}  buffer {len(agent.buffer)}")

    print(f"total env steps: {agent.total_steps}, corrected pairs stored: "
          f"{len(agent.corrected)}")
    if cfg.algo == "ppmp":
        print(f"predictor active: {agent.gate.predictor_ready}, "
              f"q-filter active: {agent.gate.qfilter_enabled}")


if __name__ == "__main__":
    main()
