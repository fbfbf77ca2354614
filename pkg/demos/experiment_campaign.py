"""A miniature campaign: several seeds, CSV logs, cross-seed summary.

Uses ddpg for speed (no feedback machinery) and three episodes per seed.
Real campaigns just raise the numbers; the files have the same shape. Runs
are deterministic per (config, seed): rerunning rewrites byte-identical
CSVs.
"""

import itertools
import os
import tempfile

from ppmp.harness import (ExperimentConfig, config_hash, load_run_csv,
                          run_experiment, summarize)

out = os.path.join(tempfile.mkdtemp(), "campaign")
cfg = ExperimentConfig(env="pendulum", algo="ddpg", seeds=(0, 1), episodes=3,
                       out_dir=out)
print(f"config hash {config_hash(cfg)} (seeds and out_dir excluded)")

paths = run_experiment(cfg)
print()

print("files written:")
for name in sorted(os.listdir(out)):
    print("  ", name)
print()

with open(paths[0]) as f:
    head = list(itertools.islice(f, 6))
print(f"{os.path.basename(paths[0])} starts with:")
for line in head:
    print("  ", line.rstrip())
print()

log = load_run_csv(paths[0])
print(f"parsed back: seed {log.seed}, {len(log.episodes)} episodes, "
      f"eval returns {log.eval_returns.round(1).tolist()}")

stats = summarize(paths, window=2)
print("cross-seed summary (smoothed eval mean +- std):")
for ep, m, sd in zip(stats["episode"], stats["eval_mean"], stats["eval_std"]):
    print(f"  ep {int(ep)}: {m:8.1f} +- {sd:6.1f}")
