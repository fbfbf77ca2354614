"""Covariance-weighted merging of binary feedback into an action.

The spread of the actor's heads stands in for policy uncertainty. The
Kalman-style gain G = S (S + H)^(-1) decides how far one unit of feedback
moves the action: a long way while the heads still disagree, barely past
the fixed offset once they agree.
"""

import numpy as np

from ppmp.selector import CorrectionConfig, correct, gain, head_covariance

cfg = CorrectionConfig()
print(f"scales: d={cfg.d}, c_s={cfg.c_s}, c_o={cfg.c_o}, "
      f"sigma_hh={cfg.sigma_hh}")
print()

rng = np.random.default_rng(2)
a_q = np.array([0.1])
h = np.array([1.0])  # "raise this channel"

print(f"suggested action {a_q[0]:+.2f}, feedback {h[0]:+.0f}")
print(f"(with sigma_hh={cfg.sigma_hh} the gain stays pinned at 1 until the "
      f"heads agree to about 1e-4)")
for label, spread in (("fresh policy, heads disagree", 0.4),
                      ("heads nearly agree", 1e-4),
                      ("heads agree to 1e-6", 1e-6)):
    heads = 0.1 + spread * rng.standard_normal((10, 1))
    cov = head_covariance(heads)
    g = gain(cov, cfg.sigma_hh)
    a = correct(a_q, h, g, cfg)
    print(f"  {label:29s} var {cov[0, 0]:.2e}  gain {g[0, 0]:.6f}  "
          f"a = {a[0]:+.3f}  (moved {a[0] - a_q[0]:+.3f})")
print("the floor on the move is the offset c_o; the ceiling is the clip:")
sure = gain(head_covariance(np.full((10, 1), 0.1) + 1e-9 *
                            rng.standard_normal((10, 1))), cfg.sigma_hh)
print("  certain heads, a_q at +0.90:",
      correct(np.array([0.9]), h, sure, cfg), "(clipped)")

# in two dimensions, feedback on one channel leaks into the other through
# the off-diagonal covariance; a larger measurement variance makes the
# blend visible instead of saturating the gain at the identity
heads = rng.standard_normal((10, 2)) * np.array([0.3, 0.3])
heads[:, 1] = heads[:, 0] * 0.8 + 0.06 * rng.standard_normal(10)
g = gain(head_covariance(heads), 0.05)
a = correct(np.zeros(2), np.array([1.0, 0.0]), g, cfg)
print()
print("correlated 2-d heads, sigma_hh=0.05, feedback only on channel 0:")
print("  gain:\n", np.round(g, 4))
print("  action:", np.round(a, 3), " (channel 1 moved with no feedback)")
