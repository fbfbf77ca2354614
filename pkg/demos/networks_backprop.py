"""Multihead networks and manual backpropagation.

Builds the three network shapes the agent uses (actor, critic, predictor),
runs them forward, and checks one backward pass against a central finite
difference.
"""

import numpy as np

from ppmp.nets import Network, gradients

rng = np.random.default_rng(0)

# actor: observation in, one tanh action per head. The heads share the
# ReLU trunk, so they start close together and drift apart with training.
actor = Network(3, (400, 300), 1, n_heads=10, out_activation="tanh", rng=rng)
obs = np.array([0.9, -0.4, 0.3])

all_heads = actor.forward(obs)           # (10, 1), one action per head
one_head = actor.forward(obs, head=4)    # (1,), row 4 of the above
print("actor heads:", np.round(all_heads.ravel(), 4))
print("head 4 alone:", np.round(one_head, 4))
print(f"spread across heads: {float(all_heads.std()):.5f}")

# critic: state-action pair in, scalar value out, no squashing
critic = Network(4, (400, 300), 1, out_activation="identity", rng=rng)
x = np.concatenate([obs, [0.5]])
q = critic.forward(x, head=0)[0]
print(f"q(s, a=0.5) = {q:.5f}")

# predictor: same body as a single-head actor, trained on corrected pairs
predictor = Network(3, (400, 300), 1, out_activation="tanh", rng=rng)
print("predictor suggests:", np.round(predictor.forward(obs, head=0), 4))

# backward gives gradients of sum(upstream * output) with respect to all
# parameters and to the input. The input gradient is what drives the
# actor update: the action columns of dq/dx point uphill in value.
grads, d_input = gradients(critic, x, np.ones(1))
print(f"parameter tensors: {len(grads)}, input grad shape: {d_input.shape}")
print(f"dq/da = {float(d_input[3]):+.6f}")

# spot check the input gradient against a finite difference along one
# random direction
direction = rng.standard_normal(x.size)
direction /= np.linalg.norm(direction)
eps = 1e-6
fd = (critic.forward(x + eps * direction, head=0)[0] -
      critic.forward(x - eps * direction, head=0)[0]) / (2 * eps)
bp = float(d_input @ direction)
print(f"directional derivative: backprop {bp:+.8f}, finite diff {fd:+.8f}")
assert abs(fd - bp) / max(abs(fd), 1e-12) < 1e-5
print("backward pass agrees with finite differences")
