"""Corrected-action predictor and Q-filter gating.

The predictor is a small network trained on (state, corrected action)
pairs. Early in training it is the main source of action suggestions;
once the critic is trustworthy the Q-filter picks the better of policy
action and prediction by value.
"""

from dataclasses import dataclass

import numpy as np

from .nets import Network, AdamState, adam_step


@dataclass
class GateState:
    """Schedule switches driven by the total environment step count."""
    n_pred: int = 1500
    n_qfilter: int = 4000
    steps: int = 0
    train_updates: int = 0

    def __post_init__(self):
        if self.n_pred < 0 or self.n_qfilter < 0:
            raise ValueError("gate thresholds must be non-negative")

    @property
    def predictor_enabled(self) -> bool:
        return self.steps >= self.n_pred

    @property
    def qfilter_enabled(self) -> bool:
        return self.steps >= self.n_qfilter

    @property
    def predictor_ready(self) -> bool:
        """Enabled and trained at least once; only then is the output meaningful."""
        return self.predictor_enabled and self.train_updates > 0


def predict(net: Network, s, gate: GateState, noise_std: float, rng) -> np.ndarray:
    """Predicted corrected action with exploration noise, clipped to [-1, 1]."""
    if not gate.predictor_ready:
        raise RuntimeError("predictor is gated off; check gate.predictor_ready first")
    a = net.forward(np.asarray(s, dtype=np.float64), head=0)
    if noise_std > 0.0:
        a = a + rng.normal(0.0, noise_std, size=a.shape)
    return np.clip(a, -1.0, 1.0)


def q_filter(s, a_p, a_c, critic: Network, gate: GateState) -> np.ndarray:
    """Pick the executed suggestion from the policy action and the prediction.

    Before the predictor is ready: a_p. Predictor ready but Q-filter still
    gated: the prediction. Both on: argmax of the critic over the two
    candidates, ties to a_p.
    """
    if a_c is None or not gate.predictor_ready:
        return np.asarray(a_p, dtype=np.float64)
    a_p = np.asarray(a_p, dtype=np.float64)
    a_c = np.asarray(a_c, dtype=np.float64)
    if not gate.qfilter_enabled:
        return a_c
    s = np.asarray(s, dtype=np.float64)
    x = np.stack([np.concatenate([s, a_p]), np.concatenate([s, a_c])])
    q = critic.forward(x, head=0).ravel()
    return a_c if q[1] > q[0] else a_p


def train_predictor(net: Network, adam: AdamState, states, actions) -> float:
    """One MSE step on (state, corrected action) pairs; returns the pre-update loss."""
    s = np.asarray(states, dtype=np.float64)
    a = np.asarray(actions, dtype=np.float64)
    if s.ndim != 2 or a.ndim != 2 or s.shape[0] != a.shape[0]:
        raise ValueError("states/actions must be matching batches")
    pred, cache = net.value_and_cache(s, head=0)
    err = pred - a
    loss = float(np.mean(err ** 2))
    if not np.isfinite(loss):
        return loss
    upstream = 2.0 * err / err.size
    grads, _ = net.backward(cache, upstream)
    adam_step(adam, net.params(), grads)
    return loss
