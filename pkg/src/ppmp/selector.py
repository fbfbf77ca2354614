"""Feedback-to-action merging: head covariance, Kalman-style gain, bounded correction.

Binary per-channel feedback h in {-1, 0, +1} nudges the executed action
away from the current suggestion. How far it nudges scales with the
disagreement between policy heads: an uncertain policy yields a gain near
identity and large steps, a converged policy yields small gained steps
plus a fixed per-channel offset.
"""

from dataclasses import dataclass, field

import numpy as np


@dataclass
class CorrectionConfig:
    """Correction scale parameters; defaults follow the shipped agent."""
    d: float = 0.125
    c_s: float = 0.5
    sigma_hh: float = 1e-8
    c_o: float = field(default=None)

    def __post_init__(self):
        if self.c_o is None:
            self.c_o = 2.0 * self.d
        if self.d <= 0 or self.c_s <= 0 or self.c_o <= 0 or self.sigma_hh <= 0:
            raise ValueError("correction scales must be positive")


def head_covariance(head_actions) -> np.ndarray:
    """Unbiased covariance across the K head outputs for one state.

    head_actions: (K, act_dim), K >= 2. A tiny diagonal regulariser keeps
    the result invertible when the heads agree exactly.
    """
    acts = np.asarray(head_actions, dtype=np.float64)
    if acts.ndim != 2 or acts.shape[0] < 2:
        raise ValueError("need a (K, act_dim) array with K >= 2")
    centered = acts - acts.mean(axis=0)
    cov = centered.T @ centered / (acts.shape[0] - 1)
    return cov + 1e-12 * np.eye(acts.shape[1])


def gain(sigma_aa: np.ndarray, sigma_hh) -> np.ndarray:
    """G = S (S + H)^{-1} via a linear solve; H may be a scalar (times I)."""
    s = np.asarray(sigma_aa, dtype=np.float64)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise ValueError("sigma_aa must be square")
    h = np.asarray(sigma_hh, dtype=np.float64)
    if h.ndim == 0:
        h = float(h) * np.eye(s.shape[0])
    if h.shape != s.shape:
        raise ValueError("sigma_hh shape mismatch")
    # S and (S+H) are symmetric, so S (S+H)^{-1} = solve(S+H, S)^T
    return np.linalg.solve(s + h, s).T


def correct(a_q, h, g: np.ndarray, cfg: CorrectionConfig) -> np.ndarray:
    """Corrected action: a_q + G (c_s * h) + c_o * h, clipped to [-1, 1].

    The offset acts per channel so each nonzero feedback channel moves its
    own action coordinate in the sign of h by at least c_o (before
    clipping).
    """
    a_q = np.asarray(a_q, dtype=np.float64).reshape(-1)
    h = np.asarray(h, dtype=np.float64).reshape(-1)
    if h.shape != a_q.shape:
        raise ValueError("feedback/action dimension mismatch")
    if not np.isin(h, (-1.0, 0.0, 1.0)).all():
        raise ValueError("feedback entries must be -1, 0, or +1")
    if g.shape != (a_q.size, a_q.size):
        raise ValueError("gain shape mismatch")
    a = a_q + g @ (cfg.c_s * h) + cfg.c_o * h
    return np.clip(a, -1.0, 1.0)
