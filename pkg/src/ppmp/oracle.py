"""Synthetic corrective feedback from scripted reference policies.

The oracle knows a competent (not optimal) policy per task. When it gives
feedback it compares the agent's suggested action against the reference
action channel by channel: differences larger than the indifference
threshold d produce h = sign(reference - suggestion), smaller ones h = 0.
Feedback availability anneals exponentially with the global step count,
and each nonzero channel flips sign with the configured error rate.
"""

from dataclasses import dataclass

import numpy as np

E_TOP = 5.0  # pendulum energy at upright rest


@dataclass
class OracleConfig:
    env: str = "pendulum"
    d: float = 0.125
    p0: float = 1.0
    anneal: float = 2.3e-4
    error_rate: float = 0.0

    def __post_init__(self):
        if self.d <= 0:
            raise ValueError("d must be positive")
        if not 0.0 <= self.p0 <= 1.0:
            raise ValueError("p0 must be in [0, 1]")
        if self.anneal < 0:
            raise ValueError("anneal must be non-negative")
        if not 0.0 <= self.error_rate < 0.5:
            raise ValueError("error_rate must be in [0, 0.5)")


def _sign(x: float) -> float:
    """Sign with the tie broken to +1 (a stall at exactly zero helps nobody)."""
    return 1.0 if x >= 0.0 else -1.0


def _pendulum_reference(obs) -> float:
    cos_t, sin_t, thd = float(obs[0]), float(obs[1]), float(obs[2])
    theta = float(np.arctan2(sin_t, cos_t))
    if abs(theta) < 0.3:
        return float(np.clip(-6.0 * theta - 2.0 * thd, -1.0, 1.0))
    energy = thd ** 2 / 6.0 + E_TOP * cos_t
    if energy < E_TOP:
        # tangential pump: push along the velocity to add energy
        return _sign(thd)
    return 0.0


_MC_GRAVITY = 0.0025
_MC_BARRIER = (_MC_GRAVITY / 3.0) * np.sin(3.0 * 0.45)


def _mountaincar_reference(obs) -> float:
    x, v = float(obs[0]), float(obs[1])
    energy = v ** 2 / 2.0 + (_MC_GRAVITY / 3.0) * np.sin(3.0 * x)
    if v >= 0.0 and energy >= _MC_BARRIER:
        # enough energy to roll over the goal hill; stop paying for thrust
        return 0.0
    return _sign(v)


_REFERENCE = {"pendulum": _pendulum_reference, "mountaincar": _mountaincar_reference}


def reference_action(env, obs) -> np.ndarray:
    """Reference policy action; env is an environment instance or its name."""
    name = getattr(env, "name", env)
    try:
        return np.array([_REFERENCE[name](obs)])
    except KeyError:
        raise ValueError(f"no reference policy for env {name!r}") from None


def availability(cfg: OracleConfig, step: int) -> float:
    """Probability that feedback is given at the global step count."""
    return float(cfg.p0 * np.exp(-cfg.anneal * step))


def feedback(obs, action, step: int, cfg: OracleConfig, rng) -> np.ndarray:
    """Binary feedback vector for the suggested action, zeros when silent."""
    a = np.asarray(action, dtype=np.float64).reshape(-1)
    if np.abs(a).max() > 1.0 + 1e-12:
        raise ValueError("action outside [-1, 1]")
    if rng.random() >= availability(cfg, step):
        return np.zeros(a.size)
    a_star = reference_action(cfg.env, obs)
    diff = a_star - a
    h = np.where(np.abs(diff) > cfg.d, np.sign(diff), 0.0)
    for i in range(h.size):
        if h[i] != 0.0 and rng.random() < cfg.error_rate:
            h[i] = -h[i]
    return h
