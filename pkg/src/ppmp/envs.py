"""Native continuous-control tasks: pendulum swing-up and underpowered mountain car.

Both take actions in [-1, 1]^d and scale internally. Dynamics constants
mirror the classic-control benchmarks so scores are comparable to
published curves.
"""

from dataclasses import dataclass

import numpy as np


@dataclass
class StepResult:
    observation: np.ndarray
    reward: float
    done: bool


def _wrap_angle(theta: float) -> float:
    """Map to (-pi, pi]."""
    return float(np.pi - (np.pi - theta) % (2.0 * np.pi))


def _check_action(action, dim: int) -> np.ndarray:
    a = np.asarray(action, dtype=np.float64).reshape(-1)
    if a.shape != (dim,):
        raise ValueError(f"action has shape {a.shape}, expected ({dim},)")
    if not np.isfinite(a).all():
        raise ValueError("action contains non-finite values")
    if np.abs(a).max() > 1.0 + 1e-12:
        raise ValueError("action outside [-1, 1]")
    return np.clip(a, -1.0, 1.0)


class Pendulum:
    """Torque-limited pendulum; the goal is to swing up and balance.

    State is (theta, thetadot) with theta measured from upright, observed
    as [cos(theta), sin(theta), thetadot]. Torque is 2 * action. Episodes
    run 200 steps; the timeout terminates the episode.
    """

    name = "pendulum"
    obs_dim = 3
    act_dim = 1
    max_steps = 200

    g = 10.0
    m = 1.0
    length = 1.0
    dt = 0.05
    max_torque = 2.0
    max_speed = 8.0

    def __init__(self):
        self.theta = 0.0
        self.thetadot = 0.0
        self.steps = 0
        self.done = True

    def reset(self, rng=None) -> np.ndarray:
        rng = np.random.default_rng(rng)
        self.theta = float(rng.uniform(-np.pi, np.pi))
        self.thetadot = float(rng.uniform(-1.0, 1.0))
        self.steps = 0
        self.done = False
        return self.observation()

    def observation(self) -> np.ndarray:
        return np.array([np.cos(self.theta), np.sin(self.theta), self.thetadot])

    def state(self) -> np.ndarray:
        return np.array([self.theta, self.thetadot])

    def energy(self) -> float:
        """Mechanical energy of the torque-free rod; 5.0 at upright rest."""
        return float(self.thetadot ** 2 / 6.0 + 5.0 * np.cos(self.theta))

    def step(self, action) -> StepResult:
        if self.done:
            raise RuntimeError("episode is done; call reset()")
        a = _check_action(action, self.act_dim)
        u = self.max_torque * float(a[0])
        th, thd = self.theta, self.thetadot
        # cost on the pre-step state and applied torque
        th_w = _wrap_angle(th)
        reward = -(th_w ** 2 + 0.1 * thd ** 2 + 0.001 * u ** 2)
        # semi-implicit Euler
        g, m, length, dt = self.g, self.m, self.length, self.dt
        thd_new = thd + (3.0 * g / (2.0 * length) * np.sin(th)
                         + 3.0 / (m * length ** 2) * u) * dt
        thd_new = float(np.clip(thd_new, -self.max_speed, self.max_speed))
        th_new = th + thd_new * dt
        self.theta, self.thetadot = float(th_new), thd_new
        self.steps += 1
        self.done = self.steps >= self.max_steps
        return StepResult(self.observation(), float(reward), self.done)


class MountainCar:
    """Underpowered car in a valley; reach x >= 0.45 by building momentum.

    Observation is [position, velocity]. Force is 1 * action. Reaching the
    goal pays +100; every step costs 0.1 * u^2. Timeout at 999 steps.
    """

    name = "mountaincar"
    obs_dim = 2
    act_dim = 1
    max_steps = 999

    power = 0.0015
    gravity = 0.0025
    goal = 0.45
    min_pos, max_pos = -1.2, 0.6
    max_speed = 0.07

    def __init__(self):
        self.x = 0.0
        self.v = 0.0
        self.steps = 0
        self.done = True

    def reset(self, rng=None) -> np.ndarray:
        rng = np.random.default_rng(rng)
        self.x = float(rng.uniform(-0.6, -0.4))
        self.v = 0.0
        self.steps = 0
        self.done = False
        return self.observation()

    def observation(self) -> np.ndarray:
        return np.array([self.x, self.v])

    def state(self) -> np.ndarray:
        return self.observation()

    def energy(self) -> float:
        """Kinetic + potential energy in the scaled dynamics."""
        return float(self.v ** 2 / 2.0 + (self.gravity / 3.0) * np.sin(3.0 * self.x))

    def step(self, action) -> StepResult:
        if self.done:
            raise RuntimeError("episode is done; call reset()")
        a = _check_action(action, self.act_dim)
        u = float(a[0])
        v = self.v + self.power * u - self.gravity * np.cos(3.0 * self.x)
        v = float(np.clip(v, -self.max_speed, self.max_speed))
        x = float(np.clip(self.x + v, self.min_pos, self.max_pos))
        if x <= self.min_pos and v < 0.0:
            v = 0.0
        self.x, self.v = x, v
        self.steps += 1
        reward = -0.1 * u ** 2
        reached = x >= self.goal
        if reached:
            reward += 100.0
        self.done = reached or self.steps >= self.max_steps
        return StepResult(self.observation(), float(reward), self.done)


_ENVS = {"pendulum": Pendulum, "mountaincar": MountainCar}


def make_env(name: str):
    try:
        return _ENVS[name]()
    except KeyError:
        raise ValueError(f"unknown env {name!r}; choose from {sorted(_ENVS)}") from None
