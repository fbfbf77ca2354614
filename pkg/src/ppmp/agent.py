"""Multihead actor-critic learner steered by corrective feedback.

Three modes share one code path:

  ddpg  multihead DDPG baseline; feedback, selector, and predictor are off
  pmp   feedback merged into the executed action via the head-covariance
        gain; no predictor, no Q-filter
  ppmp  pmp plus a corrected-action predictor and a Q-filter over
        {policy action, prediction}

Per environment step: propose an action (policy head + OU noise, maybe
replaced through the Q-filter), apply feedback if any, execute, store, and
run one round of critic/actor(/predictor) updates plus soft target
updates.
"""

import json
from dataclasses import dataclass, field, asdict

import numpy as np

from .nets import Network, AdamState, adam_step, soft_update
from .replay import ReplayBuffer, Transition
from .selector import head_covariance, gain, correct, CorrectionConfig
from .predictor import GateState, predict, q_filter, train_predictor

MODES = ("ppmp", "pmp", "ddpg")

CHECKPOINT_VERSION = 1


@dataclass
class AgentConfig:
    mode: str = "ppmp"
    hidden: tuple = (400, 300)
    n_heads: int = 10
    gamma: float = 0.99
    lr_critic: float = 2e-3
    lr_actor: float = 1e-4
    lr_predictor: float = 2e-4
    tau: float = 0.003
    batch_size: int = 64
    buffer_size: int = 1_000_000
    corrected_buffer_size: int = 1600
    ou_volatility: float = 0.3
    ou_damping: float = 0.15
    ou_dt: float = 0.01
    d: float = 0.125
    c_s: float = 0.5
    sigma_hh: float = 1e-8
    predictor_noise: float = 0.025
    n_pred: int = 1500
    n_qfilter: int = 4000
    init_std: float = field(default=float(np.sqrt(1e-3)))

    def __post_init__(self):
        self.hidden = tuple(int(h) for h in self.hidden)
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.n_heads < 2:
            raise ValueError("need at least 2 heads for the covariance estimate")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError("gamma must be in [0, 1)")
        if min(self.lr_critic, self.lr_actor, self.lr_predictor) <= 0:
            raise ValueError("learning rates must be positive")
        if not 0.0 < self.tau <= 1.0:
            raise ValueError("tau must be in (0, 1]")
        if self.batch_size < 1 or self.buffer_size < 1 or self.corrected_buffer_size < 1:
            raise ValueError("buffer and batch sizes must be >= 1")
        if self.n_pred < 0 or self.n_qfilter < 0:
            raise ValueError("gate thresholds must be non-negative")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["hidden"] = list(self.hidden)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "AgentConfig":
        d = dict(d)
        if "hidden" in d:
            d["hidden"] = tuple(d["hidden"])
        return cls(**d)


class OUProcess:
    """Ornstein-Uhlenbeck noise with its own timestep, reset per episode."""

    def __init__(self, dim: int, volatility: float = 0.3, damping: float = 0.15,
                 dt: float = 0.01):
        if volatility < 0 or damping < 0 or dt <= 0:
            raise ValueError("bad OU parameters")
        self.dim = int(dim)
        self.volatility, self.damping, self.dt = volatility, damping, dt
        self.nu = np.zeros(self.dim)

    def reset(self):
        self.nu = np.zeros(self.dim)

    def step(self, rng) -> np.ndarray:
        self.nu = (self.nu - self.damping * self.nu * self.dt
                   + self.volatility * np.sqrt(self.dt) * rng.standard_normal(self.dim))
        return self.nu.copy()


@dataclass
class Proposal:
    a_p: np.ndarray
    a_c: np.ndarray
    a_q: np.ndarray


class Agent:
    def __init__(self, obs_dim: int, act_dim: int, cfg: AgentConfig = None, rng=None):
        self.cfg = cfg = cfg if cfg is not None else AgentConfig()
        self.obs_dim, self.act_dim = int(obs_dim), int(act_dim)
        self.rng = np.random.default_rng(rng)
        # all five networks are built in every mode, in a fixed order, so
        # identical seeds give identical parameters across modes
        self.actor = Network(obs_dim, cfg.hidden, act_dim, n_heads=cfg.n_heads,
                             out_activation="tanh", init_std=cfg.init_std, rng=self.rng)
        self.critic = Network(obs_dim + act_dim, cfg.hidden, 1, n_heads=1,
                              out_activation="identity", init_std=cfg.init_std, rng=self.rng)
        self.predictor = Network(obs_dim, cfg.hidden, act_dim, n_heads=1,
                                 out_activation="tanh", init_std=cfg.init_std, rng=self.rng)
        self.actor_target = self.actor.copy()
        self.critic_target = self.critic.copy()
        self.actor_adam = AdamState(self.actor.params(), cfg.lr_actor)
        self.critic_adam = AdamState(self.critic.params(), cfg.lr_critic)
        self.predictor_adam = AdamState(self.predictor.params(), cfg.lr_predictor)
        self.buffer = ReplayBuffer(cfg.buffer_size)
        self.corrected = ReplayBuffer(cfg.corrected_buffer_size)
        self.ou = OUProcess(act_dim, cfg.ou_volatility, cfg.ou_damping, cfg.ou_dt)
        self.gate = GateState(cfg.n_pred, cfg.n_qfilter)
        self.correction = CorrectionConfig(d=cfg.d, c_s=cfg.c_s, sigma_hh=cfg.sigma_hh)
        self.total_steps = 0
        self.active_head = 0
        self.train_faults = 0

    # -- acting --------------------------------------------------------------

    def begin_episode(self):
        """Reset exploration noise and draw the episode's active head."""
        self.ou.reset()
        self.active_head = int(self.rng.integers(self.cfg.n_heads))

    def act(self, s) -> np.ndarray:
        """Exploratory policy action of the active head. One OU draw per call."""
        mu = self.actor.forward(np.asarray(s, dtype=np.float64), head=self.active_head)
        return np.clip(mu + self.ou.step(self.rng), -1.0, 1.0)

    def eval_action(self, s, head: int) -> np.ndarray:
        """Deterministic action of one head; noise off, gates still apply.

        Heads are never averaged: an evaluation episode commits to a single
        head, the same way training episodes do. In ppmp mode the Q-filter
        may still swap in the (noise-free) prediction, matching the policy
        as deployed; pmp and ddpg use the head output directly.
        """
        s = np.asarray(s, dtype=np.float64)
        a_p = self.actor.forward(s, head=head)
        if self.cfg.mode == "ppmp" and self.gate.predictor_ready:
            a_c = predict(self.predictor, s, self.gate, 0.0, None)
            return q_filter(s, a_p, a_c, self.critic, self.gate)
        return a_p

    def propose(self, s) -> Proposal:
        """Policy action, prediction (when ready), and the filtered suggestion."""
        a_p = self.act(s)
        a_c = None
        if self.cfg.mode == "ppmp" and self.gate.predictor_ready:
            a_c = predict(self.predictor, s, self.gate, self.cfg.predictor_noise, self.rng)
        if self.cfg.mode == "ppmp":
            a_q = q_filter(s, a_p, a_c, self.critic, self.gate)
        else:
            a_q = a_p
        return Proposal(a_p=a_p, a_c=a_c, a_q=a_q)

    def apply_feedback(self, s, a_q, h) -> np.ndarray:
        """Merge feedback into the suggestion; corrected pairs land in B_c."""
        h = np.asarray(h, dtype=np.float64).reshape(-1)
        if self.cfg.mode == "ddpg" or not h.any():
            return np.asarray(a_q, dtype=np.float64)
        s = np.asarray(s, dtype=np.float64)
        acts = self.actor.forward(s, head=None)
        g = gain(head_covariance(acts), self.cfg.sigma_hh)
        a = correct(a_q, h, g, self.correction)
        self.corrected.push((s.copy(), a.copy()))
        return a

    def observe(self, s, a, r, s2, done):
        self.buffer.push(Transition(
            s=np.asarray(s, dtype=np.float64).copy(),
            a=np.asarray(a, dtype=np.float64).copy(),
            r=float(r),
            s2=np.asarray(s2, dtype=np.float64).copy(),
            done=bool(done),
            head=self.active_head,
        ))
        self.total_steps += 1
        self.gate.steps = self.total_steps

    # -- training ------------------------------------------------------------

    def _sample_arrays(self, buf):
        batch = buf.sample(self.cfg.batch_size, self.rng)
        if isinstance(batch[0], Transition):
            return (np.stack([t.s for t in batch]),
                    np.stack([t.a for t in batch]),
                    np.array([t.r for t in batch]),
                    np.stack([t.s2 for t in batch]),
                    np.array([float(t.done) for t in batch]),
                    np.array([t.head for t in batch]))
        return (np.stack([p[0] for p in batch]), np.stack([p[1] for p in batch]))

    def critic_targets(self, r, s2, done, heads) -> np.ndarray:
        """Bootstrapped targets using each transition's own behaviour head."""
        a2 = self.actor_target.forward(s2, head=None)[np.arange(len(heads)), heads]
        q2 = self.critic_target.forward(np.hstack([s2, a2]), head=0).ravel()
        return r + self.cfg.gamma * (1.0 - done) * q2

    def _train_critic(self, s, a, r, s2, done, heads):
        y = self.critic_targets(r, s2, done, heads)
        q, cache = self.critic.value_and_cache(np.hstack([s, a]), head=0)
        err = q.ravel() - y
        loss = float(np.mean(err ** 2))
        if not np.isfinite(loss):
            self.train_faults += 1
            return loss
        upstream = (2.0 * err / err.size)[:, None]
        grads, _ = self.critic.backward(cache, upstream)
        if not adam_step(self.critic_adam, self.critic.params(), grads):
            self.train_faults += 1
        return loss

    def _train_actor(self, s):
        acts, cache = self.actor.value_and_cache(s, head=None)
        n, k, act = acts.shape
        x = np.concatenate([np.repeat(s, k, axis=0), acts.reshape(n * k, act)], axis=1)
        dq = self.critic.input_gradient(x, np.ones((n * k, 1)), head=0)[:, self.obs_dim:]
        # ascend on Q: each head averaged over the batch, trunk sums heads
        upstream = -dq.reshape(n, k, act) / n
        grads, _ = self.actor.backward(cache, upstream)
        if not adam_step(self.actor_adam, self.actor.params(), grads):
            self.train_faults += 1

    def _train_predictor(self):
        s, a = self._sample_arrays(self.corrected)
        before = self.predictor_adam.t
        loss = train_predictor(self.predictor, self.predictor_adam, s, a)
        if self.predictor_adam.t > before:
            self.gate.train_updates += 1
        else:
            self.train_faults += 1
        return loss

    def train_step(self) -> dict:
        """One round of updates; a no-op until the buffer holds a full batch."""
        if len(self.buffer) < self.cfg.batch_size:
            return {}
        s, a, r, s2, done, heads = self._sample_arrays(self.buffer)
        critic_loss = self._train_critic(s, a, r, s2, done, heads)
        self._train_actor(s)
        diag = {"critic_loss": critic_loss}
        if self.cfg.mode == "ppmp" and len(self.corrected) > 0:
            diag["predictor_loss"] = self._train_predictor()
        soft_update(self.actor_target, self.actor, self.cfg.tau)
        soft_update(self.critic_target, self.critic, self.cfg.tau)
        return diag

    # -- full step -----------------------------------------------------------

    def step_and_train(self, env, s, feedback_fn=None):
        """Run one full interaction + learning step.

        feedback_fn(s, a_q, step) -> h vector; ignored in ddpg mode.
        Returns (executed action, StepResult, diagnostics).
        """
        prop = self.propose(s)
        if self.cfg.mode != "ddpg" and feedback_fn is not None:
            h = np.asarray(feedback_fn(s, prop.a_q, self.total_steps),
                           dtype=np.float64).reshape(-1)
        else:
            h = np.zeros(self.act_dim)
        a = self.apply_feedback(s, prop.a_q, h)
        res = env.step(a)
        self.observe(s, a, res.reward, res.observation, res.done)
        diag = self.train_step()
        diag.update(a_p=prop.a_p, a_c=prop.a_c, a_q=prop.a_q, h=h,
                    correction=float(np.abs(a - prop.a_q).max()))
        return a, res, diag

    # -- checkpointing ---------------------------------------------------------

    def save(self, path):
        save_checkpoint(self, path)


def _net_arrays(prefix: str, net: Network) -> dict:
    out = {}
    for i, p in enumerate(net.params()):
        out[f"{prefix}_p{i}"] = p
    return out


def _adam_arrays(prefix: str, adam: AdamState) -> dict:
    out = {}
    for i, (m, v) in enumerate(zip(adam.m, adam.v)):
        out[f"{prefix}_m{i}"] = m
        out[f"{prefix}_v{i}"] = v
    out[f"{prefix}_t"] = np.array([adam.t, adam.faults], dtype=np.int64)
    return out


def _buffer_arrays(prefix: str, buf: ReplayBuffer) -> dict:
    items = buf.items()
    if not items:
        return {f"{prefix}_count": np.array([0, buf.capacity], dtype=np.int64)}
    out = {f"{prefix}_count": np.array([len(items), buf.capacity], dtype=np.int64)}
    if isinstance(items[0], Transition):
        out[f"{prefix}_s"] = np.stack([t.s for t in items])
        out[f"{prefix}_a"] = np.stack([t.a for t in items])
        out[f"{prefix}_r"] = np.array([t.r for t in items])
        out[f"{prefix}_s2"] = np.stack([t.s2 for t in items])
        out[f"{prefix}_done"] = np.array([float(t.done) for t in items])
        out[f"{prefix}_head"] = np.array([t.head for t in items], dtype=np.int64)
    else:
        out[f"{prefix}_s"] = np.stack([p[0] for p in items])
        out[f"{prefix}_a"] = np.stack([p[1] for p in items])
    return out


def save_checkpoint(agent: Agent, path):
    """Full training state: params, Adam moments, buffers, RNG, schedule."""
    meta = {
        "version": CHECKPOINT_VERSION,
        "config": agent.cfg.to_dict(),
        "obs_dim": agent.obs_dim,
        "act_dim": agent.act_dim,
        "total_steps": agent.total_steps,
        "active_head": agent.active_head,
        "train_updates": agent.gate.train_updates,
        "train_faults": agent.train_faults,
        "rng_state": agent.rng.bit_generator.state,
    }
    arrays = {"meta": np.frombuffer(json.dumps(meta).encode(), dtype=np.uint8),
              "ou_nu": agent.ou.nu}
    for name, net in (("actor", agent.actor), ("critic", agent.critic),
                      ("predictor", agent.predictor), ("actor_t", agent.actor_target),
                      ("critic_t", agent.critic_target)):
        arrays.update(_net_arrays(name, net))
    for name, adam in (("aadam", agent.actor_adam), ("cadam", agent.critic_adam),
                       ("padam", agent.predictor_adam)):
        arrays.update(_adam_arrays(name, adam))
    arrays.update(_buffer_arrays("buf", agent.buffer))
    arrays.update(_buffer_arrays("cbuf", agent.corrected))
    np.savez(path, **arrays)


def _load_net(z, prefix: str, net: Network):
    for i, p in enumerate(net.params()):
        p[...] = z[f"{prefix}_p{i}"]


def _load_adam(z, prefix: str, adam: AdamState):
    for i in range(len(adam.m)):
        adam.m[i][...] = z[f"{prefix}_m{i}"]
        adam.v[i][...] = z[f"{prefix}_v{i}"]
    adam.t, adam.faults = (int(v) for v in z[f"{prefix}_t"])


def _load_buffer(z, prefix: str, buf: ReplayBuffer, transition: bool):
    count = int(z[f"{prefix}_count"][0])
    for i in range(count):
        if transition:
            buf.push(Transition(
                s=z[f"{prefix}_s"][i], a=z[f"{prefix}_a"][i],
                r=float(z[f"{prefix}_r"][i]), s2=z[f"{prefix}_s2"][i],
                done=bool(z[f"{prefix}_done"][i]), head=int(z[f"{prefix}_head"][i]),
            ))
        else:
            buf.push((z[f"{prefix}_s"][i], z[f"{prefix}_a"][i]))


def load_checkpoint(path) -> Agent:
    with np.load(path, allow_pickle=False) as z:
        meta = json.loads(bytes(z["meta"]).decode())
        if meta["version"] != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {meta['version']}")
        cfg = AgentConfig.from_dict(meta["config"])
        agent = Agent(meta["obs_dim"], meta["act_dim"], cfg, rng=0)
        for name, net in (("actor", agent.actor), ("critic", agent.critic),
                          ("predictor", agent.predictor), ("actor_t", agent.actor_target),
                          ("critic_t", agent.critic_target)):
            _load_net(z, name, net)
        for name, adam in (("aadam", agent.actor_adam), ("cadam", agent.critic_adam),
                           ("padam", agent.predictor_adam)):
            _load_adam(z, name, adam)
        _load_buffer(z, "buf", agent.buffer, transition=True)
        _load_buffer(z, "cbuf", agent.corrected, transition=False)
        agent.ou.nu = z["ou_nu"].copy()
        agent.total_steps = int(meta["total_steps"])
        agent.gate.steps = agent.total_steps
        agent.gate.train_updates = int(meta["train_updates"])
        agent.active_head = int(meta["active_head"])
        agent.train_faults = int(meta["train_faults"])
        agent.rng.bit_generator.state = meta["rng_state"]
    return agent
