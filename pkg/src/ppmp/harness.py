"""Experiment harness: seeded runs, CSV logs, and cross-seed summaries.

A campaign is one configuration run over several seeds. Every run writes
one CSV with a schema header; reruns with identical config and seed are
byte-identical (wall-clock time lives in a separate timing.json). Errors
in one run mark it failed in campaign.json and do not stop the others.
"""

import hashlib
import json
import os
import time
import warnings
from dataclasses import dataclass, field, replace, asdict

import numpy as np

from .agent import Agent, AgentConfig, MODES
from .envs import make_env
from .oracle import OracleConfig, feedback

RUN_SCHEMA = "ppmp-run-v1"
SUMMARY_SCHEMA = "ppmp-summary-v1"

# streams a run spawns from its seed, in order
_STREAMS = ("env", "agent", "oracle", "eval")


@dataclass
class ExperimentConfig:
    env: str = "pendulum"
    algo: str = "ppmp"
    seeds: tuple = (0,)
    episodes: int = 50
    feedback: str = "oracle"
    out_dir: str = "runs"
    agent: AgentConfig = field(default_factory=AgentConfig)
    oracle: OracleConfig = field(default_factory=OracleConfig)

    def __post_init__(self):
        self.seeds = tuple(int(s) for s in self.seeds)
        if self.algo not in MODES:
            raise ValueError(f"algo must be one of {MODES}")
        if self.feedback not in ("oracle", "none"):
            raise ValueError("feedback must be 'oracle' or 'none'")
        if self.episodes < 1:
            raise ValueError("episodes must be >= 1")
        if not self.seeds:
            raise ValueError("need at least one seed")
        # keep nested configs consistent with the top-level choices
        self.agent = replace(self.agent, mode=self.algo)
        self.oracle = replace(self.oracle, env=self.env, d=self.agent.d)


def config_hash(cfg: ExperimentConfig) -> str:
    """Stable 12-hex-digit digest of everything that shapes a run but the seed."""
    payload = {
        "env": cfg.env, "algo": cfg.algo, "episodes": cfg.episodes,
        "feedback": cfg.feedback, "agent": cfg.agent.to_dict(),
        "oracle": asdict(cfg.oracle),
    }
    blob = json.dumps(payload, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


@dataclass
class RunLog:
    seed: int
    env: str
    algo: str
    config: str
    episodes: np.ndarray
    train_returns: np.ndarray
    eval_returns: np.ndarray
    feedback_counts: np.ndarray
    env_steps: np.ndarray
    initial_obs: list = field(default_factory=list, repr=False)
    wall_time: float = 0.0


def _streams(seed: int) -> dict:
    children = np.random.SeedSequence(seed).spawn(len(_STREAMS))
    return {name: np.random.default_rng(ss) for name, ss in zip(_STREAMS, children)}


def evaluate(agent: Agent, env, rng) -> float:
    """One deterministic episode with a freshly drawn head; no training.

    Consumes the stream identically in every mode (one head draw, then the
    reset), so evaluation conditions line up across algorithms per seed.
    """
    head = int(rng.integers(agent.cfg.n_heads))
    s = env.reset(rng)
    total = 0.0
    while True:
        res = env.step(np.clip(agent.eval_action(s, head), -1.0, 1.0))
        total += res.reward
        s = res.observation
        if res.done:
            return total


def run_single(cfg: ExperimentConfig, seed: int) -> RunLog:
    """Train one agent for cfg.episodes episodes; evaluates after each."""
    rngs = _streams(seed)
    env = make_env(cfg.env)
    eval_env = make_env(cfg.env)
    agent = Agent(env.obs_dim, env.act_dim, cfg.agent, rng=rngs["agent"])
    if cfg.feedback == "oracle" and cfg.algo != "ddpg":
        oracle_rng = rngs["oracle"]

        def feedback_fn(s, a_q, step):
            return feedback(s, a_q, step, cfg.oracle, oracle_rng)
    else:
        feedback_fn = None

    t0 = time.monotonic()
    rows = []
    initial_obs = []
    for ep in range(cfg.episodes):
        s = env.reset(rngs["env"])
        initial_obs.append(s.copy())
        agent.begin_episode()
        train_return = 0.0
        fb_count = 0
        while True:
            _, res, diag = agent.step_and_train(env, s, feedback_fn)
            train_return += res.reward
            if np.any(diag["h"]):
                fb_count += 1
            s = res.observation
            if res.done:
                break
        eval_return = evaluate(agent, eval_env, rngs["eval"])
        rows.append((ep, train_return, eval_return, fb_count, agent.total_steps))
    cols = list(zip(*rows))
    return RunLog(
        seed=seed, env=cfg.env, algo=cfg.algo, config=config_hash(cfg),
        episodes=np.array(cols[0]), train_returns=np.array(cols[1], dtype=np.float64),
        eval_returns=np.array(cols[2], dtype=np.float64),
        feedback_counts=np.array(cols[3]), env_steps=np.array(cols[4]),
        initial_obs=initial_obs, wall_time=time.monotonic() - t0,
    )


def _fmt(x: float) -> str:
    return f"{x:.10g}"


def write_run_csv(log: RunLog, path):
    lines = [f"# schema={RUN_SCHEMA} config={log.config} seed={log.seed} "
             f"env={log.env} algo={log.algo}",
             "episode,train_return,eval_return,feedback_count,env_steps"]
    for i in range(len(log.episodes)):
        lines.append(f"{log.episodes[i]},{_fmt(log.train_returns[i])},"
                     f"{_fmt(log.eval_returns[i])},{log.feedback_counts[i]},"
                     f"{log.env_steps[i]}")
    with open(path, "w", encoding="ascii") as f:
        f.write("\n".join(lines) + "\n")


def load_run_csv(path) -> RunLog:
    with open(path, "r", encoding="ascii") as f:
        header = f.readline().strip()
        if not header.startswith("# schema="):
            raise ValueError(f"{path}: missing schema header")
        meta = dict(kv.split("=") for kv in header[2:].split())
        if meta["schema"] != RUN_SCHEMA:
            raise ValueError(f"{path}: unsupported schema {meta['schema']!r}")
        names = f.readline().strip().split(",")
        if names != ["episode", "train_return", "eval_return", "feedback_count", "env_steps"]:
            raise ValueError(f"{path}: unexpected columns {names}")
        data = [line.strip().split(",") for line in f if line.strip()]
    cols = list(zip(*data)) if data else [[]] * 5
    return RunLog(
        seed=int(meta["seed"]), env=meta["env"], algo=meta["algo"], config=meta["config"],
        episodes=np.array([int(v) for v in cols[0]]),
        train_returns=np.array([float(v) for v in cols[1]]),
        eval_returns=np.array([float(v) for v in cols[2]]),
        feedback_counts=np.array([int(v) for v in cols[3]]),
        env_steps=np.array([int(v) for v in cols[4]]),
    )


def run_path(cfg: ExperimentConfig, seed: int) -> str:
    return os.path.join(cfg.out_dir, f"{cfg.env}_{cfg.algo}_seed{seed}.csv")


def run_experiment(cfg: ExperimentConfig, log=print) -> list:
    """Run all seeds sequentially; returns the list of run CSV paths written.

    The output directory is validated up front so a bad path aborts before
    any training happens. A run that raises marks itself failed in
    campaign.json; remaining seeds still run.
    """
    os.makedirs(cfg.out_dir, exist_ok=True)
    probe = os.path.join(cfg.out_dir, ".write_probe")
    with open(probe, "w") as f:
        f.write("ok")
    os.remove(probe)

    chash = config_hash(cfg)
    statuses = {}
    timings = {}
    paths = []
    for seed in cfg.seeds:
        try:
            run = run_single(cfg, seed)
        except Exception as exc:  # a broken run must not sink the campaign
            statuses[str(seed)] = {"status": "failed", "error": f"{type(exc).__name__}: {exc}"}
            if log:
                log(f"seed {seed}: FAILED ({exc})")
            continue
        path = run_path(cfg, seed)
        write_run_csv(run, path)
        paths.append(path)
        statuses[str(seed)] = {"status": "done", "csv": os.path.basename(path)}
        timings[str(seed)] = run.wall_time
        if log:
            log(f"seed {seed}: {cfg.episodes} episodes, "
                f"final eval {run.eval_returns[-1]:.1f}, {run.wall_time:.1f}s")
    campaign = {
        "schema": "ppmp-campaign-v1", "config": chash, "env": cfg.env,
        "algo": cfg.algo, "episodes": cfg.episodes, "feedback": cfg.feedback,
        "seeds": list(cfg.seeds), "runs": statuses,
        "agent": cfg.agent.to_dict(), "oracle": asdict(cfg.oracle),
    }
    with open(os.path.join(cfg.out_dir, f"campaign_{cfg.env}_{cfg.algo}.json"), "w") as f:
        json.dump(campaign, f, indent=2, sort_keys=True)
    with open(os.path.join(cfg.out_dir, f"timing_{cfg.env}_{cfg.algo}.json"), "w") as f:
        json.dump({"schema": "ppmp-timing-v1", "wall_time_s": timings}, f, indent=2, sort_keys=True)
    return paths


def moving_average(x: np.ndarray, window: int) -> np.ndarray:
    """Trailing moving average; early entries average what exists so far."""
    if window < 1:
        raise ValueError("window must be >= 1")
    out = np.empty_like(np.asarray(x, dtype=np.float64))
    csum = np.cumsum(x, dtype=np.float64)
    for i in range(len(out)):
        lo = max(0, i - window + 1)
        out[i] = (csum[i] - (csum[lo - 1] if lo > 0 else 0.0)) / (i - lo + 1)
    return out


def summarize(runs, window: int = 5) -> dict:
    """Cross-seed summary of smoothed evaluation returns and feedback rates.

    runs: RunLog objects or CSV paths. Returns a dict of aligned arrays:
    episode, eval_mean, eval_std, feedback_rate. Runs of unequal length are
    truncated to the shortest with a warning.
    """
    logs = [r if isinstance(r, RunLog) else load_run_csv(r) for r in runs]
    if not logs:
        raise ValueError("no runs to summarize")
    n = min(len(log.episodes) for log in logs)
    if any(len(log.episodes) != n for log in logs):
        warnings.warn("runs have unequal lengths; truncating to the shortest")
    smoothed = np.stack([moving_average(log.eval_returns[:n], window) for log in logs])
    steps = []
    for log in logs:
        per_ep = np.diff(log.env_steps[:n], prepend=0)
        steps.append(log.feedback_counts[:n] / np.maximum(per_ep, 1))
    rates = np.stack(steps)
    return {
        "episode": np.arange(n),
        "eval_mean": smoothed.mean(axis=0),
        "eval_std": smoothed.std(axis=0),
        "feedback_rate": rates.mean(axis=0),
        "window": window,
        "n_runs": len(logs),
    }


def write_summary_csv(summary: dict, path):
    lines = [f"# schema={SUMMARY_SCHEMA} window={summary['window']} runs={summary['n_runs']}",
             "episode,eval_mean,eval_std,feedback_rate"]
    for i in range(len(summary["episode"])):
        lines.append(f"{summary['episode'][i]},{_fmt(summary['eval_mean'][i])},"
                     f"{_fmt(summary['eval_std'][i])},{_fmt(summary['feedback_rate'][i])}")
    with open(path, "w", encoding="ascii") as f:
        f.write("\n".join(lines) + "\n")


# -- configuration files ------------------------------------------------------

_TOP_KEYS = {"env": str, "algo": str, "episodes": int, "feedback": str, "out_dir": str}
_LIST_KEYS = {"seeds": int, "hidden": int}
_AGENT_KEYS = {
    "n_heads": int, "gamma": float, "lr_critic": float, "lr_actor": float,
    "lr_predictor": float, "tau": float, "batch_size": int, "buffer_size": int,
    "corrected_buffer_size": int, "ou_volatility": float, "ou_damping": float,
    "ou_dt": float, "d": float, "c_s": float, "sigma_hh": float,
    "predictor_noise": float, "n_pred": int, "n_qfilter": int, "init_std": float,
}
_ORACLE_KEYS = {"p0": float, "anneal": float, "error_rate": float}


def parse_config_text(text: str) -> dict:
    """Parse flat `key = value` lines; '#' starts a comment."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key = value, got {raw!r}")
        key, val = (part.strip() for part in line.split("=", 1))
        if not key or not val:
            raise ValueError(f"line {lineno}: empty key or value")
        values[key] = val
    return values


def env_overrides(environ=None) -> dict:
    """PPMP_<KEY> environment variables as config values (lowercased keys)."""
    environ = os.environ if environ is None else environ
    out = {}
    for name, val in environ.items():
        if name.startswith("PPMP_"):
            out[name[len("PPMP_"):].lower()] = val
    return out


def build_config(values: dict) -> ExperimentConfig:
    """Typed ExperimentConfig from flat string values; unknown keys rejected."""
    top, agent_kw, oracle_kw = {}, {}, {}
    for key, val in values.items():
        if key in _TOP_KEYS:
            top[key] = _TOP_KEYS[key](val)
        elif key in _LIST_KEYS:
            parsed = tuple(_LIST_KEYS[key](v) for v in str(val).replace(",", " ").split())
            if key == "hidden":
                agent_kw[key] = parsed
            else:
                top[key] = parsed
        elif key in _AGENT_KEYS:
            agent_kw[key] = _AGENT_KEYS[key](val)
        elif key in _ORACLE_KEYS:
            oracle_kw[key] = _ORACLE_KEYS[key](val)
        else:
            raise ValueError(f"unknown config key {key!r}")
    if "d" in agent_kw:
        oracle_kw["d"] = agent_kw["d"]
    return ExperimentConfig(agent=AgentConfig(**agent_kw),
                            oracle=OracleConfig(**oracle_kw), **top)


def load_config(path=None, environ=None, overrides=None) -> ExperimentConfig:
    """Merge config file < environment variables < explicit overrides."""
    values = {}
    if path is not None:
        with open(path, "r") as f:
            values.update(parse_config_text(f.read()))
    values.update(env_overrides(environ))
    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})
    return build_config(values)
