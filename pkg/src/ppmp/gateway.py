"""Live training bridge: stream frames out, take binary feedback in.

The core pieces are transport-free and thread-safe: a FeedbackMailbox that
collects client feedback for the training thread to drain once per step, a
Broadcaster fanning frame JSON out to bounded per-client queues (oldest
frames dropped first, never blocking the trainer), and a LiveSession that
owns one env + agent and advances them at a throttled rate. make_app wraps
them in a FastAPI WebSocket endpoint speaking JSON text frames.
"""

import json
import threading
import time
import uuid
from collections import deque

import numpy as np

from .agent import Agent, AgentConfig
from .envs import make_env
from .oracle import OracleConfig, feedback as oracle_feedback

PROTOCOL_VERSION = 1
CLIENT_QUEUE_CAPACITY = 32
MAILBOX_CAPACITY = 256


# -- inbound ------------------------------------------------------------------

class FeedbackMailbox:
    """Feedback messages from clients, drained once per environment step."""

    def __init__(self, session: str, act_dim: int, capacity: int = MAILBOX_CAPACITY):
        self.session = session
        self.act_dim = int(act_dim)
        self.capacity = int(capacity)
        self._lock = threading.Lock()
        self._pending = []
        self.received = 0
        self.stale = 0
        self.malformed = 0
        self.dropped = 0

    def post(self, session: str, h, ts=None) -> bool:
        """Queue one feedback vector; returns False when rejected."""
        if session != self.session:
            with self._lock:
                self.stale += 1
            return False
        try:
            vec = np.asarray(h, dtype=np.float64).reshape(-1)
        except (TypeError, ValueError):
            with self._lock:
                self.malformed += 1
            return False
        if vec.shape != (self.act_dim,) or not np.isin(vec, (-1.0, 0.0, 1.0)).all():
            with self._lock:
                self.malformed += 1
            return False
        with self._lock:
            self._pending.append(vec)
            if len(self._pending) > self.capacity:
                self._pending.pop(0)
                self.dropped += 1
            self.received += 1
        return True

    def note_malformed(self):
        with self._lock:
            self.malformed += 1

    def drain(self) -> np.ndarray:
        """Merge pending messages: per channel, the most recent nonzero wins."""
        with self._lock:
            pending, self._pending = self._pending, []
        h = np.zeros(self.act_dim)
        for vec in pending:
            nz = vec != 0.0
            h[nz] = vec[nz]
        return h


# -- outbound -----------------------------------------------------------------

class FrameQueue:
    """Bounded FIFO of outbound messages; overflow drops the oldest."""

    def __init__(self, capacity: int = CLIENT_QUEUE_CAPACITY):
        self.capacity = int(capacity)
        self._lock = threading.Lock()
        self._items = deque()
        self.dropped = 0

    def __len__(self):
        with self._lock:
            return len(self._items)

    def offer(self, item):
        with self._lock:
            if len(self._items) >= self.capacity:
                self._items.popleft()
                self.dropped += 1
            self._items.append(item)

    def drain(self) -> list:
        with self._lock:
            items = list(self._items)
            self._items.clear()
        return items


class ClientHandle:
    def __init__(self, client_id: int, queue: FrameQueue, wake):
        self.client_id = client_id
        self.queue = queue
        self.wake = wake


class Broadcaster:
    """Fan-out of serialized frames to registered clients; never blocks."""

    def __init__(self, capacity: int = CLIENT_QUEUE_CAPACITY):
        self.capacity = int(capacity)
        self._lock = threading.Lock()
        self._clients = {}
        self._next_id = 0
        self.published = 0

    @property
    def n_clients(self) -> int:
        with self._lock:
            return len(self._clients)

    def register(self, wake=None) -> ClientHandle:
        with self._lock:
            handle = ClientHandle(self._next_id, FrameQueue(self.capacity), wake)
            self._clients[self._next_id] = handle
            self._next_id += 1
        return handle

    def unregister(self, handle: ClientHandle):
        with self._lock:
            self._clients.pop(handle.client_id, None)

    def publish(self, text: str):
        self.published += 1
        with self._lock:
            if not self._clients:
                return
            clients = list(self._clients.values())
        for c in clients:
            c.queue.offer(text)
            if c.wake is not None:
                c.wake()


# -- protocol -----------------------------------------------------------------

def hello_message(session: str, env_name: str, obs_dim: int, act_dim: int,
                  algo: str, rate: float) -> str:
    return json.dumps({
        "type": "hello", "version": PROTOCOL_VERSION, "session": session,
        "env": env_name, "obs_dim": obs_dim, "action_dim": act_dim,
        "algo": algo, "rate": rate,
    })


def frame_message(session: str, env_name: str, episode: int, step: int,
                  ep_step: int, state, action, suggestion, h, reward: float,
                  episode_return: float, done: bool) -> str:
    action = np.asarray(action, dtype=np.float64)
    suggestion = np.asarray(suggestion, dtype=np.float64)
    return json.dumps({
        "type": "frame", "session": session, "env": env_name,
        "episode": episode, "step": step, "ep_step": ep_step,
        "state": [float(v) for v in np.asarray(state).ravel()],
        "action": [float(v) for v in action.ravel()],
        "suggestion": [float(v) for v in suggestion.ravel()],
        "correction": [float(v) for v in (action - suggestion).ravel()],
        "h": [int(v) for v in np.asarray(h).ravel()],
        "reward": float(reward), "episode_return": float(episode_return),
        "done": bool(done),
    })


def summary_message(session: str, episode: int, episode_return: float,
                    feedback_count: int, steps: int) -> str:
    return json.dumps({
        "type": "summary", "session": session, "episode": episode,
        "return": float(episode_return), "feedback_count": int(feedback_count),
        "steps": int(steps),
    })


def parse_client_message(text: str):
    """Decode one inbound message; returns a dict or None for malformed input.

    Valid shapes: {"type": "feedback", "session": str, "h": [-1|0|1...],
    "ts": optional} and {"type": "control", "action": "pause"|"resume"|"reset"}.
    Unknown extra fields are ignored.
    """
    try:
        msg = json.loads(text)
    except (json.JSONDecodeError, UnicodeDecodeError):
        return None
    if not isinstance(msg, dict):
        return None
    kind = msg.get("type")
    if kind == "feedback":
        h = msg.get("h")
        if not isinstance(msg.get("session"), str) or not isinstance(h, list):
            return None
        if not all(isinstance(v, (int, float)) and not isinstance(v, bool)
                   and float(v) in (-1.0, 0.0, 1.0) for v in h):
            return None
        return {"type": "feedback", "session": msg["session"],
                "h": [float(v) for v in h], "ts": msg.get("ts")}
    if kind == "control":
        action = msg.get("action")
        if action not in ("pause", "resume", "reset"):
            return None
        return {"type": "control", "action": action}
    return None


# -- live session ---------------------------------------------------------------

class LiveSession:
    """One env + agent advanced step by step, feedback drained per step.

    Owns no transport: publish goes through the Broadcaster, feedback comes
    from the mailbox. run_forever() is meant for a worker thread; tests can
    call step_once() directly.
    """

    def __init__(self, env_name: str = "pendulum", algo: str = "ppmp", seed: int = 0,
                 rate: float = 20.0, episodes: int = 0, use_oracle: bool = False,
                 agent_cfg: AgentConfig = None, session: str = None,
                 broadcaster: Broadcaster = None):
        self.session = session if session is not None else uuid.uuid4().hex[:12]
        self.env = make_env(env_name)
        children = np.random.SeedSequence(seed).spawn(4)
        self._env_rng = np.random.default_rng(children[0])
        agent_cfg = agent_cfg if agent_cfg is not None else AgentConfig()
        if agent_cfg.mode != algo:
            from dataclasses import replace
            agent_cfg = replace(agent_cfg, mode=algo)
        self.agent = Agent(self.env.obs_dim, self.env.act_dim, agent_cfg,
                           rng=np.random.default_rng(children[1]))
        self._oracle_rng = np.random.default_rng(children[2])
        self.oracle_cfg = OracleConfig(env=env_name, d=agent_cfg.d) if use_oracle else None
        self.rate = float(rate)
        self.max_episodes = int(episodes)
        self.mailbox = FeedbackMailbox(self.session, self.env.act_dim)
        self.broadcaster = broadcaster if broadcaster is not None else Broadcaster()
        self.episode = 0
        self.ep_step = 0
        self.episode_return = 0.0
        self.feedback_count = 0
        self._paused = threading.Event()
        self._stopped = threading.Event()
        self._reset_requested = threading.Event()
        self._obs = self.env.reset(self._env_rng)
        self.agent.begin_episode()

    # control ------------------------------------------------------------

    def pause(self):
        self._paused.set()

    def resume(self):
        self._paused.clear()

    def request_reset(self):
        self._reset_requested.set()

    def stop(self):
        self._stopped.set()
        self._paused.clear()

    @property
    def stopped(self) -> bool:
        return self._stopped.is_set()

    @property
    def paused(self) -> bool:
        return self._paused.is_set()

    def handle_control(self, action: str):
        if action == "pause":
            self.pause()
        elif action == "resume":
            self.resume()
        elif action == "reset":
            self.request_reset()

    # stepping -----------------------------------------------------------

    def hello(self) -> str:
        return hello_message(self.session, self.env.name, self.env.obs_dim,
                             self.env.act_dim, self.agent.cfg.mode, self.rate)

    def _begin_episode(self):
        self._obs = self.env.reset(self._env_rng)
        self.agent.begin_episode()
        self.ep_step = 0
        self.episode_return = 0.0
        self.feedback_count = 0

    def _feedback_fn(self, s, a_q, step):
        h = self.mailbox.drain()
        if not h.any() and self.oracle_cfg is not None:
            h = oracle_feedback(s, a_q, step, self.oracle_cfg, self._oracle_rng)
        return h

    def step_once(self) -> str:
        """Advance one env step; publishes and returns the frame JSON."""
        if self._reset_requested.is_set():
            self._reset_requested.clear()
            self._begin_episode()
        s = self._obs
        a, res, diag = self.agent.step_and_train(self.env, s, self._feedback_fn)
        self.episode_return += res.reward
        if np.any(diag["h"]):
            self.feedback_count += 1
        self.ep_step += 1
        frame = frame_message(self.session, self.env.name, self.episode,
                              self.agent.total_steps, self.ep_step, s, a,
                              diag["a_q"], diag["h"], res.reward,
                              self.episode_return, res.done)
        self.broadcaster.publish(frame)
        self._obs = res.observation
        if res.done:
            self.broadcaster.publish(summary_message(
                self.session, self.episode, self.episode_return,
                self.feedback_count, self.ep_step))
            self.episode += 1
            if self.max_episodes and self.episode >= self.max_episodes:
                self.stop()
            else:
                self._begin_episode()
        return frame

    def run_forever(self):
        """Throttled stepping loop until stop(); pause busy-waits gently."""
        next_t = time.monotonic()
        while not self._stopped.is_set():
            if self._paused.is_set():
                time.sleep(0.02)
                next_t = time.monotonic()
                continue
            self.step_once()
            if self.rate > 0:
                next_t += 1.0 / self.rate
                delay = next_t - time.monotonic()
                if delay > 0:
                    time.sleep(delay)
                else:
                    next_t = time.monotonic()


# -- web app --------------------------------------------------------------------

def make_app(session: LiveSession, ui_dir=None):
    """FastAPI app exposing /ws plus optional static UI files."""
    import asyncio

    from fastapi import FastAPI, WebSocket, WebSocketDisconnect
    from fastapi.responses import HTMLResponse

    app = FastAPI(title="ppmp live session")
    app.state.session = session

    @app.get("/status")
    async def status():
        return {
            "session": session.session, "env": session.env.name,
            "algo": session.agent.cfg.mode, "episode": session.episode,
            "steps": session.agent.total_steps, "paused": session.paused,
            "clients": session.broadcaster.n_clients,
            "feedback": {"received": session.mailbox.received,
                         "stale": session.mailbox.stale,
                         "malformed": session.mailbox.malformed},
        }

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        loop = asyncio.get_running_loop()
        event = asyncio.Event()
        handle = session.broadcaster.register(
            wake=lambda: loop.call_soon_threadsafe(event.set))
        await ws.send_text(session.hello())

        async def sender():
            while True:
                await event.wait()
                event.clear()
                for text in handle.queue.drain():
                    await ws.send_text(text)

        task = asyncio.ensure_future(sender())
        try:
            while True:
                text = await ws.receive_text()
                msg = parse_client_message(text)
                if msg is None:
                    session.mailbox.note_malformed()
                elif msg["type"] == "feedback":
                    session.mailbox.post(msg["session"], msg["h"], msg.get("ts"))
                else:
                    session.handle_control(msg["action"])
        except WebSocketDisconnect:
            pass
        finally:
            task.cancel()
            session.broadcaster.unregister(handle)

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")
    else:
        @app.get("/")
        async def index():
            return HTMLResponse(
                "<pre>ppmp live session\nconnect a UI to /ws, "
                "or GET /status for state</pre>")

    return app


def serve(session: LiveSession, host: str = "127.0.0.1", port: int = 8800,
          ui_dir=None):
    """Run the training thread and the web server; blocks until shutdown."""
    import uvicorn

    app = make_app(session, ui_dir=ui_dir)
    worker = threading.Thread(target=session.run_forever, daemon=True)
    worker.start()
    try:
        uvicorn.run(app, host=host, port=port, log_level="warning")
    finally:
        session.stop()
        worker.join(timeout=5.0)
