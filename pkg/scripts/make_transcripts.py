"""Record deterministic gateway protocol transcripts.

Drives one live session through the real gateway code and writes the
exchanged messages as JSONL consumed by both test suites (the Python
acceptance test and the frontend protocol tests). Each line is
{"dir": "s2c"|"c2s", "valid": bool, "msg": {...}}; "raw" replaces "msg"
when the payload is not valid JSON.

Regenerate with: python3 scripts/make_transcripts.py
"""

import json
import os

from ppmp.gateway import Broadcaster, LiveSession, parse_client_message

OUT_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))),
                       "frontend", "transcripts")

SESSION = "transcript-demo"

# step index -> client payload sent before that step
CLIENT_EVENTS = {
    40: {"type": "feedback", "session": SESSION, "h": [1], "ts": 2.0},
    90: {"type": "control", "action": "pause"},
    91: {"type": "control", "action": "resume"},
    140: {"type": "feedback", "session": SESSION, "h": [-1]},
}

# structurally broken client payloads; every one must parse to None
MALFORMED_CLIENT = [
    '{"type": "feedback"',
    '',
    '[1, 2, 3]',
    '"feedback"',
    '{"type": "telemetry"}',
    '{"type": "feedback", "h": [1]}',
    '{"type": "feedback", "session": "transcript-demo", "h": 1}',
    '{"type": "feedback", "session": "transcript-demo", "h": [2]}',
    '{"type": "feedback", "session": "transcript-demo", "h": [true]}',
    '{"type": "feedback", "session": "transcript-demo", "h": [0.5]}',
    '{"type": "feedback", "session": 7, "h": [1]}',
    '{"type": "control", "action": "faster"}',
    '{"type": "control"}',
]

# server-shaped payloads that violate the schema; the UI must reject them
MALFORMED_SERVER = [
    {"type": "telemetry", "session": SESSION},
    {"type": "hello", "version": 1, "session": SESSION, "env": "pendulum",
     "obs_dim": "3", "action_dim": 1, "algo": "ppmp", "rate": 20.0},
    {"type": "frame", "session": SESSION, "env": "pendulum", "episode": 0,
     "step": 1, "ep_step": 1, "state": [1.0, 0.0, 0.0],
     "suggestion": [0.0], "correction": [0.0], "h": [0], "reward": -0.1,
     "episode_return": -0.1, "done": False},
    {"type": "frame", "session": SESSION, "env": "pendulum", "episode": 0,
     "step": 1, "ep_step": 1, "state": [1.0, 0.0, 0.0], "action": [0.0],
     "suggestion": [0.0], "correction": [0.0], "h": [2], "reward": -0.1,
     "episode_return": -0.1, "done": False},
    {"type": "summary", "session": SESSION, "episode": 0, "return": "bad",
     "feedback_count": 3, "steps": 200},
]


def record_session() -> list:
    lines = []
    broadcaster = Broadcaster(capacity=512)
    sess = LiveSession(env_name="pendulum", algo="ppmp", seed=5, rate=20.0,
                       session=SESSION, broadcaster=broadcaster)
    client = broadcaster.register()
    lines.append({"dir": "s2c", "valid": True, "msg": json.loads(sess.hello())})
    for step in range(200):
        if step in CLIENT_EVENTS:
            text = json.dumps(CLIENT_EVENTS[step])
            lines.append({"dir": "c2s", "valid": True, "msg": json.loads(text)})
            parsed = parse_client_message(text)
            assert parsed is not None, text
            if parsed["type"] == "feedback":
                assert sess.mailbox.post(parsed["session"], parsed["h"],
                                         parsed.get("ts"))
            else:
                sess.handle_control(parsed["action"])
        sess.step_once()
        for msg in client.queue.drain():
            lines.append({"dir": "s2c", "valid": True, "msg": json.loads(msg)})
    return lines


def record_malformed() -> list:
    lines = []
    for raw in MALFORMED_CLIENT:
        assert parse_client_message(raw) is None, raw
        lines.append({"dir": "c2s", "valid": False, "raw": raw})
    for msg in MALFORMED_SERVER:
        lines.append({"dir": "s2c", "valid": False, "msg": msg})
    return lines


def write(path: str, lines: list):
    with open(path, "w", encoding="utf-8") as f:
        for line in lines:
            f.write(json.dumps(line) + "\n")
    print(f"{path}: {len(lines)} lines")


def main():
    os.makedirs(OUT_DIR, exist_ok=True)
    write(os.path.join(OUT_DIR, "session.jsonl"), record_session())
    write(os.path.join(OUT_DIR, "malformed.jsonl"), record_malformed())


if __name__ == "__main__":
    main()
