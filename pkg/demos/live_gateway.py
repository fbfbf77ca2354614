"""Driving a live session the way the browser UI does, without a browser.

Runs the stepping loop in a thread, registers a client on the broadcaster,
posts corrective feedback through the mailbox, and prints the frames that
come back. The JSON here is exactly what travels over the websocket.
"""

import json
import threading
import time

from ppmp.gateway import Broadcaster, LiveSession, parse_client_message

session = LiveSession(env_name="pendulum", algo="ppmp", seed=0, rate=200.0,
                      broadcaster=Broadcaster(capacity=512))
handle = session.broadcaster.register()
print("hello:", session.hello())
print()

loop = threading.Thread(target=session.run_forever, daemon=True)
loop.start()
time.sleep(0.4)

# what a UI key press sends; parse_client_message is the server-side gate
raw = json.dumps({"type": "feedback", "session": session.session, "h": [1]})
msg = parse_client_message(raw)
print("client sends:", raw)
session.mailbox.post(msg["session"], msg["h"], msg.get("ts"))

# malformed input is counted and dropped, never raised
for bad in ("if I only had a brain", '{"type": "feedback", "h": [2]}'):
    assert parse_client_message(bad) is None
print("malformed inputs rejected cleanly")
print()

time.sleep(0.3)
session.stop()
loop.join(timeout=2.0)

frames = [json.loads(t) for t in handle.queue.drain()]
session.broadcaster.unregister(handle)
kinds = [f["type"] for f in frames]
print(f"received {len(frames)} messages: "
      f"{kinds.count('frame')} frames, {kinds.count('summary')} summaries")

touched = [f for f in frames if f["type"] == "frame" and any(f["h"])]
print(f"frames carrying feedback: {len(touched)}")
if touched:
    f = touched[0]
    print("  first one: step", f["step"], "h", f["h"],
          "suggestion", [round(v, 3) for v in f["suggestion"]],
          "action", [round(v, 3) for v in f["action"]],
          "correction", [round(v, 3) for v in f["correction"]])
print("mailbox counters:", {"received": session.mailbox.received,
                            "stale": session.mailbox.stale,
                            "malformed": session.mailbox.malformed})
