"""Bounded FIFO replay buffers with uniform sampling and a binary dump format."""

import struct
from dataclasses import dataclass

import numpy as np

_MAGIC = b"PPMPRB1\n"


@dataclass
class Transition:
    s: np.ndarray
    a: np.ndarray
    r: float
    s2: np.ndarray
    done: bool
    head: int


class ReplayBuffer:
    """Ring buffer over arbitrary items; oldest items are evicted first."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = int(capacity)
        self._items = []
        self._cursor = 0

    def __len__(self):
        return len(self._items)

    def push(self, item):
        if len(self._items) < self.capacity:
            self._items.append(item)
        else:
            self._items[self._cursor] = item
            self._cursor = (self._cursor + 1) % self.capacity

    def sample(self, n: int, rng) -> list:
        """n items uniformly with replacement."""
        if not self._items:
            raise ValueError("cannot sample from an empty buffer")
        idx = rng.integers(0, len(self._items), size=n)
        return [self._items[i] for i in idx]

    def items(self):
        """Snapshot in insertion order (oldest first)."""
        return self._items[self._cursor:] + self._items[:self._cursor]


def _transition_row(t: Transition, s_dim, a_dim):
    return np.concatenate([t.s, t.a, [t.r], t.s2, [float(t.done)], [float(t.head)]])


def dump_buffer(buf: ReplayBuffer, path, kind: str, s_dim: int, a_dim: int):
    """Write the buffer to a binary file.

    kind 'transition' stores (s, a, r, s2, done, head) rows; kind
    'corrected' stores (s, a) pairs. Records are little-endian float64
    after an ASCII header line.
    """
    if kind not in ("transition", "corrected"):
        raise ValueError(f"unknown kind {kind!r}")
    items = buf.items()
    header = f"kind={kind} s_dim={s_dim} a_dim={a_dim} count={len(items)} capacity={buf.capacity}\n"
    with open(path, "wb") as f:
        f.write(_MAGIC)
        f.write(header.encode("ascii"))
        for it in items:
            if kind == "transition":
                row = _transition_row(it, s_dim, a_dim)
            else:
                s, a = it
                row = np.concatenate([s, a])
            f.write(struct.pack(f"<{row.size}d", *row))


def load_buffer(path) -> ReplayBuffer:
    """Inverse of dump_buffer; restores items and capacity."""
    with open(path, "rb") as f:
        magic = f.read(len(_MAGIC))
        if magic != _MAGIC:
            raise ValueError("not a replay dump (bad magic)")
        header = f.readline().decode("ascii").strip()
        fields = dict(kv.split("=") for kv in header.split())
        kind = fields["kind"]
        s_dim, a_dim = int(fields["s_dim"]), int(fields["a_dim"])
        count, capacity = int(fields["count"]), int(fields["capacity"])
        buf = ReplayBuffer(capacity)
        row_len = (2 * s_dim + a_dim + 3) if kind == "transition" else (s_dim + a_dim)
        for _ in range(count):
            raw = f.read(8 * row_len)
            if len(raw) != 8 * row_len:
                raise ValueError("truncated replay dump")
            row = np.array(struct.unpack(f"<{row_len}d", raw))
            if kind == "transition":
                buf.push(Transition(
                    s=row[:s_dim].copy(),
                    a=row[s_dim:s_dim + a_dim].copy(),
                    r=float(row[s_dim + a_dim]),
                    s2=row[s_dim + a_dim + 1:2 * s_dim + a_dim + 1].copy(),
                    done=bool(row[2 * s_dim + a_dim + 1]),
                    head=int(row[2 * s_dim + a_dim + 2]),
                ))
            else:
                buf.push((row[:s_dim].copy(), row[s_dim:].copy()))
    return buf
