/** View model: bounded chart series plus the reducer that folds server
 * messages into view state. Pure data, no DOM, so it is fully testable. */

import { FrameMsg, HelloMsg, parseServerMessage } from "./protocol.js";

export const RING_CAPACITY = 500;

/** Fixed-capacity series; pushing past capacity drops the oldest value. */
export class Ring {
  private buf: number[];
  private head = 0;
  private count = 0;

  constructor(readonly capacity: number = RING_CAPACITY) {
    if (capacity < 1) throw new Error("capacity must be >= 1");
    this.buf = new Array<number>(capacity);
  }

  get length(): number {
    return this.count;
  }

  push(v: number): void {
    this.buf[this.head] = v;
    this.head = (this.head + 1) % this.capacity;
    if (this.count < this.capacity) this.count += 1;
  }

  /** Values in insertion order, oldest first. */
  values(): number[] {
    const out = new Array<number>(this.count);
    const start = (this.head - this.count + this.capacity) % this.capacity;
    for (let i = 0; i < this.count; i++) {
      out[i] = this.buf[(start + i) % this.capacity];
    }
    return out;
  }

  last(): number | undefined {
    if (this.count === 0) return undefined;
    return this.buf[(this.head - 1 + this.capacity) % this.capacity];
  }
}

export type Status = "connecting" | "connected" | "disconnected";

export interface ViewState {
  status: Status;
  hello: HelloMsg | null;
  frame: FrameMsg | null;
  returns: Ring;       // episode returns, one point per summary
  feedbackRate: Ring;  // feedback events per step, one point per summary
  rewards: Ring;       // recent per-frame rewards
  frames: number;
  episodes: number;
  malformed: number;
  sentFeedback: number;
}

export function newViewState(): ViewState {
  return {
    status: "connecting",
    hello: null,
    frame: null,
    returns: new Ring(),
    feedbackRate: new Ring(),
    rewards: new Ring(),
    frames: 0,
    episodes: 0,
    malformed: 0,
    sentFeedback: 0,
  };
}

export type Applied = "hello" | "frame" | "summary" | "malformed";

/** Fold one raw server message into the state; malformed input only bumps
 * a counter so the stream keeps flowing. */
export function applyServerText(state: ViewState, text: string): Applied {
  const msg = parseServerMessage(text);
  if (msg === null) {
    state.malformed += 1;
    return "malformed";
  }
  if (msg.type === "hello") {
    state.hello = msg;
    return "hello";
  }
  if (msg.type === "frame") {
    state.frame = msg;
    state.rewards.push(msg.reward);
    state.frames += 1;
    return "frame";
  }
  state.returns.push(msg.return);
  state.feedbackRate.push(msg.steps > 0 ? msg.feedback_count / msg.steps : 0);
  state.episodes += 1;
  return "summary";
}
