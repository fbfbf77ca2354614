/** Keyboard feedback: per action channel one key for -1 and one for +1.
 *
 * One keypress is one feedback event; key auto-repeat is rate-limited per
 * channel so holding a key cannot flood the gateway.
 */

import { FeedbackMsg, feedbackMessage } from "./protocol.js";

export interface Binding {
  channel: number;
  sign: -1 | 1;
}

// [key for -1, key for +1] per channel, in channel order
const CHANNEL_KEYS: ReadonlyArray<readonly [string, string]> = [
  ["ArrowLeft", "ArrowRight"],
  ["ArrowDown", "ArrowUp"],
  ["a", "d"],
  ["s", "w"],
];

/** Bindings covering exactly the action dimensions announced at handshake. */
export function defaultKeymap(actionDim: number): Map<string, Binding> {
  if (!Number.isInteger(actionDim) || actionDim < 1 ||
      actionDim > CHANNEL_KEYS.length) {
    throw new Error(`no default bindings for ${actionDim} action channels`);
  }
  const map = new Map<string, Binding>();
  for (let ch = 0; ch < actionDim; ch++) {
    const [minus, plus] = CHANNEL_KEYS[ch];
    map.set(minus, { channel: ch, sign: -1 });
    map.set(plus, { channel: ch, sign: 1 });
  }
  return map;
}

export const MAX_EVENTS_PER_SECOND = 10;

/** Per-channel token clock: at most `perSecond` events per channel. */
export class RateLimiter {
  private last = new Map<number, number>();

  constructor(readonly perSecond: number = MAX_EVENTS_PER_SECOND) {
    if (perSecond <= 0) throw new Error("perSecond must be positive");
  }

  allow(channel: number, nowMs: number): boolean {
    const interval = 1000 / this.perSecond;
    const prev = this.last.get(channel);
    if (prev !== undefined && nowMs - prev < interval) {
      return false;
    }
    this.last.set(channel, nowMs);
    return true;
  }
}

/** Map a key press to a feedback message, or null when the key is unbound
 * or the channel is rate-limited. */
export function keyToFeedback(key: string, map: Map<string, Binding>,
                              limiter: RateLimiter, nowMs: number,
                              session: string,
                              actionDim: number): FeedbackMsg | null {
  const bind = map.get(key);
  if (bind === undefined) return null;
  if (!limiter.allow(bind.channel, nowMs)) return null;
  return feedbackMessage(session, actionDim, bind.channel, bind.sign);
}
