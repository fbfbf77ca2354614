/** Wire protocol of the training gateway.
 *
 * Message shapes mirror the server's JSON exactly; anything that does not
 * validate is malformed and must be ignored by the caller. The UI never
 * sends an h entry outside {-1, 0, +1}.
 */

export const PROTOCOL_VERSION = 1;

export interface HelloMsg {
  type: "hello";
  version: number;
  session: string;
  env: string;
  obs_dim: number;
  action_dim: number;
  algo: string;
  rate: number;
}

export interface FrameMsg {
  type: "frame";
  session: string;
  env: string;
  episode: number;
  step: number;
  ep_step: number;
  state: number[];
  action: number[];
  suggestion: number[];
  correction: number[];
  h: number[];
  reward: number;
  episode_return: number;
  done: boolean;
}

export interface SummaryMsg {
  type: "summary";
  session: string;
  episode: number;
  return: number;
  feedback_count: number;
  steps: number;
}

export type ServerMsg = HelloMsg | FrameMsg | SummaryMsg;

export interface FeedbackMsg {
  type: "feedback";
  session: string;
  h: number[];
  ts?: number;
}

export interface ControlMsg {
  type: "control";
  action: "pause" | "resume" | "reset";
}

const isNum = (v: unknown): v is number =>
  typeof v === "number" && Number.isFinite(v);
const isInt = (v: unknown): v is number => isNum(v) && Number.isInteger(v);
const isStr = (v: unknown): v is string => typeof v === "string";
const numList = (v: unknown): v is number[] =>
  Array.isArray(v) && v.every(isNum);
const hList = (v: unknown): v is number[] =>
  Array.isArray(v) && v.every((x) => x === -1 || x === 0 || x === 1);

function isHello(m: Record<string, unknown>): boolean {
  return isInt(m.version) && isStr(m.session) && isStr(m.env) &&
    isInt(m.obs_dim) && isInt(m.action_dim) && isStr(m.algo) && isNum(m.rate);
}

function isFrame(m: Record<string, unknown>): boolean {
  if (!(isStr(m.session) && isStr(m.env) && isInt(m.episode) &&
        isInt(m.step) && isInt(m.ep_step) && numList(m.state) &&
        numList(m.action) && numList(m.suggestion) && numList(m.correction) &&
        hList(m.h) && isNum(m.reward) && isNum(m.episode_return) &&
        typeof m.done === "boolean")) {
    return false;
  }
  const n = (m.action as number[]).length;
  return (m.suggestion as number[]).length === n &&
    (m.correction as number[]).length === n &&
    (m.h as number[]).length === n;
}

function isSummary(m: Record<string, unknown>): boolean {
  return isStr(m.session) && isInt(m.episode) && isNum(m.return) &&
    isInt(m.feedback_count) && isInt(m.steps);
}

/** Decode one server message; null for anything malformed. */
export function parseServerMessage(text: string): ServerMsg | null {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch {
    return null;
  }
  if (typeof raw !== "object" || raw === null || Array.isArray(raw)) {
    return null;
  }
  const m = raw as Record<string, unknown>;
  if (m.type === "hello" && isHello(m)) return m as unknown as HelloMsg;
  if (m.type === "frame" && isFrame(m)) return m as unknown as FrameMsg;
  if (m.type === "summary" && isSummary(m)) return m as unknown as SummaryMsg;
  return null;
}

/** One feedback event: a single nonzero channel in an otherwise zero h. */
export function feedbackMessage(session: string, actionDim: number,
                                channel: number, sign: -1 | 1): FeedbackMsg {
  if (!Number.isInteger(channel) || channel < 0 || channel >= actionDim) {
    throw new Error(`channel ${channel} out of range for ${actionDim} dims`);
  }
  const h = new Array<number>(actionDim).fill(0);
  h[channel] = sign;
  return { type: "feedback", session, h };
}

export function controlMessage(action: ControlMsg["action"]): ControlMsg {
  return { type: "control", action };
}
