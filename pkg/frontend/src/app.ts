/** Browser entry point: WebSocket wiring, key handling, badges, rendering. */

import { defaultKeymap, keyToFeedback, Binding, RateLimiter } from "./keymap.js";
import { applyServerText, newViewState, ViewState } from "./model.js";
import { controlMessage } from "./protocol.js";
import { Panels, renderAll } from "./render.js";

const RECONNECT_MS = 1000;

function ctx(id: string): CanvasRenderingContext2D {
  const el = document.getElementById(id) as HTMLCanvasElement | null;
  if (el === null) throw new Error(`missing canvas #${id}`);
  const c = el.getContext("2d");
  if (c === null) throw new Error(`no 2d context for #${id}`);
  return c;
}

function setText(id: string, value: string): void {
  const el = document.getElementById(id);
  if (el !== null) el.textContent = value;
}

function keyHelp(map: Map<string, Binding>): string {
  const byChannel = new Map<number, { minus?: string; plus?: string }>();
  for (const [key, b] of map) {
    const slot = byChannel.get(b.channel) ?? {};
    if (b.sign < 0) slot.minus = key;
    else slot.plus = key;
    byChannel.set(b.channel, slot);
  }
  const parts: string[] = [];
  for (const [ch, slot] of [...byChannel.entries()].sort((a, b) => a[0] - b[0])) {
    parts.push(`ch${ch}  ${slot.minus} = lower, ${slot.plus} = raise`);
  }
  return parts.join("    ");
}

class App {
  state: ViewState = newViewState();
  keymap: Map<string, Binding> = new Map();
  limiter = new RateLimiter();
  ws: WebSocket | null = null;
  panels: Panels;

  constructor() {
    this.panels = {
      scene: ctx("scene"),
      correction: ctx("correction"),
      returns: ctx("returns"),
      feedback: ctx("feedback"),
    };
  }

  connect(): void {
    this.state.status = "connecting";
    this.refreshBadges();
    const proto = location.protocol === "https:" ? "wss" : "ws";
    const ws = new WebSocket(`${proto}://${location.host}/ws`);
    this.ws = ws;
    ws.onopen = () => {
      this.state.status = "connected";
      this.refreshBadges();
    };
    ws.onmessage = (ev) => this.onText(String(ev.data));
    ws.onclose = () => {
      this.state.status = "disconnected";
      this.refreshBadges();
      setTimeout(() => this.connect(), RECONNECT_MS);
    };
  }

  onText(raw: string): void {
    const kind = applyServerText(this.state, raw);
    if (kind === "hello" && this.state.hello !== null) {
      this.keymap = defaultKeymap(this.state.hello.action_dim);
      setText("env-name", `${this.state.hello.env} / ${this.state.hello.algo}`);
      setText("key-help", keyHelp(this.keymap));
    }
    if (kind === "frame" || kind === "summary") {
      renderAll(this.panels, this.state);
    }
    this.refreshBadges();
  }

  onKey(ev: KeyboardEvent): void {
    if (!this.keymap.has(ev.key)) return;
    ev.preventDefault();
    if (this.state.hello === null || this.ws === null) return;
    if (this.ws.readyState !== WebSocket.OPEN) return;
    const msg = keyToFeedback(ev.key, this.keymap, this.limiter,
                              performance.now(), this.state.hello.session,
                              this.state.hello.action_dim);
    if (msg === null) return;
    this.ws.send(JSON.stringify(msg));
    this.state.sentFeedback += 1;
    this.refreshBadges();
  }

  control(action: "pause" | "resume" | "reset"): void {
    if (this.ws === null || this.ws.readyState !== WebSocket.OPEN) return;
    this.ws.send(JSON.stringify(controlMessage(action)));
  }

  refreshBadges(): void {
    const badge = document.getElementById("status");
    if (badge !== null) {
      badge.textContent = this.state.status;
      badge.className = `badge ${this.state.status}`;
    }
    setText("counts", `frames ${this.state.frames}   episodes ` +
            `${this.state.episodes}   feedback sent ${this.state.sentFeedback}`);
    setText("malformed", this.state.malformed > 0 ?
            `malformed messages ignored: ${this.state.malformed}` : "");
  }
}

function main(): void {
  const app = new App();
  window.addEventListener("keydown", (ev) => app.onKey(ev));
  for (const action of ["pause", "resume", "reset"] as const) {
    const btn = document.getElementById(`btn-${action}`);
    if (btn !== null) {
      btn.addEventListener("click", () => app.control(action));
    }
  }
  app.connect();
  renderAll(app.panels, app.state);
}

main();
