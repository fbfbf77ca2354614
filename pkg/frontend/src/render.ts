/** Canvas drawing: environment scene, correction bar, and chart panels. */

import { carScreenPos, rodEndpoint, seriesPath, CAR_GOAL, CAR_X_MAX,
         CAR_X_MIN } from "./geometry.js";
import { Ring, ViewState } from "./model.js";

const COLORS = {
  background: "#11151c",
  grid: "#2a3140",
  rod: "#e8e3d3",
  bob: "#e0a458",
  torque: "#6fc2ff",
  hill: "#4a5568",
  car: "#e0a458",
  flag: "#7bd88f",
  action: "#6fc2ff",
  suggestion: "#8a93a6",
  feedback: "#e25d5d",
  series: "#7bd88f",
  series2: "#e0a458",
  text: "#aab3c5",
};

function clear(ctx: CanvasRenderingContext2D): void {
  ctx.fillStyle = COLORS.background;
  ctx.fillRect(0, 0, ctx.canvas.width, ctx.canvas.height);
}

function drawPendulum(ctx: CanvasRenderingContext2D, state: number[],
                      action: number[]): void {
  const w = ctx.canvas.width;
  const h = ctx.canvas.height;
  const cx = w / 2;
  const cy = h / 2;
  const len = Math.min(w, h) * 0.35;
  const [cos, sin] = state;
  const tip = rodEndpoint(cos, sin, cx, cy, len);

  ctx.strokeStyle = COLORS.grid;
  ctx.beginPath();
  ctx.moveTo(cx - len * 1.2, cy);
  ctx.lineTo(cx + len * 1.2, cy);
  ctx.stroke();

  ctx.strokeStyle = COLORS.rod;
  ctx.lineWidth = 5;
  ctx.beginPath();
  ctx.moveTo(cx, cy);
  ctx.lineTo(tip.x, tip.y);
  ctx.stroke();
  ctx.lineWidth = 1;
  ctx.fillStyle = COLORS.bob;
  ctx.beginPath();
  ctx.arc(tip.x, tip.y, 9, 0, 2 * Math.PI);
  ctx.fill();

  // torque arrow: an arc around the pivot in the direction of the action
  const u = action[0] ?? 0;
  if (Math.abs(u) > 0.02) {
    const span = Math.abs(u) * 1.2;
    const start = -Math.PI / 2;
    ctx.strokeStyle = COLORS.torque;
    ctx.lineWidth = 3;
    ctx.beginPath();
    ctx.arc(cx, cy, len * 0.45, start, start + Math.sign(u) * span,
            u < 0);
    ctx.stroke();
    ctx.lineWidth = 1;
  }
}

function drawMountainCar(ctx: CanvasRenderingContext2D, state: number[],
                         action: number[]): void {
  const w = ctx.canvas.width;
  const h = ctx.canvas.height;
  ctx.strokeStyle = COLORS.hill;
  ctx.lineWidth = 2;
  ctx.beginPath();
  for (let i = 0; i <= 100; i++) {
    const x = CAR_X_MIN + (i / 100) * (CAR_X_MAX - CAR_X_MIN);
    const p = carScreenPos(x, w, h);
    if (i === 0) ctx.moveTo(p.x, p.y);
    else ctx.lineTo(p.x, p.y);
  }
  ctx.stroke();
  ctx.lineWidth = 1;

  const goal = carScreenPos(CAR_GOAL, w, h);
  ctx.strokeStyle = COLORS.flag;
  ctx.beginPath();
  ctx.moveTo(goal.x, goal.y);
  ctx.lineTo(goal.x, goal.y - 24);
  ctx.stroke();
  ctx.fillStyle = COLORS.flag;
  ctx.beginPath();
  ctx.moveTo(goal.x, goal.y - 24);
  ctx.lineTo(goal.x + 12, goal.y - 19);
  ctx.lineTo(goal.x, goal.y - 14);
  ctx.fill();

  const pos = carScreenPos(state[0] ?? 0, w, h);
  ctx.fillStyle = COLORS.car;
  ctx.beginPath();
  ctx.arc(pos.x, pos.y - 6, 7, 0, 2 * Math.PI);
  ctx.fill();

  const u = action[0] ?? 0;
  if (Math.abs(u) > 0.02) {
    ctx.strokeStyle = COLORS.torque;
    ctx.lineWidth = 3;
    ctx.beginPath();
    ctx.moveTo(pos.x, pos.y - 20);
    ctx.lineTo(pos.x + u * 30, pos.y - 20);
    ctx.stroke();
    ctx.lineWidth = 1;
  }
}

/** Suggestion vs executed action per channel, feedback channels flagged. */
function drawCorrection(ctx: CanvasRenderingContext2D, suggestion: number[],
                        action: number[], h: number[]): void {
  const w = ctx.canvas.width;
  const rows = action.length;
  const rowH = ctx.canvas.height / Math.max(rows, 1);
  const toX = (v: number) => 10 + ((v + 1) / 2) * (w - 20);
  for (let i = 0; i < rows; i++) {
    const y = rowH * (i + 0.5);
    ctx.strokeStyle = COLORS.grid;
    ctx.beginPath();
    ctx.moveTo(10, y);
    ctx.lineTo(w - 10, y);
    ctx.stroke();
    ctx.strokeStyle = h[i] !== 0 ? COLORS.feedback : COLORS.suggestion;
    ctx.beginPath();
    ctx.moveTo(toX(suggestion[i]), y - 8);
    ctx.lineTo(toX(suggestion[i]), y + 8);
    ctx.stroke();
    ctx.fillStyle = COLORS.action;
    ctx.beginPath();
    ctx.arc(toX(action[i]), y, 5, 0, 2 * Math.PI);
    ctx.fill();
  }
}

function drawSeries(ctx: CanvasRenderingContext2D, ring: Ring, color: string,
                    label: string): void {
  clear(ctx);
  const values = ring.values();
  ctx.fillStyle = COLORS.text;
  ctx.font = "12px sans-serif";
  if (values.length === 0) {
    ctx.fillText(`${label}: waiting for data`, 8, 16);
    return;
  }
  const lo = Math.min(...values);
  const hi = Math.max(...values);
  ctx.fillText(`${label}  last ${values[values.length - 1].toFixed(2)}  ` +
               `range [${lo.toFixed(1)}, ${hi.toFixed(1)}]`, 8, 16);
  const path = seriesPath(values, ctx.canvas.width - 16,
                          ctx.canvas.height - 30);
  ctx.strokeStyle = color;
  ctx.beginPath();
  path.forEach((p, i) => {
    if (i === 0) ctx.moveTo(p.x + 8, p.y + 24);
    else ctx.lineTo(p.x + 8, p.y + 24);
  });
  ctx.stroke();
}

export interface Panels {
  scene: CanvasRenderingContext2D;
  correction: CanvasRenderingContext2D;
  returns: CanvasRenderingContext2D;
  feedback: CanvasRenderingContext2D;
}

export function renderAll(panels: Panels, state: ViewState): void {
  clear(panels.scene);
  clear(panels.correction);
  const frame = state.frame;
  if (frame !== null) {
    if (frame.env === "mountaincar") {
      drawMountainCar(panels.scene, frame.state, frame.action);
    } else {
      drawPendulum(panels.scene, frame.state, frame.action);
    }
    drawCorrection(panels.correction, frame.suggestion, frame.action, frame.h);
  }
  drawSeries(panels.returns, state.returns, COLORS.series, "episode return");
  drawSeries(panels.feedback, state.feedbackRate, COLORS.series2,
             "feedback rate");
}
