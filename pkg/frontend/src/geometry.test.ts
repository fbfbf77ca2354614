import { describe, expect, it } from "vitest";
import { carScreenPos, hillY, rodEndpoint, seriesPath, CAR_GOAL, CAR_X_MAX,
         CAR_X_MIN } from "./geometry.js";

describe("rodEndpoint", () => {
  it("points straight up for (cos, sin) = (1, 0)", () => {
    const p = rodEndpoint(1, 0, 100, 100, 50);
    expect(p.x).toBeCloseTo(100);
    expect(p.y).toBeCloseTo(50); // canvas y grows downward
  });

  it("points straight down for (cos, sin) = (-1, 0)", () => {
    const p = rodEndpoint(-1, 0, 100, 100, 50);
    expect(p.x).toBeCloseTo(100);
    expect(p.y).toBeCloseTo(150);
  });

  it("points right for (cos, sin) = (0, 1)", () => {
    const p = rodEndpoint(0, 1, 100, 100, 50);
    expect(p.x).toBeCloseTo(150);
    expect(p.y).toBeCloseTo(100);
  });

  it("keeps the rod length", () => {
    const angles = [0.3, 1.1, 2.5, -0.7];
    for (const th of angles) {
      const p = rodEndpoint(Math.cos(th), Math.sin(th), 0, 0, 42);
      expect(Math.hypot(p.x, p.y)).toBeCloseTo(42);
    }
  });
});

describe("hillY", () => {
  it("matches the track height profile", () => {
    expect(hillY(0)).toBeCloseTo(0);
    expect(hillY(Math.PI / 6)).toBeCloseTo(1);
    expect(hillY(-0.5)).toBeCloseTo(Math.sin(-1.5));
  });
});

describe("carScreenPos", () => {
  const W = 460;
  const H = 300;

  it("stays inside the canvas across the track", () => {
    for (let i = 0; i <= 50; i++) {
      const x = CAR_X_MIN + (i / 50) * (CAR_X_MAX - CAR_X_MIN);
      const p = carScreenPos(x, W, H);
      expect(p.x).toBeGreaterThanOrEqual(0);
      expect(p.x).toBeLessThanOrEqual(W);
      expect(p.y).toBeGreaterThanOrEqual(0);
      expect(p.y).toBeLessThanOrEqual(H);
    }
  });

  it("maps the track ends to the horizontal margins", () => {
    const left = carScreenPos(CAR_X_MIN, W, H);
    const right = carScreenPos(CAR_X_MAX, W, H);
    expect(left.x).toBeLessThan(right.x);
    expect(left.x).toBeCloseTo(20);
    expect(right.x).toBeCloseTo(W - 20);
  });

  it("places the valley below the goal", () => {
    const valley = carScreenPos(-Math.PI / 6, W, H); // sin(3x) minimum
    const goal = carScreenPos(CAR_GOAL, W, H);
    expect(valley.y).toBeGreaterThan(goal.y); // lower on screen = larger y
  });
});

describe("seriesPath", () => {
  it("returns an empty path for no data", () => {
    expect(seriesPath([], 100, 50)).toEqual([]);
  });

  it("runs oldest to newest across the width", () => {
    const path = seriesPath([1, 2, 3, 4, 5], 100, 50);
    expect(path).toHaveLength(5);
    expect(path[0].x).toBeCloseTo(0);
    expect(path[4].x).toBeCloseTo(100);
    for (let i = 1; i < path.length; i++) {
      expect(path[i].x).toBeGreaterThan(path[i - 1].x);
    }
  });

  it("puts larger values higher on the canvas", () => {
    const path = seriesPath([0, 10], 100, 50);
    expect(path[1].y).toBeLessThan(path[0].y);
    expect(path[0].y).toBeLessThanOrEqual(50);
    expect(path[1].y).toBeGreaterThanOrEqual(0);
  });

  it("centers a flat series instead of dividing by zero", () => {
    const path = seriesPath([7, 7, 7], 100, 50);
    for (const p of path) {
      expect(Number.isFinite(p.y)).toBe(true);
      expect(p.y).toBeCloseTo(25);
    }
  });
});
