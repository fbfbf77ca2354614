/** Scene math shared by the canvas renderer and its tests. */

export interface Point {
  x: number;
  y: number;
}

/** Pendulum rod endpoint on a canvas (y grows downward). The angle is
 * measured from upright, so (cos, sin) = (1, 0) points straight up. */
export function rodEndpoint(cos: number, sin: number, cx: number, cy: number,
                            len: number): Point {
  return { x: cx + len * sin, y: cy - len * cos };
}

/** Mountain profile the car drives on. */
export function hillY(x: number): number {
  return Math.sin(3 * x);
}

export const CAR_X_MIN = -1.2;
export const CAR_X_MAX = 0.6;
export const CAR_GOAL = 0.45;

/** World-to-screen mapping for the mountain-car scene, with a margin so
 * the hill never touches the canvas edge. */
export function carScreenPos(x: number, width: number, height: number): Point {
  const sx = 20 + ((x - CAR_X_MIN) / (CAR_X_MAX - CAR_X_MIN)) * (width - 40);
  const sy = height - 30 - ((hillY(x) + 1.1) / 2.2) * (height - 60);
  return { x: sx, y: sy };
}

/** Scale a series into a w x h box, oldest value at x = 0. A flat series
 * maps to the vertical midline. */
export function seriesPath(values: number[], w: number, h: number): Point[] {
  if (values.length === 0) return [];
  let lo = Math.min(...values);
  let hi = Math.max(...values);
  if (hi === lo) {
    lo -= 1;
    hi += 1;
  }
  const dx = values.length > 1 ? w / (values.length - 1) : 0;
  return values.map((v, i) => ({
    x: i * dx,
    y: h - ((v - lo) / (hi - lo)) * h,
  }));
}
