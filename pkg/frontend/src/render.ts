/**
 * Pure view-model helpers turning a scene document into drawable
 * primitives.  Nothing here computes geometry: homogeneous triples from
 * the service are dehomogenized for the screen and infinite lines are
 * clipped to the viewport, exactly what any SVG backend must do.
 */

import type { SceneDoc, SceneRing } from "./api.js";

export interface Box {
  x: number;
  y: number;
  w: number;
  h: number;
}

export interface Segment {
  x1: number;
  y1: number;
  x2: number;
  y2: number;
}

export interface Layer {
  label: string;
  kind: "points" | "lines";
  points: Array<{ x: number; y: number }>;
  segments: Segment[];
}

/** Dehomogenize [x, y, z]; null for points at (or numerically near) infinity. */
export function affine(v: number[]): { x: number; y: number } | null {
  if (Math.abs(v[2]) < 1e-9) return null;
  return { x: v[0] / v[2], y: v[1] / v[2] };
}

/** Bounding box of all finite scene points with a 5% margin. */
export function sceneBox(scene: SceneDoc): Box {
  const xs: number[] = [];
  const ys: number[] = [];
  for (const ring of scene.rings) {
    if (ring.kind !== "points") continue;
    for (const element of ring.elements) {
      const p = affine(element);
      if (p === null) continue;
      xs.push(p.x);
      ys.push(p.y);
    }
  }
  if (xs.length === 0) return { x: -1, y: -1, w: 2, h: 2 };
  const x0 = Math.min(...xs);
  const x1 = Math.max(...xs);
  const y0 = Math.min(...ys);
  const y1 = Math.max(...ys);
  const w = Math.max(x1 - x0, 1e-6);
  const h = Math.max(y1 - y0, 1e-6);
  return {
    x: x0 - 0.05 * w,
    y: y0 - 0.05 * h,
    w: 1.1 * w,
    h: 1.1 * h,
  };
}

/** Segment of the infinite line ax + by + c = 0 inside the box, or null. */
export function clipLine(line: number[], box: Box): Segment | null {
  const norm = Math.hypot(line[0], line[1]);
  if (norm < 1e-12) return null;
  const a = line[0] / norm;
  const b = line[1] / norm;
  const c = line[2] / norm;
  const px = -a * c;
  const py = -b * c;
  const dx = b;
  const dy = -a;
  let tLo = -1e18;
  let tHi = 1e18;
  const edges: Array<[number, number]> = [
    [-dx, px - box.x],
    [dx, box.x + box.w - px],
    [-dy, py - box.y],
    [dy, box.y + box.h - py],
  ];
  for (const [p, q] of edges) {
    if (Math.abs(p) < 1e-15) {
      if (q < 0) return null;
      continue;
    }
    const t = q / p;
    if (p < 0) tLo = Math.max(tLo, t);
    else tHi = Math.min(tHi, t);
  }
  if (tLo >= tHi) return null;
  return {
    x1: px + tLo * dx,
    y1: py + tLo * dy,
    x2: px + tHi * dx,
    y2: py + tHi * dy,
  };
}

/** One drawable layer per ring, keyed by the ring label for toggling. */
export function ringLayers(scene: SceneDoc, box: Box): Layer[] {
  return scene.rings.map((ring: SceneRing) => {
    const layer: Layer = {
      label: ring.label,
      kind: ring.kind,
      points: [],
      segments: [],
    };
    for (const element of ring.elements) {
      if (ring.kind === "points") {
        const p = affine(element);
        if (p !== null) layer.points.push(p);
      } else {
        const seg = clipLine(element, box);
        if (seg !== null) layer.segments.push(seg);
      }
    }
    return layer;
  });
}

export interface Gauge {
  /** 0 (closed to machine precision) .. 1 (fully broken). */
  level: number;
  text: string;
  ok: boolean;
}

/** Map a closure residual onto a log-scale gauge in [1e-14, 1]. */
export function residualGauge(residual: number, tolerance = 1e-6): Gauge {
  const clamped = Math.min(Math.max(residual, 1e-14), 1);
  const level = (Math.log10(clamped) + 14) / 14;
  return {
    level,
    text: residual.toExponential(2),
    ok: residual < tolerance,
  };
}

/**
 * Eccentric angle of a pointer position relative to an axis-aligned
 * ellipse with squared semi-axes (A, B): input mapping for the t0 drag
 * handle, not geometry (the handle itself is drawn at the first vertex
 * returned by the service).
 */
export function pointerToT0(
  x: number,
  y: number,
  axes: [number, number],
): number {
  const t = Math.atan2(y / Math.sqrt(axes[1]), x / Math.sqrt(axes[0]));
  return t < 0 ? t + 2 * Math.PI : t;
}

/** The drag-handle position: the first vertex of the polygon ring. */
export function handlePosition(
  scene: SceneDoc,
): { x: number; y: number } | null {
  const base = scene.rings.find((r) => r.kind === "points");
  if (base === undefined || base.elements.length === 0) return null;
  return affine(base.elements[0]);
}
