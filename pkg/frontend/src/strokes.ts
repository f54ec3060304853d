/**
 * Pointer-trace capture and stroke payload construction.
 *
 * The UI sends vector polylines; the server rasterizes them, so previews
 * always come back from the service rather than being drawn locally.
 */

import type { ColorStrokePayload, StrokePayload } from "./types";

export const DEFAULT_COLOR_ALPHA = 0.4;

export class PointerTrace {
  private points: [number, number][] = [];

  add(x: number, y: number): void {
    const last = this.points[this.points.length - 1];
    // Collapse sub-pixel jitter so payloads stay small.
    if (last && Math.hypot(x - last[0], y - last[1]) < 0.75) return;
    this.points.push([x, y]);
  }

  /** An empty drag (no movement) still yields a single-point stroke. */
  finish(): [number, number][] {
    return this.points.length > 0 ? [...this.points] : [];
  }

  get length(): number {
    return this.points.length;
  }
}

export function toStrokePayload(points: [number, number][], radius: number): StrokePayload {
  if (points.length === 0) throw new Error("stroke needs at least one point");
  if (radius <= 0) throw new Error("radius must be positive");
  return { points, radius };
}

export function toColorStrokePayload(
  points: [number, number][],
  radius: number,
  color: string,
  alpha: number = DEFAULT_COLOR_ALPHA,
): ColorStrokePayload {
  if (!/^#[0-9a-fA-F]{6}$/.test(color)) throw new Error(`bad hex color ${color}`);
  if (alpha < 0 || alpha > 1) throw new Error("alpha must lie in [0, 1]");
  return { ...toStrokePayload(points, radius), color, alpha };
}

export type Tool = "fill" | "edge-add" | "edge-subtract" | "color";

/** Which update-payload field a finished stroke belongs to, per tool. */
export function strokeField(tool: Tool): "strokes" | "add_strokes" | "sub_strokes" | "color_strokes" {
  switch (tool) {
    case "fill":
      return "strokes";
    case "edge-add":
      return "add_strokes";
    case "edge-subtract":
      return "sub_strokes";
    case "color":
      return "color_strokes";
  }
}

/** The layer kind a tool paints on (created on demand). */
export function toolLayerKind(tool: Tool): "spatial" | "structural" | "color" {
  return tool === "fill" ? "spatial" : tool === "color" ? "color" : "structural";
}
