/** Wire types mirroring the service's pydantic schemas. */

export type LayerKind = "content" | "spatial" | "structural" | "color";

export interface StrokePayload {
  points: [number, number][];
  radius: number;
}

export interface ColorStrokePayload extends StrokePayload {
  color: string; // hex #rrggbb
  alpha: number;
}

export interface TransformPayload {
  x: number;
  y: number;
  scale: number;
  rotation: number;
}

export interface LayerCreatePayload {
  kind: LayerKind;
  visible?: boolean;
  strength?: number;
  image_b64?: string;
  mask_b64?: string;
  transform?: TransformPayload;
  base_edges_b64?: string;
  use_canny_base?: boolean;
  add_strokes?: StrokePayload[];
  sub_strokes?: StrokePayload[];
  strokes?: StrokePayload[];
  base?: "source" | "blank";
  color_strokes?: ColorStrokePayload[];
}

export interface LayerUpdatePayload {
  visible?: boolean;
  strength?: number;
  transform?: TransformPayload;
  mask_b64?: string;
  add_strokes?: StrokePayload[];
  sub_strokes?: StrokePayload[];
  strokes?: StrokePayload[];
  color_strokes?: ColorStrokePayload[];
  reorder_to?: number;
}

export interface LayerSummary {
  id: string;
  kind: LayerKind;
  visible: boolean;
  strength: number;
  stroke_count: number;
}

export interface Digests {
  image: string;
  mask: string | null;
  edges: string | null;
  colors: string | null;
}

export interface SessionSummary {
  id: string;
  revision: number;
  width: number;
  height: number;
  layers: LayerSummary[];
  digests: Digests;
}

export interface MutateResponse {
  id: string;
  revision: number;
  layer_id: string | null;
  digests: Digests;
}

export interface CompositeResponse {
  revision: number;
  digests: Digests;
  image_b64: string;
  mask_b64: string | null;
  edges_b64: string | null;
  colors_b64: string | null;
  strengths: Record<string, number>;
}

export interface GenerateResponse {
  revision: number;
  seed: number;
  steps: number;
  strengths: Record<string, number>;
  checkpoint_tag: string;
  image_b64: string;
  result_digest: string;
}

export interface ExportedSession {
  version: "session-export-v1";
  base_b64: string;
  stack: unknown;
  revision: number;
}

export interface HealthResponse {
  status: string;
  checkpoint_loaded: boolean;
}
