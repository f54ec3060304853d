/**
 * DOM construction for the layered-canvas editor.
 *
 * Layout: toolbar (brush tools, radius, color, opacity), the canvas with a
 * vector trail overlay for the stroke in progress, condition-map previews
 * (always images returned by the service), the layer panel (visibility,
 * strength slider, reorder, delete), and the generate strip.
 */

import { ApiClient } from "./api";
import { sigmaLabel, sigmaToSlider, sliderToSigma, SLIDER_STEPS } from "./sigma";
import { SessionStore } from "./state";
import {
  DEFAULT_COLOR_ALPHA,
  PointerTrace,
  strokeField,
  Tool,
  toolLayerKind,
  toColorStrokePayload,
  toStrokePayload,
} from "./strokes";
import type { GenerateResponse, LayerUpdatePayload } from "./types";

export interface ViewState {
  tool: Tool;
  radius: number;
  color: string;
  alpha: number;
  useCannyBase: boolean;
  seed: number;
  steps: number | undefined;
  selectedLayer: string | null;
}

export class CanvasApp {
  readonly view: ViewState = {
    tool: "fill",
    radius: 8,
    color: "#ff3333",
    alpha: DEFAULT_COLOR_ALPHA,
    useCannyBase: false,
    seed: 0,
    steps: undefined,
    selectedLayer: null,
  };
  readonly store: SessionStore;
  private root: HTMLElement;
  private trace: PointerTrace | null = null;
  private busy = false;

  // Live elements refreshed on every state change.
  private previewImg!: HTMLImageElement;
  private mapsRow!: HTMLDivElement;
  private layerList!: HTMLUListElement;
  private statusLine!: HTMLDivElement;
  private resultStrip!: HTMLDivElement;
  private trail!: HTMLCanvasElement;

  constructor(
    root: HTMLElement,
    private client: ApiClient,
  ) {
    this.root = root;
    this.store = new SessionStore(client);
    this.store.subscribe(() => this.renderPanel());
    this.buildDom();
  }

  // ---------------------------------------------------------------- DOM --

  private el<K extends keyof HTMLElementTagNameMap>(
    tag: K,
    attrs: Record<string, string> = {},
    text?: string,
  ): HTMLElementTagNameMap[K] {
    const node = document.createElement(tag);
    for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
    if (text !== undefined) node.textContent = text;
    return node;
  }

  private buildDom(): void {
    this.root.innerHTML = "";
    this.root.appendChild(this.buildToolbar());

    const main = this.el("div", { class: "lk-main" });
    const stage = this.el("div", { class: "lk-stage" });
    this.previewImg = this.el("img", { class: "lk-preview", alt: "composite preview" });
    this.trail = this.el("canvas", { class: "lk-trail" });
    stage.appendChild(this.previewImg);
    stage.appendChild(this.trail);
    this.bindPointer(stage);
    main.appendChild(stage);

    const side = this.el("div", { class: "lk-side" });
    this.layerList = this.el("ul", { class: "lk-layers" });
    side.appendChild(this.el("h3", {}, "Layers"));
    side.appendChild(this.layerList);
    this.mapsRow = this.el("div", { class: "lk-maps" });
    side.appendChild(this.el("h3", {}, "Condition maps"));
    side.appendChild(this.mapsRow);
    main.appendChild(side);
    this.root.appendChild(main);

    this.root.appendChild(this.buildGenerateStrip());
    this.statusLine = this.el("div", { class: "lk-status" }, "no session");
    this.root.appendChild(this.statusLine);
  }

  private buildToolbar(): HTMLElement {
    const bar = this.el("div", { class: "lk-toolbar" });
    const tools: [Tool, string][] = [
      ["fill", "Fill brush (mask)"],
      ["edge-add", "Edge add"],
      ["edge-subtract", "Edge subtract"],
      ["color", "Color brush"],
    ];
    for (const [tool, label] of tools) {
      const button = this.el("button", { "data-tool": tool, title: label }, label);
      button.addEventListener("click", () => {
        this.view.tool = tool;
        bar.querySelectorAll("button[data-tool]").forEach((b) =>
          b.classList.toggle("active", b.getAttribute("data-tool") === tool),
        );
      });
      if (tool === this.view.tool) button.classList.add("active");
      bar.appendChild(button);
    }

    const radius = this.el("input", {
      type: "range", min: "1", max: "48", value: String(this.view.radius), "data-role": "radius",
    });
    radius.addEventListener("input", () => (this.view.radius = Number(radius.value)));
    bar.appendChild(this.el("label", {}, "radius"));
    bar.appendChild(radius);

    const color = this.el("input", { type: "color", value: this.view.color, "data-role": "color" });
    color.addEventListener("input", () => (this.view.color = color.value));
    bar.appendChild(color);

    const alpha = this.el("input", {
      type: "range", min: "0", max: "1", step: "0.05",
      value: String(this.view.alpha), "data-role": "alpha",
    });
    alpha.addEventListener("input", () => (this.view.alpha = Number(alpha.value)));
    bar.appendChild(this.el("label", {}, "opacity"));
    bar.appendChild(alpha);

    const canny = this.el("input", { type: "checkbox", "data-role": "canny-base" });
    canny.addEventListener("change", () => (this.view.useCannyBase = canny.checked));
    const cannyLabel = this.el("label", {}, "edge base from image");
    cannyLabel.prepend(canny);
    bar.appendChild(cannyLabel);

    const upload = this.el("input", { type: "file", accept: "image/png", "data-role": "content-file" });
    upload.addEventListener("change", async () => {
      const file = upload.files?.[0];
      if (file) await this.addContentPiece(file);
      upload.value = "";
    });
    const uploadLabel = this.el("label", { class: "lk-upload" }, "add content piece ");
    uploadLabel.appendChild(upload);
    bar.appendChild(uploadLabel);
    return bar;
  }

  private buildGenerateStrip(): HTMLElement {
    const strip = this.el("div", { class: "lk-generate" });
    const seed = this.el("input", {
      type: "number", value: "0", "data-role": "seed", title: "seed",
    });
    seed.addEventListener("input", () => (this.view.seed = Number(seed.value)));
    const steps = this.el("input", {
      type: "number", placeholder: "steps (default 20)", "data-role": "steps",
    });
    steps.addEventListener("input", () => {
      this.view.steps = steps.value === "" ? undefined : Number(steps.value);
    });
    const button = this.el("button", { "data-role": "generate" }, "Generate");
    button.addEventListener("click", () => void this.generate());
    strip.appendChild(this.el("label", {}, "seed"));
    strip.appendChild(seed);
    strip.appendChild(steps);
    strip.appendChild(button);
    this.resultStrip = this.el("div", { class: "lk-results" });
    strip.appendChild(this.resultStrip);
    return strip;
  }

  // ------------------------------------------------------------- session --

  async openSession(imageB64: string): Promise<void> {
    await this.store.open(imageB64);
    await this.refreshPreviews();
  }

  /** Stage coordinates -> image coordinates (the preview may be scaled). */
  private toImageCoords(event: PointerEvent, stage: HTMLElement): [number, number] {
    const rect = stage.getBoundingClientRect();
    const summary = this.store.summary;
    if (!summary || rect.width === 0 || rect.height === 0) return [0, 0];
    const x = ((event.clientX - rect.left) / rect.width) * summary.width;
    const y = ((event.clientY - rect.top) / rect.height) * summary.height;
    return [x, y];
  }

  private bindPointer(stage: HTMLElement): void {
    stage.addEventListener("pointerdown", (event) => {
      if (!this.store.summary) return;
      this.trace = new PointerTrace();
      const [x, y] = this.toImageCoords(event as PointerEvent, stage);
      this.trace.add(x, y);
      this.drawTrail();
    });
    stage.addEventListener("pointermove", (event) => {
      if (!this.trace) return;
      const [x, y] = this.toImageCoords(event as PointerEvent, stage);
      this.trace.add(x, y);
      this.drawTrail();
    });
    const finish = () => {
      if (!this.trace) return;
      const points = this.trace.finish();
      this.trace = null;
      this.clearTrail();
      if (points.length > 0) void this.commitStroke(points);
    };
    stage.addEventListener("pointerup", finish);
    stage.addEventListener("pointerleave", finish);
  }

  /** 2D context for the trail overlay; absent in non-browser test DOMs. */
  private trailContext(): CanvasRenderingContext2D | null {
    try {
      return this.trail.getContext("2d");
    } catch {
      return null;
    }
  }

  /** Dashed vector feedback while dragging; never a condition map. */
  private drawTrail(): void {
    const ctx = this.trailContext();
    const summary = this.store.summary;
    if (!ctx || !summary || !this.trace) return;
    this.trail.width = summary.width;
    this.trail.height = summary.height;
    ctx.clearRect(0, 0, this.trail.width, this.trail.height);
    ctx.setLineDash([4, 3]);
    ctx.strokeStyle = this.view.tool === "color" ? this.view.color : "#00ffcc";
    ctx.lineWidth = 1;
    const points = this.trace.finish();
    if (points.length === 0) return;
    ctx.beginPath();
    ctx.moveTo(points[0][0], points[0][1]);
    for (const [x, y] of points.slice(1)) ctx.lineTo(x, y);
    ctx.stroke();
  }

  private clearTrail(): void {
    this.trailContext()?.clearRect(0, 0, this.trail.width, this.trail.height);
  }

  /** The topmost layer of a kind, if any (strokes append to it). */
  private activeLayerOfKind(kind: string): string | null {
    const summary = this.store.summary;
    if (!summary) return null;
    for (let i = summary.layers.length - 1; i >= 0; i -= 1) {
      if (summary.layers[i].kind === kind) return summary.layers[i].id;
    }
    return null;
  }

  private async commitStroke(points: [number, number][]): Promise<void> {
    const tool = this.view.tool;
    const field = strokeField(tool);
    const payload =
      tool === "color"
        ? toColorStrokePayload(points, this.view.radius, this.view.color, this.view.alpha)
        : toStrokePayload(points, this.view.radius);
    const kind = toolLayerKind(tool);
    const existing = this.activeLayerOfKind(kind);
    if (existing) {
      const update: LayerUpdatePayload = { [field]: [payload] };
      await this.store.updateLayer(existing, update);
    } else {
      await this.store.addLayer({
        kind,
        use_canny_base: kind === "structural" ? this.view.useCannyBase : undefined,
        [field]: [payload],
      });
    }
    await this.refreshPreviews();
  }

  private async addContentPiece(file: File): Promise<void> {
    const dataUrl = await new Promise<string>((resolve, reject) => {
      const reader = new FileReader();
      reader.onload = () => resolve(String(reader.result));
      reader.onerror = () => reject(reader.error);
      reader.readAsDataURL(file);
    });
    const b64 = dataUrl.split(",", 2)[1] ?? "";
    const summary = this.store.summary;
    await this.store.addLayer({
      kind: "content",
      image_b64: b64,
      transform: summary
        ? { x: summary.width / 2, y: summary.height / 2, scale: 1, rotation: 0 }
        : undefined,
    });
    await this.refreshPreviews();
  }

  async refreshPreviews(): Promise<void> {
    if (!this.store.summary) return;
    const composite = await this.client.composite(this.store.sessionId);
    this.previewImg.src = `data:image/png;base64,${composite.image_b64}`;
    this.mapsRow.innerHTML = "";
    const maps: [string, string | null][] = [
      ["mask", composite.mask_b64],
      ["edges", composite.edges_b64],
      ["colors", composite.colors_b64],
    ];
    for (const [name, b64] of maps) {
      if (!b64) continue;
      const cell = this.el("figure", { class: "lk-map" });
      const img = this.el("img", { alt: `${name} preview`, "data-map": name });
      img.src = `data:image/png;base64,${b64}`;
      cell.appendChild(img);
      cell.appendChild(this.el("figcaption", {}, name));
      this.mapsRow.appendChild(cell);
    }
  }

  // --------------------------------------------------------- layer panel --

  private renderPanel(): void {
    const summary = this.store.summary;
    this.layerList.innerHTML = "";
    if (!summary) {
      this.statusLine.textContent = "no session";
      return;
    }
    for (let index = summary.layers.length - 1; index >= 0; index -= 1) {
      const layer = summary.layers[index];
      const item = this.el("li", { "data-layer": layer.id, class: "lk-layer" });

      const visible = this.el("input", { type: "checkbox", "data-role": "visible" });
      visible.checked = layer.visible;
      visible.addEventListener("change", () => {
        void this.store
          .updateLayer(layer.id, { visible: visible.checked })
          .then(() => this.refreshPreviews());
      });
      item.appendChild(visible);

      item.appendChild(this.el("span", { class: "lk-kind" }, layer.kind));
      if (layer.stroke_count > 0) {
        item.appendChild(this.el("span", { class: "lk-count" }, `${layer.stroke_count} strokes`));
      }

      const badge = this.el(
        "span",
        { class: "lk-sigma-badge", "data-role": "sigma-badge" },
        sigmaLabel(layer.strength),
      );
      if (layer.strength === 0) badge.classList.add("disabled");

      const slider = this.el("input", {
        type: "range", min: "0", max: String(SLIDER_STEPS), step: "1",
        value: String(Math.round(sigmaToSlider(layer.strength) * SLIDER_STEPS)),
        "data-role": "sigma",
        title: "strength (0 disables the cue)",
      });
      slider.addEventListener("change", () => {
        const sigma = sliderToSigma(Number(slider.value) / SLIDER_STEPS);
        void this.store
          .updateLayer(layer.id, { strength: sigma })
          .then(() => this.refreshPreviews());
      });
      item.appendChild(slider);
      item.appendChild(badge);

      const up = this.el("button", { "data-role": "up", title: "raise layer" }, "▲");
      up.addEventListener("click", () => {
        void this.store
          .updateLayer(layer.id, { reorder_to: Math.min(index + 1, summary.layers.length - 1) })
          .then(() => this.refreshPreviews());
      });
      const down = this.el("button", { "data-role": "down", title: "lower layer" }, "▼");
      down.addEventListener("click", () => {
        void this.store
          .updateLayer(layer.id, { reorder_to: Math.max(index - 1, 0) })
          .then(() => this.refreshPreviews());
      });
      const remove = this.el("button", { "data-role": "delete", title: "delete layer" }, "✕");
      remove.addEventListener("click", () => {
        void this.store.deleteLayer(layer.id).then(() => this.refreshPreviews());
      });
      item.appendChild(up);
      item.appendChild(down);
      item.appendChild(remove);
      this.layerList.appendChild(item);
    }

    const pending = this.store.pendingEdits.length;
    const conflict = this.store.lastConflict;
    this.statusLine.textContent =
      `session ${summary.id} · revision ${summary.revision}` +
      (pending ? ` · ${pending} unsynced edit(s)` : "") +
      (conflict ? ` · conflict: ${conflict} — ` : "");
    if (conflict && pending) {
      const replay = this.el("button", { "data-role": "replay" }, "replay pending");
      replay.addEventListener("click", () => {
        this.store.lastConflict = null;
        void this.store.replayPending().then(() => this.refreshPreviews());
      });
      this.statusLine.appendChild(replay);
    }
  }

  // ----------------------------------------------------------- generation --

  private async generate(): Promise<void> {
    if (!this.store.summary || this.busy) return;
    this.busy = true;
    try {
      const result = await this.client.generate(this.store.sessionId, this.view.seed, this.view.steps);
      this.pushResult(result);
    } catch (err) {
      const detail = err instanceof Error ? err.message : String(err);
      this.statusLine.textContent = detail.includes("503")
        ? `generation unavailable: ${detail} — start the service with --checkpoint`
        : `generation failed: ${detail}`;
    } finally {
      this.busy = false;
    }
  }

  private pushResult(result: GenerateResponse): void {
    const cell = this.el("figure", { class: "lk-result", "data-digest": result.result_digest });
    const img = this.el("img", { alt: "generation result" });
    img.src = `data:image/png;base64,${result.image_b64}`;
    cell.appendChild(img);
    cell.appendChild(
      this.el("figcaption", {}, `seed ${result.seed} · ${result.steps} steps · ${result.checkpoint_tag}`),
    );
    const useAsBase = this.el("button", { "data-role": "use-as-base" }, "use as base");
    useAsBase.addEventListener("click", () => {
      void this.openSession(result.image_b64);
    });
    cell.appendChild(useAsBase);
    this.resultStrip.prepend(cell);
  }
}

export function buildApp(root: HTMLElement, client: ApiClient): CanvasApp {
  return new CanvasApp(root, client);
}
