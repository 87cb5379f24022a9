import type { ApiClient } from "./api";
import { SceneModel } from "./scene";
import { SceneView } from "./scene_view";
import { ReplayConnection, type SocketFactory } from "./stream";
import { SummaryPanel } from "./summary";
import { Timeline } from "./timeline";
import {
  KIND_COLORS,
  REAL_SCALE,
  miniatureMode,
  type Keyframe,
  type ModeSelection,
  type PodEntry,
} from "./types";

export interface PodCardOptions {
  socketFactory?: SocketFactory;
  attachRenderer?: boolean; // false in tests (no WebGL)
}

/**
 * One shelf entry: an independent scene, timeline, control strip, HUD,
 * and summary panel for a single pod, driven by its own replay stream.
 */
export class PodCard {
  readonly element: HTMLElement;
  readonly model = new SceneModel();
  readonly view = new SceneView();
  timeline!: Timeline;
  connection!: ReplayConnection;

  onRemove: (() => void) | null = null;

  private readonly hud: HTMLElement;
  private keyframesById = new Map<number, Keyframe>();
  private mode: ModeSelection = REAL_SCALE;

  constructor(
    private readonly api: ApiClient,
    private readonly entry: PodEntry,
    private readonly options: PodCardOptions = {},
  ) {
    this.element = document.createElement("article");
    this.element.className = "pod-card";

    const header = document.createElement("header");
    const title = document.createElement("h2");
    title.textContent = entry.title;
    const close = document.createElement("button");
    close.type = "button";
    close.className = "card-close";
    close.textContent = "✕";
    close.addEventListener("click", () => {
      this.dispose();
      this.onRemove?.();
    });
    header.appendChild(title);
    header.appendChild(close);
    this.element.appendChild(header);

    const viewport = document.createElement("div");
    viewport.className = "viewport";
    this.hud = document.createElement("div");
    this.hud.className = "hud";
    viewport.appendChild(this.hud);
    this.element.appendChild(viewport);

    if (options.attachRenderer !== false) {
      this.view.attach(viewport);
    }
  }

  /** Fetch statics, open the stream, and wire everything together. */
  async start(): Promise<void> {
    const [keyframes, zones, mesh] = await Promise.all([
      this.api.keyframes(this.entry.pod_id),
      this.api.zones(this.entry.pod_id),
      this.api.mesh(this.entry.pod_id),
    ]);
    this.keyframesById = new Map(keyframes.map((k) => [k.annotation_id, k]));
    this.view.setEnvironment(mesh, zones);
    this.view.setModePlacement(this.mode);

    this.timeline = new Timeline(this.entry.duration_us, keyframes, (tUs) =>
      this.connection.seek(tUs),
    );
    this.element.appendChild(this.timeline.element);
    this.element.appendChild(this.buildControls());

    const summary = new SummaryPanel(this.api, this.entry.pod_id);
    this.element.appendChild(summary.element);
    void summary.load();

    this.connection = new ReplayConnection(this.api.replayUrl(this.entry.pod_id), this.mode, {
      socketFactory: this.options.socketFactory,
    });
    this.connection.onFrame = (frame) => {
      this.model.applyFrame(frame);
      this.view.update(this.model);
      this.timeline.setCursor(frame.t_us);
      this.timeline.highlightActive(frame.active_annotations);
      this.timeline.setTranscript(
        frame.transcript ? `${frame.transcript.speaker}: ${frame.transcript.text}` : null,
      );
      this.renderHud(frame.active_annotations);
    };
    this.connection.onError = (error) => {
      this.renderError(`${error.code}${error.detail ? `: ${error.detail}` : ""}`);
    };
  }

  private buildControls(): HTMLElement {
    const bar = document.createElement("div");
    bar.className = "controls";

    const button = (label: string, className: string, onClick: () => void) => {
      const b = document.createElement("button");
      b.type = "button";
      b.className = className;
      b.textContent = label;
      b.addEventListener("click", onClick);
      bar.appendChild(b);
      return b;
    };

    button("⏮ key", "ctl-prev", () => this.connection.keyframe("prev"));
    button("▶ play", "ctl-play", () => this.connection.play());
    button("⏸ pause", "ctl-pause", () => this.connection.pause());
    button("key ⏭", "ctl-next", () => this.connection.keyframe("next"));

    const rate = document.createElement("select");
    rate.className = "ctl-rate";
    for (const value of ["0.25", "0.5", "1", "2", "4"]) {
      const option = document.createElement("option");
      option.value = value;
      option.textContent = `${value}×`;
      if (value === "1") {
        option.selected = true;
      }
      rate.appendChild(option);
    }
    rate.addEventListener("change", () => this.connection.setRate(Number(rate.value)));
    bar.appendChild(rate);

    const scaleLabel = document.createElement("label");
    scaleLabel.className = "ctl-scale-label";
    scaleLabel.textContent = "scale";
    const scale = document.createElement("input");
    scale.type = "range";
    scale.className = "ctl-scale";
    scale.min = "0.05";
    scale.max = "1";
    scale.step = "0.05";
    scale.value = "1";
    scale.addEventListener("input", () => {
      const value = Number(scale.value);
      this.setMode(value >= 1 ? REAL_SCALE : miniatureMode(value));
    });
    scaleLabel.appendChild(scale);
    bar.appendChild(scaleLabel);

    return bar;
  }

  /** Re-sends the mode op; the server answers with a re-mapped frame. */
  setMode(mode: ModeSelection): void {
    this.mode = mode;
    this.view.setModePlacement(mode);
    this.connection.setMode(mode);
  }

  private renderHud(activeIds: number[]): void {
    this.hud.replaceChildren();
    for (const id of activeIds) {
      const keyframe = this.keyframesById.get(id);
      if (!keyframe) {
        continue;
      }
      const chip = document.createElement("span");
      chip.className = "hud-pin";
      chip.style.background = KIND_COLORS[keyframe.kind];
      chip.textContent = `${keyframe.kind}: ${keyframe.label}`;
      this.hud.appendChild(chip);
    }
  }

  private renderError(message: string): void {
    const toast = document.createElement("div");
    toast.className = "toast";
    toast.textContent = message;
    this.element.appendChild(toast);
  }

  dispose(): void {
    this.connection?.close();
    this.view.detach();
    this.element.remove();
  }
}
