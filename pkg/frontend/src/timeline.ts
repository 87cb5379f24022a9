import { KIND_COLORS, type Keyframe } from "./types";

/**
 * Horizontal scrubber with one marker per keyframe. Clicking a marker
 * seeks to that keyframe's exact t_us; clicking the track seeks
 * proportionally. Rendering is plain DOM so it stays testable.
 */
export class Timeline {
  readonly element: HTMLElement;
  private readonly track: HTMLElement;
  private readonly playhead: HTMLElement;
  private readonly readout: HTMLElement;
  private readonly ribbon: HTMLElement;
  private readonly markers = new Map<number, HTMLElement>();

  constructor(
    private readonly durationUs: number,
    keyframes: Keyframe[],
    private readonly onSeek: (tUs: number) => void,
  ) {
    const doc = document;
    this.element = doc.createElement("div");
    this.element.className = "timeline";

    this.track = doc.createElement("div");
    this.track.className = "timeline-track";
    this.track.addEventListener("click", (event) => {
      const rect = this.track.getBoundingClientRect();
      const width = rect.width || this.track.clientWidth || 1;
      const fraction = Math.min(Math.max((event.clientX - rect.left) / width, 0), 1);
      this.onSeek(Math.round(fraction * this.durationUs));
    });

    this.playhead = doc.createElement("div");
    this.playhead.className = "timeline-playhead";
    this.track.appendChild(this.playhead);

    for (const keyframe of keyframes) {
      const marker = doc.createElement("button");
      marker.className = "timeline-marker";
      marker.type = "button";
      marker.title = `[${formatMmss(keyframe.t_us)}] ${keyframe.kind}: ${keyframe.label}`;
      marker.dataset.tUs = String(keyframe.t_us);
      marker.dataset.annotationId = String(keyframe.annotation_id);
      marker.style.left = `${this.percent(keyframe.t_us)}%`;
      marker.style.background = KIND_COLORS[keyframe.kind];
      marker.addEventListener("click", (event) => {
        event.stopPropagation(); // marker click wins over track click
        this.onSeek(keyframe.t_us);
      });
      this.markers.set(keyframe.annotation_id, marker);
      this.track.appendChild(marker);
    }

    this.readout = doc.createElement("span");
    this.readout.className = "timeline-readout";
    this.readout.textContent = `00:00 / ${formatMmss(durationUs)}`;

    this.ribbon = doc.createElement("div");
    this.ribbon.className = "timeline-ribbon";

    this.element.appendChild(this.track);
    this.element.appendChild(this.readout);
    this.element.appendChild(this.ribbon);
  }

  private percent(tUs: number): number {
    if (this.durationUs <= 0) {
      return 0;
    }
    return (tUs / this.durationUs) * 100;
  }

  setCursor(tUs: number): void {
    this.playhead.style.left = `${this.percent(tUs)}%`;
    this.readout.textContent = `${formatMmss(tUs)} / ${formatMmss(this.durationUs)}`;
  }

  setTranscript(text: string | null): void {
    this.ribbon.textContent = text ?? "";
  }

  highlightActive(annotationIds: number[]): void {
    const active = new Set(annotationIds);
    for (const [id, marker] of this.markers) {
      marker.classList.toggle("active", active.has(id));
    }
  }

  get markerCount(): number {
    return this.markers.size;
  }
}

export function formatMmss(tUs: number): string {
  const totalSeconds = Math.floor(tUs / 1_000_000);
  const minutes = Math.floor(totalSeconds / 60);
  const seconds = totalSeconds % 60;
  return `${String(minutes).padStart(2, "0")}:${String(seconds).padStart(2, "0")}`;
}
