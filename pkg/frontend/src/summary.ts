import type { ApiClient } from "./api";
import { KIND_COLORS, type SummaryData } from "./types";

/**
 * Narrative panel. Fields are rendered verbatim (no rewriting of times,
 * labels, or prose), and the exact response body is kept in a collapsible
 * raw section so the displayed content matches the server byte-for-byte.
 */
export class SummaryPanel {
  readonly element: HTMLElement;
  private readonly body: HTMLElement;
  private readonly raw: HTMLElement;

  constructor(
    private readonly api: ApiClient,
    private readonly podId: string,
  ) {
    this.element = document.createElement("section");
    this.element.className = "summary-panel";

    const header = document.createElement("div");
    header.className = "summary-header";
    const title = document.createElement("h3");
    title.textContent = "Narrative summary";
    const refresh = document.createElement("button");
    refresh.type = "button";
    refresh.className = "summary-refresh";
    refresh.textContent = "Regenerate";
    refresh.addEventListener("click", () => void this.load(true));
    header.appendChild(title);
    header.appendChild(refresh);

    this.body = document.createElement("div");
    this.body.className = "summary-body";
    this.body.textContent = "Loading summary…";

    const details = document.createElement("details");
    const label = document.createElement("summary");
    label.textContent = "Raw server response";
    this.raw = document.createElement("pre");
    this.raw.className = "summary-raw";
    details.appendChild(label);
    details.appendChild(this.raw);

    this.element.appendChild(header);
    this.element.appendChild(this.body);
    this.element.appendChild(details);
  }

  async load(refresh = false): Promise<void> {
    let raw: string;
    let data: SummaryData;
    try {
      ({ raw, data } = await this.api.summary(this.podId, refresh));
    } catch (error) {
      this.body.textContent = `Summary unavailable: ${String(error)}`;
      return;
    }
    this.raw.textContent = raw;
    this.renderFields(data);
  }

  private renderFields(data: SummaryData): void {
    this.body.replaceChildren();

    const overview = document.createElement("p");
    overview.className = "summary-overview";
    overview.textContent = data.overview;
    this.body.appendChild(overview);

    const meta = document.createElement("p");
    meta.className = "summary-meta";
    const generator =
      data.generator.kind === "remote" ? `model ${data.generator.model}` : "template";
    meta.textContent = `duration ${data.duration_s} s · generated by ${generator}`;
    this.body.appendChild(meta);

    const events = document.createElement("ul");
    events.className = "summary-events";
    for (const event of data.key_events) {
      const item = document.createElement("li");
      const chip = document.createElement("span");
      chip.className = "kind-chip";
      chip.style.background = KIND_COLORS[event.kind];
      chip.textContent = event.kind;
      item.appendChild(chip);
      item.appendChild(document.createTextNode(` [${event.time}] ${event.label}`));
      events.appendChild(item);
    }
    this.body.appendChild(events);

    const tools = document.createElement("p");
    tools.className = "summary-tools";
    tools.textContent = data.tools.length ? `Tools: ${data.tools.join(", ")}` : "Tools: none";
    this.body.appendChild(tools);

    for (const warning of data.warnings) {
      const note = document.createElement("p");
      note.className = "summary-warning";
      note.textContent = `⚠ ${warning}`;
      this.body.appendChild(note);
    }
  }
}
