import type { Keyframe, MeshData, PodEntry, SummaryData, ZoneDef } from "./types";

/** Typed client for the pod review HTTP API. fetch is injectable for tests. */
export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: typeof fetch = (...args) => fetch(...args),
  ) {}

  private async getJson<T>(path: string): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path);
    if (!response.ok) {
      throw new Error(`GET ${path} failed: ${response.status}`);
    }
    return (await response.json()) as T;
  }

  listPods(): Promise<PodEntry[]> {
    return this.getJson("/pods");
  }

  podMeta(podId: string): Promise<PodEntry> {
    return this.getJson(`/pods/${podId}`);
  }

  keyframes(podId: string): Promise<Keyframe[]> {
    return this.getJson(`/pods/${podId}/keyframes`);
  }

  zones(podId: string): Promise<ZoneDef[]> {
    return this.getJson(`/pods/${podId}/zones`);
  }

  mesh(podId: string): Promise<MeshData> {
    return this.getJson(`/pods/${podId}/mesh`);
  }

  /** Raw summary body, exactly as served (the panel shows these bytes). */
  async summaryRaw(podId: string, refresh = false): Promise<string> {
    const suffix = refresh ? "?refresh=1" : "";
    const response = await this.fetchFn(`${this.baseUrl}/pods/${podId}/summary${suffix}`);
    if (!response.ok) {
      throw new Error(`GET summary failed: ${response.status}`);
    }
    return response.text();
  }

  async summary(podId: string, refresh = false): Promise<{ raw: string; data: SummaryData }> {
    const raw = await this.summaryRaw(podId, refresh);
    return { raw, data: JSON.parse(raw) as SummaryData };
  }

  replayUrl(podId: string): string {
    if (this.baseUrl.startsWith("http")) {
      return this.baseUrl.replace(/^http/, "ws") + `/pods/${podId}/replay`;
    }
    const scheme = window.location.protocol === "https:" ? "wss:" : "ws:";
    return `${scheme}//${window.location.host}${this.baseUrl}/pods/${podId}/replay`;
  }
}
