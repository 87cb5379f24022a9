// Wire types mirroring the memorypod server API. The viewer renders these
// verbatim; it never recomputes poses.

export type AnnotationKind = "Start" | "End" | "Acquire" | "Use" | "Deposit";
export type EntityRole = "Head" | "LeftHand" | "RightHand" | "Object";

export interface PodEntry {
  pod_id: string;
  title: string;
  duration_us: number;
  created_at: string;
  annotation_count: number;
}

export interface Keyframe {
  t_us: number;
  annotation_id: number;
  kind: AnnotationKind;
  label: string;
}

export interface ZoneDef {
  id: string;
  name: string;
  min_x: number;
  max_x: number;
  min_z: number;
  max_z: number;
}

export interface MeshData {
  vertices: [number, number, number][];
  triangles: [number, number, number][];
}

export interface TranscriptSeg {
  start_us: number;
  end_us: number;
  speaker: string;
  text: string;
}

export interface FrameEntity {
  id: number;
  role: EntityRole;
  p: [number, number, number];
  q: [number, number, number, number];
}

export interface FrameMessage {
  type: "frame";
  t_us: number;
  entities: FrameEntity[];
  fov: [number, number, number][] | null;
  active_annotations: number[];
  transcript: TranscriptSeg | null;
}

export interface ErrorMessage {
  type: "error";
  code: string;
  detail?: string;
}

export type ServerMessage = FrameMessage | ErrorMessage;

export interface SummaryData {
  overview: string;
  duration_s: number;
  key_events: { time: string; kind: AnnotationKind; label: string }[];
  tools: string[];
  generator: { kind: string; model?: string };
  warnings: string[];
}

/** The placement the reviewer chose; echoed to the server as the mode op. */
export interface ModeSelection {
  mode: "real" | "mini";
  scale: number; // 1 for real scale
  pos: [number, number, number];
  quat: [number, number, number, number];
}

export const REAL_SCALE: ModeSelection = {
  mode: "real",
  scale: 1,
  pos: [0, 0, 0],
  quat: [1, 0, 0, 0],
};

/** Tabletop miniature placement at the given scale. */
export function miniatureMode(scale: number): ModeSelection {
  return { mode: "mini", scale, pos: [0, 0.9, 0], quat: [1, 0, 0, 0] };
}

export const KIND_COLORS: Record<AnnotationKind, string> = {
  Start: "#2e9e4f",
  End: "#d23f31",
  Acquire: "#2f6fd0",
  Use: "#e08a1e",
  Deposit: "#8a4fc8",
};
