import type { EntityRole, FrameMessage, TranscriptSeg } from "./types";

export interface RenderableEntity {
  id: number;
  role: EntityRole;
  position: [number, number, number];
  quaternion: [number, number, number, number]; // w, x, y, z
}

/**
 * Pure scene state fed to the 3D view. applyFrame copies every pose
 * verbatim from the frame message — the thin-client rule lives here and
 * is what the tests intercept.
 */
export class SceneModel {
  tUs = 0;
  entities = new Map<number, RenderableEntity>();
  fov: [number, number, number][] | null = null;
  activeAnnotations: number[] = [];
  transcript: TranscriptSeg | null = null;

  applyFrame(frame: FrameMessage): void {
    this.tUs = frame.t_us;
    for (const entity of frame.entities) {
      this.entities.set(entity.id, {
        id: entity.id,
        role: entity.role,
        position: [entity.p[0], entity.p[1], entity.p[2]],
        quaternion: [entity.q[0], entity.q[1], entity.q[2], entity.q[3]],
      });
    }
    this.fov = frame.fov;
    this.activeAnnotations = [...frame.active_annotations];
    this.transcript = frame.transcript;
  }

  /** Straight-line distance between two entities, for tests and HUD. */
  distance(idA: number, idB: number): number {
    const a = this.entities.get(idA);
    const b = this.entities.get(idB);
    if (!a || !b) {
      throw new Error(`unknown entity pair ${idA}, ${idB}`);
    }
    const dx = a.position[0] - b.position[0];
    const dy = a.position[1] - b.position[1];
    const dz = a.position[2] - b.position[2];
    return Math.sqrt(dx * dx + dy * dy + dz * dz);
  }
}
