import * as THREE from "three";
import { OrbitControls } from "three/examples/jsm/controls/OrbitControls.js";
import type { SceneModel } from "./scene";
import type { MeshData, ModeSelection, ZoneDef } from "./types";

const HEAD_RADIUS = 0.12;
const HAND_RADIUS = 0.05;
const OBJECT_SIZE = 0.08;

/**
 * three.js projection of a SceneModel. Entity poses are copied verbatim
 * from the model (which holds them verbatim from frame messages); the only
 * transform this class ever applies is placing the static anchor-frame
 * scenery (mesh wireframe, zone outlines) at the mode placement the
 * reviewer chose, since the server sends scenery in the anchor frame.
 */
export class SceneView {
  readonly scene = new THREE.Scene();
  readonly staticGroup = new THREE.Group(); // anchor-frame scenery
  private readonly entityObjects = new Map<number, THREE.Object3D>();
  private fovMesh: THREE.Mesh | null = null;
  private renderer: THREE.WebGLRenderer | null = null;
  private camera: THREE.PerspectiveCamera | null = null;

  constructor() {
    this.scene.background = new THREE.Color(0x14161a);
    this.scene.add(new THREE.AmbientLight(0xffffff, 0.7));
    const sun = new THREE.DirectionalLight(0xffffff, 1.2);
    sun.position.set(4, 10, 2);
    this.scene.add(sun);
    this.scene.add(new THREE.GridHelper(12, 24, 0x33363d, 0x24262c));
    this.scene.add(this.staticGroup);
  }

  /** Place anchor-frame scenery at the reviewer's chosen mode placement. */
  setModePlacement(mode: ModeSelection): void {
    this.staticGroup.position.set(mode.pos[0], mode.pos[1], mode.pos[2]);
    this.staticGroup.quaternion.set(mode.quat[1], mode.quat[2], mode.quat[3], mode.quat[0]);
    this.staticGroup.scale.setScalar(mode.scale);
  }

  setEnvironment(mesh: MeshData, zones: ZoneDef[]): void {
    this.staticGroup.clear();
    if (mesh.vertices.length > 0 && mesh.triangles.length > 0) {
      const geometry = new THREE.BufferGeometry();
      geometry.setAttribute(
        "position",
        new THREE.Float32BufferAttribute(mesh.vertices.flat(), 3),
      );
      geometry.setIndex(mesh.triangles.flat());
      const wireframe = new THREE.Mesh(
        geometry,
        new THREE.MeshBasicMaterial({ color: 0x3a7b66, wireframe: true }),
      );
      wireframe.name = "environment-mesh";
      this.staticGroup.add(wireframe);
    }
    for (const zone of zones) {
      const outline = new THREE.LineLoop(
        new THREE.BufferGeometry().setFromPoints([
          new THREE.Vector3(zone.min_x, 0.01, zone.min_z),
          new THREE.Vector3(zone.max_x, 0.01, zone.min_z),
          new THREE.Vector3(zone.max_x, 0.01, zone.max_z),
          new THREE.Vector3(zone.min_x, 0.01, zone.max_z),
        ]),
        new THREE.LineBasicMaterial({ color: 0x777d8a }),
      );
      outline.name = `zone-${zone.id}`;
      this.staticGroup.add(outline);
    }
  }

  private makeEntityObject(role: string): THREE.Object3D {
    if (role === "Head") {
      return new THREE.Mesh(
        new THREE.SphereGeometry(HEAD_RADIUS, 24, 16),
        new THREE.MeshStandardMaterial({ color: 0x2f6fd0 }),
      );
    }
    if (role === "LeftHand" || role === "RightHand") {
      return new THREE.Mesh(
        new THREE.SphereGeometry(HAND_RADIUS, 16, 12),
        new THREE.MeshStandardMaterial({ color: 0x6ba3e8 }),
      );
    }
    return new THREE.Mesh(
      new THREE.BoxGeometry(OBJECT_SIZE, OBJECT_SIZE, OBJECT_SIZE),
      new THREE.MeshStandardMaterial({ color: 0x9aa0ab }),
    );
  }

  /** Mirror the model into the object graph; positions copied verbatim. */
  update(model: SceneModel): void {
    for (const entity of model.entities.values()) {
      let object = this.entityObjects.get(entity.id);
      if (!object) {
        object = this.makeEntityObject(entity.role);
        object.name = `entity-${entity.id}`;
        this.entityObjects.set(entity.id, object);
        this.scene.add(object);
      }
      object.position.set(entity.position[0], entity.position[1], entity.position[2]);
      object.quaternion.set(
        entity.quaternion[1],
        entity.quaternion[2],
        entity.quaternion[3],
        entity.quaternion[0],
      );
    }
    this.updateFov(model.fov);
  }

  private updateFov(fov: [number, number, number][] | null): void {
    if (this.fovMesh) {
      this.scene.remove(this.fovMesh);
      this.fovMesh.geometry.dispose();
      this.fovMesh = null;
    }
    if (!fov) {
      return;
    }
    const geometry = new THREE.BufferGeometry();
    geometry.setAttribute("position", new THREE.Float32BufferAttribute(fov.flat(), 3));
    geometry.setIndex([0, 1, 2]);
    this.fovMesh = new THREE.Mesh(
      geometry,
      new THREE.MeshBasicMaterial({
        color: 0xf2d06b,
        transparent: true,
        opacity: 0.25,
        side: THREE.DoubleSide,
        depthWrite: false,
      }),
    );
    this.fovMesh.name = "fov-triangle";
    this.scene.add(this.fovMesh);
  }

  entityObject(id: number): THREE.Object3D | undefined {
    return this.entityObjects.get(id);
  }

  get fovObject(): THREE.Mesh | null {
    return this.fovMesh;
  }

  /** Browser-only: create the renderer and start the draw loop. */
  attach(container: HTMLElement): void {
    const renderer = new THREE.WebGLRenderer({ antialias: true });
    renderer.setSize(container.clientWidth, container.clientHeight || 420);
    container.appendChild(renderer.domElement);
    const camera = new THREE.PerspectiveCamera(
      55,
      container.clientWidth / (container.clientHeight || 420),
      0.01,
      200,
    );
    camera.position.set(4, 3.2, 6);
    const controls = new OrbitControls(camera, renderer.domElement);
    controls.target.set(1.5, 1.0, 1.5);
    this.renderer = renderer;
    this.camera = camera;
    const draw = () => {
      if (!this.renderer || !this.camera) {
        return;
      }
      controls.update();
      this.renderer.render(this.scene, this.camera);
      requestAnimationFrame(draw);
    };
    requestAnimationFrame(draw);
  }

  detach(): void {
    if (this.renderer) {
      this.renderer.dispose();
      this.renderer.domElement.remove();
      this.renderer = null;
      this.camera = null;
    }
  }
}
