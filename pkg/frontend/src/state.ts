/** Pure viewer state: navigation, history, view angles, hotspot visibility.
 *
 * Everything here is deterministic in (tour, interaction log); rendering
 * and the DOM live elsewhere. State objects are immutable snapshots.
 */

import { TourGraph, TourHotspot } from "./types.js";

export interface ViewPose {
  yawDeg: number;
  pitchDeg: number;
  fovDeg: number;
}

export interface ViewerState {
  readonly tour: TourGraph;
  readonly currentPanoramaId: string;
  readonly view: ViewPose;
  /** Visited panorama ids with the pose held when leaving; newest last. */
  readonly history: ReadonlyArray<{ panoramaId: string; view: ViewPose }>;
}

export const FOV_MIN = 30;
export const FOV_MAX = 120;
export const DEFAULT_FOV = 75;

export function wrapYaw(yawDeg: number): number {
  let y = ((yawDeg + 180) % 360 + 360) % 360 - 180;
  return y === 180 ? -180 : y;
}

export function clampPitch(pitchDeg: number): number {
  return Math.min(90, Math.max(-90, pitchDeg));
}

export function clampFov(fovDeg: number): number {
  return Math.min(FOV_MAX, Math.max(FOV_MIN, fovDeg));
}

/** Initial state: the panorama with the lowest anchor tag, yaw 0 / pitch 0 / fov 75. */
export function createState(tour: TourGraph): ViewerState {
  const start = [...tour.panoramas].sort((a, b) => a.anchor_tag - b.anchor_tag)[0];
  return {
    tour,
    currentPanoramaId: start.id,
    view: { yawDeg: 0, pitchDeg: 0, fovDeg: DEFAULT_FOV },
    history: [],
  };
}

export function currentPanorama(state: ViewerState) {
  const pano = state.tour.panoramas.find((p) => p.id === state.currentPanoramaId);
  if (!pano) throw new Error(`state references unknown panorama ${state.currentPanoramaId}`);
  return pano;
}

export function hotspotsOfCurrent(state: ViewerState): TourHotspot[] {
  return state.tour.hotspots.filter((h) => h.panorama_id === state.currentPanoramaId);
}

export function setView(state: ViewerState, view: Partial<ViewPose>): ViewerState {
  return {
    ...state,
    view: {
      yawDeg: wrapYaw(view.yawDeg ?? state.view.yawDeg),
      pitchDeg: clampPitch(view.pitchDeg ?? state.view.pitchDeg),
      fovDeg: clampFov(view.fovDeg ?? state.view.fovDeg),
    },
  };
}

/** Entry yaw when arriving at a panorama from `sourceId`: face away from
 * the hotspot that points back at the source (walk-through feel). Falls
 * back to yaw 0 when no reverse hotspot exists. */
export function entryYaw(tour: TourGraph, arrivalId: string, sourceId: string): number {
  const reverse = tour.hotspots.find(
    (h) => h.panorama_id === arrivalId && h.target_panorama_id === sourceId,
  );
  return reverse ? wrapYaw(reverse.yaw_deg + 180) : 0;
}

/** Follow a hotspot. Disabled (targetless) hotspots are a no-op. */
export function navigate(state: ViewerState, hotspot: TourHotspot): ViewerState {
  if (hotspot.target_panorama_id === null) return state;
  if (hotspot.panorama_id !== state.currentPanoramaId) return state;
  const target = hotspot.target_panorama_id;
  return {
    tour: state.tour,
    currentPanoramaId: target,
    view: {
      yawDeg: entryYaw(state.tour, target, state.currentPanoramaId),
      pitchDeg: 0,
      fovDeg: state.view.fovDeg,
    },
    history: [...state.history, { panoramaId: state.currentPanoramaId, view: state.view }],
  };
}

/** Pop the history, restoring the previous panorama and its view. */
export function goBack(state: ViewerState): ViewerState {
  if (state.history.length === 0) return state;
  const prev = state.history[state.history.length - 1];
  return {
    tour: state.tour,
    currentPanoramaId: prev.panoramaId,
    view: prev.view,
    history: state.history.slice(0, -1),
  };
}

// --- hotspot projection -----------------------------------------------------

const DEG = Math.PI / 180;

export function directionFromAngles(yawDeg: number, pitchDeg: number): [number, number, number] {
  const yaw = yawDeg * DEG;
  const pitch = pitchDeg * DEG;
  return [Math.sin(yaw) * Math.cos(pitch), Math.sin(pitch), Math.cos(yaw) * Math.cos(pitch)];
}

export interface ScreenPoint {
  x: number; // [0, 1] across the frame
  y: number; // [0, 1] down the frame
  visible: boolean;
}

/** Project a (yaw, pitch) direction into the current view frustum.
 *
 * Pinhole model: horizontal fov is view.fovDeg, the vertical fov follows
 * the aspect ratio. Points behind the camera are invisible. */
export function projectToView(
  view: ViewPose,
  aspect: number,
  yawDeg: number,
  pitchDeg: number,
): ScreenPoint {
  const d = directionFromAngles(yawDeg, pitchDeg);
  // world -> camera: undo the yaw about Y, then the pitch about X
  const cy = Math.cos(view.yawDeg * DEG);
  const sy = Math.sin(view.yawDeg * DEG);
  const x1 = cy * d[0] - sy * d[2];
  const z1 = sy * d[0] + cy * d[2];
  const cp = Math.cos(view.pitchDeg * DEG);
  const sp = Math.sin(view.pitchDeg * DEG);
  const y2 = cp * d[1] - sp * z1;
  const z2 = sp * d[1] + cp * z1;
  if (z2 <= 1e-9) return { x: NaN, y: NaN, visible: false };
  const tanHalf = Math.tan((view.fovDeg / 2) * DEG);
  const u = x1 / z2 / tanHalf; // [-1, 1] inside the frustum horizontally
  const v = y2 / z2 / (tanHalf / aspect);
  return {
    x: (u + 1) / 2,
    y: (1 - v) / 2,
    visible: Math.abs(u) <= 1 && Math.abs(v) <= 1,
  };
}

export function visibleHotspots(state: ViewerState, aspect: number) {
  return hotspotsOfCurrent(state)
    .map((hotspot) => ({
      hotspot,
      screen: projectToView(state.view, aspect, hotspot.yaw_deg, hotspot.pitch_deg),
    }))
    .filter((entry) => entry.screen.visible);
}

// --- shareable URL hash ------------------------------------------------------

export function encodeHash(state: ViewerState): string {
  const v = state.view;
  return `#pano=${encodeURIComponent(state.currentPanoramaId)}&yaw=${v.yawDeg.toFixed(2)}&pitch=${v.pitchDeg.toFixed(2)}`;
}

export function applyHash(state: ViewerState, hash: string): ViewerState {
  if (!hash.startsWith("#")) return state;
  const params = new URLSearchParams(hash.slice(1));
  const pano = params.get("pano");
  const yaw = params.get("yaw");
  const pitch = params.get("pitch");
  let next = state;
  if (pano && state.tour.panoramas.some((p) => p.id === pano)) {
    next = { ...next, currentPanoramaId: pano };
  }
  return setView(next, {
    yawDeg: yaw !== null && Number.isFinite(Number(yaw)) ? Number(yaw) : next.view.yawDeg,
    pitchDeg: pitch !== null && Number.isFinite(Number(pitch)) ? Number(pitch) : next.view.pitchDeg,
  });
}
