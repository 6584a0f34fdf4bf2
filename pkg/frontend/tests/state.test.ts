import { describe, expect, it } from "vitest";

import {
  applyHash,
  createState,
  currentPanorama,
  encodeHash,
  entryYaw,
  goBack,
  hotspotsOfCurrent,
  navigate,
  projectToView,
  setView,
  visibleHotspots,
  wrapYaw,
  ViewerState,
} from "../src/state.js";
import { parseTour } from "../src/tour.js";
import { TourHotspot } from "../src/types.js";
import { FLOOR_PLAN_EDGES, makeTour } from "./fixtures.js";

const tour = parseTour(makeTour());

function spotTo(state: ViewerState, target: number): TourHotspot {
  const hotspot = hotspotsOfCurrent(state).find((h) => h.target_panorama_id === `p${target}`);
  if (!hotspot) throw new Error(`no hotspot to p${target} from ${state.currentPanoramaId}`);
  return hotspot;
}

describe("viewer state", () => {
  it("starts at the lowest anchor with the default pose", () => {
    const state = createState(tour);
    expect(state.currentPanoramaId).toBe("p1");
    expect(state.view).toEqual({ yawDeg: 0, pitchDeg: 0, fovDeg: 75 });
  });

  it("clamps fov and pitch, wraps yaw", () => {
    const state = createState(tour);
    const cranked = setView(state, { fovDeg: 500, pitchDeg: 140, yawDeg: 270 });
    expect(cranked.view.fovDeg).toBe(120);
    expect(cranked.view.pitchDeg).toBe(90);
    expect(cranked.view.yawDeg).toBe(-90);
    expect(setView(state, { fovDeg: 1 }).view.fovDeg).toBe(30);
  });

  it("a full 360 yaw drag returns to the starting view", () => {
    const state = createState(tour);
    let dragged = state;
    for (let i = 0; i < 36; i++) dragged = setView(dragged, { yawDeg: dragged.view.yawDeg + 10 });
    expect(wrapYaw(dragged.view.yawDeg)).toBeCloseTo(0, 10);
  });

  it("navigates along a hotspot and appends history", () => {
    const state = createState(tour);
    const next = navigate(state, spotTo(state, 2));
    expect(next.currentPanoramaId).toBe("p2");
    expect(next.history).toHaveLength(1);
    expect(next.history[0].panoramaId).toBe("p1");
  });

  it("entry yaw faces away from the reverse hotspot", () => {
    const state = createState(tour);
    const next = navigate(state, spotTo(state, 2));
    const reverse = tour.hotspots.find((h) => h.panorama_id === "p2" && h.target_panorama_id === "p1")!;
    expect(next.view.yawDeg).toBeCloseTo(wrapYaw(reverse.yaw_deg + 180), 10);
    expect(entryYaw(tour, "p2", "p1")).toBe(next.view.yawDeg);
  });

  it("back restores the previous panorama and view", () => {
    let state = createState(tour);
    state = setView(state, { yawDeg: 42, pitchDeg: -10 });
    const before = state.view;
    state = navigate(state, spotTo(state, 2));
    state = goBack(state);
    expect(state.currentPanoramaId).toBe("p1");
    expect(state.view).toEqual(before);
    expect(state.history).toHaveLength(0);
    expect(goBack(state)).toBe(state); // empty history is a no-op
  });

  it("ignores disabled hotspots", () => {
    const dangling: TourHotspot = { ...spotTo(createState(tour), 2), target_panorama_id: null };
    const state = createState(tour);
    expect(navigate(state, dangling)).toBe(state);
  });

  it("scripted walkthrough visits every panorama and unwinds cleanly", () => {
    // Depth-first over the floor-plan edges using only hotspot clicks and
    // back navigation; the displayed panorama is a pure function of the log.
    const neighbors = new Map<number, number[]>();
    for (const [a, b] of FLOOR_PLAN_EDGES) {
      neighbors.set(a, [...(neighbors.get(a) ?? []), b]);
      neighbors.set(b, [...(neighbors.get(b) ?? []), a]);
    }
    const visited = new Set<string>();
    let state = createState(tour);

    const walk = (node: number): void => {
      visited.add(state.currentPanoramaId);
      for (const next of [...(neighbors.get(node) ?? [])].sort((x, y) => x - y)) {
        if (visited.has(`p${next}`)) continue;
        state = navigate(state, spotTo(state, next));
        expect(state.currentPanoramaId).toBe(`p${next}`);
        walk(next);
        const before = state.history[state.history.length - 1];
        state = goBack(state);
        expect(state.currentPanoramaId).toBe(before.panoramaId);
      }
    };
    walk(1);

    expect(visited.size).toBe(8);
    expect(state.currentPanoramaId).toBe("p1");
    expect(state.history).toHaveLength(0);
  });

  it("replaying the same interaction log lands on the same panorama", () => {
    const run = () => {
      let state = createState(tour);
      state = navigate(state, spotTo(state, 2));
      state = navigate(state, spotTo(state, 7));
      state = goBack(state);
      state = navigate(state, spotTo(state, 3));
      return state.currentPanoramaId;
    };
    expect(run()).toBe(run());
    expect(run()).toBe("p3");
  });
});

describe("hotspot projection", () => {
  const pose = { yawDeg: 0, pitchDeg: 0, fovDeg: 90 };

  it("centers a dead-ahead hotspot", () => {
    const screen = projectToView(pose, 16 / 9, 0, 0);
    expect(screen.visible).toBe(true);
    expect(screen.x).toBeCloseTo(0.5, 10);
    expect(screen.y).toBeCloseTo(0.5, 10);
  });

  it("hides hotspots behind the camera", () => {
    expect(projectToView(pose, 16 / 9, 180, 0).visible).toBe(false);
    expect(projectToView(pose, 16 / 9, -135, 0).visible).toBe(false);
  });

  it("shows a nadir hotspot only when looking down", () => {
    const level = { yawDeg: 0, pitchDeg: 0, fovDeg: 75 };
    const down = { yawDeg: 0, pitchDeg: -88, fovDeg: 75 };
    expect(projectToView(level, 16 / 9, 0, -90).visible).toBe(false);
    expect(projectToView(down, 16 / 9, 0, -90).visible).toBe(true);
  });

  it("lists visible hotspots for the current view", () => {
    let state = createState(tour);
    const all = hotspotsOfCurrent(state);
    expect(all.length).toBeGreaterThan(0);
    const target = all[0];
    state = setView(state, { yawDeg: target.yaw_deg, pitchDeg: target.pitch_deg });
    const vis = visibleHotspots(state, 16 / 9).map((v) => v.hotspot);
    expect(vis).toContainEqual(target);
  });
});

describe("URL hash", () => {
  it("round trips panorama and pose", () => {
    let state = createState(tour);
    state = navigate(state, spotTo(state, 2));
    state = setView(state, { yawDeg: -12.5, pitchDeg: 8.25 });
    const restored = applyHash(createState(tour), encodeHash(state));
    expect(restored.currentPanoramaId).toBe("p2");
    expect(restored.view.yawDeg).toBeCloseTo(-12.5, 2);
    expect(restored.view.pitchDeg).toBeCloseTo(8.25, 2);
  });

  it("ignores unknown panoramas and junk values", () => {
    const state = createState(tour);
    const out = applyHash(state, "#pano=ghost&yaw=junk&pitch=");
    expect(out.currentPanoramaId).toBe("p1");
    expect(out.view.yawDeg).toBe(0);
    expect(currentPanorama(out).id).toBe("p1");
  });
});
