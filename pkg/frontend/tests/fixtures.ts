import { TourGraph, TourHotspot, TourPanorama } from "../src/types.js";

/** The 8-room floor plan used across the toolkit's tests. */
export const FLOOR_PLAN_EDGES: Array<[number, number]> = [
  [1, 2],
  [2, 3],
  [3, 4],
  [4, 5],
  [5, 6],
  [6, 7],
  [7, 8],
  [2, 7],
  [3, 6],
];

export function makeTour(edges: Array<[number, number]> = FLOOR_PLAN_EDGES, panoCount = 8): TourGraph {
  const panoramas: TourPanorama[] = [];
  for (let i = 1; i <= panoCount; i++) {
    panoramas.push({ id: `p${i}`, file: `p${i}.png`, width: 2048, height: 1024, anchor_tag: i });
  }
  const hotspots: TourHotspot[] = [];
  const spot = (from: number, to: number): TourHotspot => {
    const yaw = ((to * 47) % 360) - 180; // arbitrary but deterministic placement
    return {
      panorama_id: `p${from}`,
      tag_number: to,
      bbox: [100 * to, 600, 100 * to + 40, 640],
      wrapped: false,
      yaw_deg: yaw,
      pitch_deg: -30,
      target_panorama_id: `p${to}`,
      confidence: 0.9,
    };
  };
  for (const [a, b] of edges) {
    hotspots.push(spot(a, b), spot(b, a));
  }
  return { version: 1, property_id: "fixture", panoramas, hotspots, warnings: [] };
}

export function tourJson(tour: TourGraph = makeTour()): string {
  return JSON.stringify(tour);
}
