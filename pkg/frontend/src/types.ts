/** Wire types for tour.json (version 1). The viewer never mutates these. */

export interface TourPanorama {
  id: string;
  file: string;
  width: number;
  height: number;
  anchor_tag: number;
}

export interface TourHotspot {
  panorama_id: string;
  tag_number: number;
  /** [x_min, y_min, x_max, y_max] in panorama pixels; x_min > x_max wraps the seam. */
  bbox: [number, number, number, number];
  wrapped: boolean;
  yaw_deg: number;
  pitch_deg: number;
  target_panorama_id: string | null;
  confidence: number;
}

export interface TourGraph {
  version: number;
  property_id: string;
  panoramas: TourPanorama[];
  hotspots: TourHotspot[];
  warnings: string[];
}

export class TourValidationError extends Error {
  /** JSON-path-ish location of the offending field, e.g. "hotspots[2].target_panorama_id". */
  readonly path: string;

  constructor(path: string, message: string) {
    super(`${path}: ${message}`);
    this.path = path;
    this.name = "TourValidationError";
  }
}
