/** tour.json parsing and referential-integrity validation. */

import { TourGraph, TourHotspot, TourPanorama, TourValidationError } from "./types.js";

const SUPPORTED_VERSION = 1;

function need(cond: boolean, path: string, message: string): asserts cond {
  if (!cond) throw new TourValidationError(path, message);
}

function asNumber(value: unknown, path: string): number {
  need(typeof value === "number" && Number.isFinite(value), path, `expected a finite number, got ${JSON.stringify(value)}`);
  return value;
}

function asString(value: unknown, path: string): string {
  need(typeof value === "string" && value.length > 0, path, "expected a non-empty string");
  return value;
}

function parsePanorama(raw: unknown, path: string): TourPanorama {
  need(typeof raw === "object" && raw !== null, path, "expected an object");
  const rec = raw as Record<string, unknown>;
  const width = asNumber(rec.width, `${path}.width`);
  const height = asNumber(rec.height, `${path}.height`);
  need(width >= 1 && height >= 1, `${path}.width`, "panorama dimensions must be positive");
  const anchor = asNumber(rec.anchor_tag, `${path}.anchor_tag`);
  need(Number.isInteger(anchor) && anchor >= 1 && anchor <= 20, `${path}.anchor_tag`, "anchor tag must be an integer in 1..20");
  return {
    id: asString(rec.id, `${path}.id`),
    file: asString(rec.file, `${path}.file`),
    width,
    height,
    anchor_tag: anchor,
  };
}

function parseHotspot(raw: unknown, path: string, panoIds: Set<string>): TourHotspot {
  need(typeof raw === "object" && raw !== null, path, "expected an object");
  const rec = raw as Record<string, unknown>;
  const panoramaId = asString(rec.panorama_id, `${path}.panorama_id`);
  need(panoIds.has(panoramaId), `${path}.panorama_id`, `references unknown panorama "${panoramaId}"`);
  const target = rec.target_panorama_id;
  if (target !== null && target !== undefined) {
    need(typeof target === "string", `${path}.target_panorama_id`, "expected a string or null");
    need(panoIds.has(target), `${path}.target_panorama_id`, `references unknown panorama "${target}"`);
  }
  const tag = asNumber(rec.tag_number, `${path}.tag_number`);
  need(Number.isInteger(tag) && tag >= 1 && tag <= 20, `${path}.tag_number`, "tag number must be an integer in 1..20");
  const bboxRaw = rec.bbox;
  need(Array.isArray(bboxRaw) && bboxRaw.length === 4, `${path}.bbox`, "expected an array of 4 numbers");
  const bbox = bboxRaw.map((v, i) => asNumber(v, `${path}.bbox[${i}]`)) as [number, number, number, number];
  const yaw = asNumber(rec.yaw_deg, `${path}.yaw_deg`);
  need(yaw >= -180 && yaw < 180.0 + 1e-9, `${path}.yaw_deg`, "yaw must lie in [-180, 180)");
  const pitch = asNumber(rec.pitch_deg, `${path}.pitch_deg`);
  need(pitch >= -90 - 1e-9 && pitch <= 90 + 1e-9, `${path}.pitch_deg`, "pitch must lie in [-90, 90]");
  const confidence = asNumber(rec.confidence, `${path}.confidence`);
  need(confidence >= 0 && confidence <= 1, `${path}.confidence`, "confidence must lie in [0, 1]");
  return {
    panorama_id: panoramaId,
    tag_number: tag,
    bbox,
    wrapped: Boolean(rec.wrapped),
    yaw_deg: yaw,
    pitch_deg: pitch,
    target_panorama_id: (target ?? null) as string | null,
    confidence,
  };
}

/** Parse and validate a tour document; throws TourValidationError with a field path. */
export function parseTour(raw: unknown): TourGraph {
  need(typeof raw === "object" && raw !== null, "$", "tour document must be a JSON object");
  const rec = raw as Record<string, unknown>;
  need(rec.version === SUPPORTED_VERSION, "version", `unsupported tour version ${JSON.stringify(rec.version)}`);
  const propertyId = asString(rec.property_id, "property_id");
  need(Array.isArray(rec.panoramas), "panoramas", "expected an array");
  need((rec.panoramas as unknown[]).length > 0, "panoramas", "tour has no panoramas");
  const panoramas = (rec.panoramas as unknown[]).map((p, i) => parsePanorama(p, `panoramas[${i}]`));

  const ids = new Set<string>();
  const anchors = new Set<number>();
  panoramas.forEach((p, i) => {
    need(!ids.has(p.id), `panoramas[${i}].id`, `duplicate panorama id "${p.id}"`);
    need(!anchors.has(p.anchor_tag), `panoramas[${i}].anchor_tag`, `duplicate anchor tag ${p.anchor_tag}`);
    ids.add(p.id);
    anchors.add(p.anchor_tag);
  });

  need(Array.isArray(rec.hotspots), "hotspots", "expected an array");
  const hotspots = (rec.hotspots as unknown[]).map((h, i) => parseHotspot(h, `hotspots[${i}]`, ids));

  const warnings = Array.isArray(rec.warnings) ? (rec.warnings as unknown[]).map(String) : [];
  return { version: SUPPORTED_VERSION, property_id: propertyId, panoramas, hotspots, warnings };
}

/** parseTour from text, turning JSON syntax errors into TourValidationError. */
export function parseTourText(text: string): TourGraph {
  let data: unknown;
  try {
    data = JSON.parse(text);
  } catch (e) {
    throw new TourValidationError("$", `not valid JSON (${(e as Error).message})`);
  }
  return parseTour(data);
}
