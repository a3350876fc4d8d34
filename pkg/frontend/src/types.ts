/** Wire shapes for the planner service. Field names mirror the JSON
 * the service emits; nothing here is invented client-side. */

/** Stages a session can be in, in pipeline order. New sessions start
 * at "parsed"; "uploaded" freezes the record. */
export const SESSION_STAGES = ["parsed", "routed", "pathed", "trajectoried", "uploaded"] as const;
export type SessionStage = (typeof SESSION_STAGES)[number];

/** Stage runs a client can request, in pipeline order. */
export const STAGE_REQUESTS = ["route", "path", "trajectory", "upload"] as const;
export type StageRequest = (typeof STAGE_REQUESTS)[number];

/** Map overlay layers the service can render. */
export const OVERLAY_LAYERS = ["airspace", "population", "weather", "route", "path"] as const;
export type OverlayLayer = (typeof OVERLAY_LAYERS)[number];

export interface MissionSpecView {
  start_id: string | null;
  end_id: string | null;
  fleet_size: number;
  preference: string;
  visit_categories: string[];
  survey_category: string | null;
  survey_center_id: string | null;
  survey_radius_m: number | null;
  max_duration_s: number | null;
}

export interface RouteSummary {
  label: string;
  also_labels: string[];
  node_ids: string[];
  total_distance_m: number;
  total_fuel_l: number;
  total_fuel_cost: number | null;
  total_duration_s: number;
  fallback_direct: boolean;
}

/** Route document in the session record: summary plus per-leg rows
 * [from_id, to_id, distance_m, fuel_l, fuel_cost, duration_s]. */
export interface RouteDocument extends RouteSummary {
  legs: [string, string, number, number, number | null, number][];
}

/** [lat, lon, alt, agl] */
export type WaypointTuple = [number, number, number, boolean];

/** Path document in the session record. Segments are
 * [length_m, weather_risk, ground_exposure, violation_m] per hop. */
export interface PathDocument {
  waypoints: WaypointTuple[];
  node_indices: number[];
  node_ids: string[];
  segments: [number, number, number, number][];
}

export interface TrajectoryCommandView {
  kind: string;
  waypoints: WaypointTuple[];
  radius_m: number | null;
  duration_s: number | null;
  direction: string | null;
}

export interface TrajectoryDocument {
  commands: TrajectoryCommandView[];
}

/** GET /sessions/{id} */
export interface SessionDocument {
  session_id: string;
  conversation: string[];
  spec: MissionSpecView;
  graph_summary: string | null;
  route: RouteDocument | null;
  alternatives: RouteSummary[];
  path: PathDocument | null;
  trajectory: TrajectoryDocument | null;
  stage: SessionStage;
  created_at: string;
  updated_at: string;
}

/** POST /sessions */
export interface SessionCreated {
  session_id: string;
  stage: SessionStage;
  created_at: string;
}

/** POST /sessions/{id}/instructions */
export interface InstructionResult {
  session_id: string;
  stage: SessionStage;
  spec: MissionSpecView;
  missing: string[];
  ready: boolean;
}

export interface PathSummary {
  node_ids: string[];
  waypoint_count: number;
  total_length_m: number;
  weather_risk: number;
  ground_exposure: number;
  violation_m: number;
}

export interface TrajectorySummary {
  command_count: number;
  kinds: string[];
}

/** POST /sessions/{id}/stages; which optional block is present depends
 * on the stage that was run. */
export interface StageResult {
  session_id: string;
  stage: SessionStage;
  graph?: string;
  alternatives?: RouteSummary[];
  selected?: string;
  path?: PathSummary;
  trajectory?: TrajectorySummary;
  uploaded?: boolean;
}

/** Options body for POST /sessions/{id}/stages. */
export interface StageOptionsBody {
  preference?: string;
  label?: string;
  seed?: number;
  population?: number;
  generations?: number;
  waypoints?: [number, number, number][] | WaypointTuple[];
}

/** Error bodies are always this shape. */
export interface ErrorBody {
  error: string;
  kind: string;
}

/** Just enough GeoJSON for the overlay endpoints. Positions are
 * [lon, lat] except path lines, which carry [lon, lat, alt]. */
export interface LineStringGeometry {
  type: "LineString";
  coordinates: number[][];
}

export interface PolygonGeometry {
  type: "Polygon";
  coordinates: number[][][];
}

export interface OverlayFeature {
  type: "Feature";
  geometry: LineStringGeometry | PolygonGeometry;
  properties: Record<string, unknown>;
}

export interface OverlayCollection {
  type: "FeatureCollection";
  features: OverlayFeature[];
}
