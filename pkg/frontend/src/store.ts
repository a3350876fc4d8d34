/** Client-side session mirror. The store never computes mission data;
 * it holds what the service last confirmed plus view-only flags. */

import type {
  MissionSpecView,
  OverlayCollection,
  OverlayLayer,
  PathDocument,
  RouteSummary,
  SessionStage,
  StageRequest,
} from "./types.js";
import { OVERLAY_LAYERS, SESSION_STAGES, STAGE_REQUESTS } from "./types.js";

export interface ChatEntry {
  who: "operator" | "planner";
  text: string;
}

export interface Banner {
  kind: "retry" | "expired" | "error";
  text: string;
}

export interface ConsoleState {
  sessionId: string | null;
  stage: SessionStage;
  transcript: ChatEntry[];
  spec: MissionSpecView | null;
  /** Prompts the parser still needs answered before routing. */
  missing: string[];
  ready: boolean;
  graphSummary: string | null;
  alternatives: RouteSummary[];
  selectedLabel: string | null;
  path: PathDocument | null;
  /** Waypoint index picked on the map for altitude editing. */
  selectedWaypoint: number | null;
  /** Server copy of the path before the latest accepted revision. */
  revisionBase: PathDocument | null;
  trajectoryKinds: string[];
  overlays: Partial<Record<OverlayLayer, OverlayCollection>>;
  overlayVisible: Record<OverlayLayer, boolean>;
  /** A request is in flight; controls are held until it settles. */
  busy: boolean;
  banner: Banner | null;
}

export function initialState(): ConsoleState {
  return {
    sessionId: null,
    stage: "parsed",
    transcript: [],
    spec: null,
    missing: [],
    ready: false,
    graphSummary: null,
    alternatives: [],
    selectedLabel: null,
    path: null,
    selectedWaypoint: null,
    revisionBase: null,
    trajectoryKinds: [],
    overlays: {},
    overlayVisible: {
      airspace: true,
      population: false,
      weather: false,
      route: true,
      path: true,
    },
    busy: false,
    banner: null,
  };
}

export type Listener = (state: ConsoleState) => void;

export class ConsoleStore {
  private state: ConsoleState = initialState();
  private readonly listeners = new Set<Listener>();

  get(): ConsoleState {
    return this.state;
  }

  patch(update: Partial<ConsoleState>): void {
    this.state = { ...this.state, ...update };
    for (const listener of this.listeners) {
      listener(this.state);
    }
  }

  reset(): void {
    this.patch(initialState());
  }

  subscribe(listener: Listener): () => void {
    this.listeners.add(listener);
    listener(this.state);
    return () => this.listeners.delete(listener);
  }
}

export function stageIndex(stage: SessionStage): number {
  return SESSION_STAGES.indexOf(stage);
}

/** Stage a request completes: route -> routed, ..., upload -> uploaded. */
export function resultStage(request: StageRequest): SessionStage {
  return SESSION_STAGES[STAGE_REQUESTS.indexOf(request) + 1] as SessionStage;
}

/** Mirror of the service's gate: a request may advance the session by
 * exactly one stage or re-run a completed one, and nothing runs once
 * the mission is uploaded. */
export function requestAllowed(current: SessionStage, request: StageRequest): boolean {
  if (current === "uploaded") {
    return false;
  }
  return stageIndex(resultStage(request)) <= stageIndex(current) + 1;
}

export function allowedRequests(current: SessionStage): StageRequest[] {
  return STAGE_REQUESTS.filter((request) => requestAllowed(current, request));
}

/** Layers that can have data at the given stage. Static layers are
 * always available; route and path appear once their stage has run. */
export function availableLayers(state: ConsoleState): OverlayLayer[] {
  return OVERLAY_LAYERS.filter((layer) => {
    if (layer === "route") {
      return stageIndex(state.stage) >= stageIndex("routed");
    }
    if (layer === "path") {
      return state.path !== null;
    }
    return state.sessionId !== null;
  });
}
