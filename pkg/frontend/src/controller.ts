/** Orchestrates the console: every action is a service round-trip and
 * the store only ever holds what the service confirmed. No planning,
 * no optimistic updates. */

import { ApiError, NetworkError, PlannerClient } from "./api.js";
import type { ConsoleStore } from "./store.js";
import { availableLayers, requestAllowed } from "./store.js";
import type {
  MissionSpecView,
  OverlayLayer,
  StageOptionsBody,
  StageRequest,
  WaypointTuple,
} from "./types.js";

export class ConsoleController {
  /** Last instruction that failed on the network, for the retry banner. */
  private lastFailedText: string | null = null;

  constructor(
    readonly client: PlannerClient,
    readonly store: ConsoleStore,
  ) {}

  /** Start a fresh session and load the static overlays. */
  async open(): Promise<void> {
    this.store.reset();
    this.store.patch({ busy: true });
    try {
      const created = await this.client.createSession();
      this.store.patch({ sessionId: created.session_id, stage: created.stage, busy: false });
      await this.refreshOverlays();
    } catch (error) {
      this.fail(error);
    }
  }

  /** Send one operator instruction; render the parsed spec summary or
   * the parser's follow-up prompts as planner chat entries. */
  async send(text: string): Promise<void> {
    const trimmed = text.trim();
    const state = this.store.get();
    if (!trimmed || state.busy || state.sessionId === null || state.stage === "uploaded") {
      return;
    }
    this.store.patch({
      busy: true,
      banner: null,
      transcript: [...state.transcript, { who: "operator" as const, text: trimmed }],
    });
    try {
      const result = await this.client.sendInstruction(state.sessionId, trimmed);
      this.lastFailedText = null;
      const reply = result.ready
        ? `Understood: ${specSummary(result.spec)}. Ready to plan the route.`
        : result.missing.join(" ");
      this.store.patch({
        busy: false,
        stage: result.stage,
        spec: result.spec,
        missing: result.missing,
        ready: result.ready,
        transcript: [...this.store.get().transcript, { who: "planner" as const, text: reply }],
      });
    } catch (error) {
      if (error instanceof NetworkError) {
        this.lastFailedText = trimmed;
      }
      this.fail(error);
    }
  }

  /** Re-send the instruction that last failed on the network. */
  async retry(): Promise<void> {
    const text = this.lastFailedText;
    if (text === null) {
      return;
    }
    this.lastFailedText = null;
    // Drop the failed operator entry so the retry does not double it.
    const transcript = this.store.get().transcript;
    const lastOperator = transcript.map((e) => e.who).lastIndexOf("operator");
    this.store.patch({
      banner: null,
      transcript: transcript.filter((_, i) => i !== lastOperator),
    });
    await this.send(text);
  }

  /** Run one pipeline stage, then resync everything from the server. */
  async runStage(request: StageRequest, options: StageOptionsBody = {}): Promise<void> {
    const state = this.store.get();
    if (state.busy || state.sessionId === null || !requestAllowed(state.stage, request)) {
      return;
    }
    this.store.patch({ busy: true, banner: null });
    try {
      await this.client.runStage(state.sessionId, request, options);
      await this.refreshSession();
      await this.refreshOverlays();
      this.store.patch({ busy: false });
    } catch (error) {
      this.fail(error);
    }
  }

  /** Pick a route alternative by label; the path stage re-runs with it. */
  async selectAlternative(label: string): Promise<void> {
    await this.runStage("path", { label });
  }

  /** Post a dragged waypoint back as a path revision. The previous
   * server copy is kept so the edit can be undone. */
  async moveWaypoint(index: number, lat: number, lon: number): Promise<void> {
    await this.revise(index, (wp) => [lat, lon, wp[2], wp[3]]);
  }

  /** Change one waypoint's altitude through the same revision call. */
  async setWaypointAltitude(index: number, alt: number): Promise<void> {
    await this.revise(index, (wp) => [wp[0], wp[1], alt, wp[3]]);
  }

  private async revise(index: number, move: (wp: WaypointTuple) => WaypointTuple): Promise<void> {
    const path = this.store.get().path;
    const current = path?.waypoints[index];
    if (!path || !current) {
      return;
    }
    const waypoints = path.waypoints.map((wp, i) => (i === index ? move(wp) : wp));
    const previousBase = this.store.get().revisionBase;
    this.store.patch({ revisionBase: path });
    await this.runStage("path", { waypoints });
    if (this.store.get().banner !== null) {
      // Rejected: nothing changed server-side, keep the old undo point.
      this.store.patch({ revisionBase: previousBase });
    }
  }

  /** Restore the server copy from before the last accepted revision. */
  async undoRevision(): Promise<void> {
    const base = this.store.get().revisionBase;
    if (base === null) {
      return;
    }
    await this.runStage("path", { waypoints: base.waypoints });
    if (this.store.get().banner === null) {
      this.store.patch({ revisionBase: null });
    }
  }

  async toggleOverlay(layer: OverlayLayer): Promise<void> {
    const state = this.store.get();
    const visible = !state.overlayVisible[layer];
    this.store.patch({ overlayVisible: { ...state.overlayVisible, [layer]: visible } });
    if (visible && state.overlays[layer] === undefined) {
      await this.refreshOverlays();
    }
  }

  /** Pull the full session record and mirror it into the store. */
  async refreshSession(): Promise<void> {
    const sessionId = this.store.get().sessionId;
    if (sessionId === null) {
      return;
    }
    const doc = await this.client.session(sessionId);
    const selected = this.store.get().selectedWaypoint;
    this.store.patch({
      stage: doc.stage,
      spec: doc.spec,
      graphSummary: doc.graph_summary,
      alternatives: doc.alternatives,
      selectedLabel: doc.route?.label ?? null,
      path: doc.path,
      selectedWaypoint:
        doc.path !== null && selected !== null && selected < doc.path.waypoints.length
          ? selected
          : null,
      trajectoryKinds: doc.trajectory?.commands.map((c) => c.kind) ?? [],
    });
  }

  /** Fetch every visible layer the current stage can serve. Layers the
   * catalog lacks (404) are dropped rather than treated as failures. */
  async refreshOverlays(): Promise<void> {
    const state = this.store.get();
    if (state.sessionId === null) {
      return;
    }
    const overlays = { ...state.overlays };
    for (const layer of availableLayers(state)) {
      if (!state.overlayVisible[layer] && overlays[layer] === undefined) {
        continue;
      }
      try {
        overlays[layer] = await this.client.overlay(state.sessionId, layer);
      } catch (error) {
        if (error instanceof ApiError && error.status === 404) {
          delete overlays[layer];
        } else {
          throw error;
        }
      }
    }
    this.store.patch({ overlays });
  }

  private fail(error: unknown): void {
    if (error instanceof NetworkError) {
      this.store.patch({
        busy: false,
        banner: { kind: "retry", text: "Planner service unreachable. Retry when it is back." },
      });
    } else if (error instanceof ApiError && error.status === 404 && error.kind === "SessionNotFoundError") {
      this.store.patch({
        busy: false,
        banner: { kind: "expired", text: "This session no longer exists. Start a new one." },
      });
    } else if (error instanceof ApiError) {
      this.store.patch({ busy: false, banner: { kind: "error", text: error.message } });
    } else {
      this.store.patch({ busy: false, banner: { kind: "error", text: String(error) } });
      throw error;
    }
  }
}

/** One-line recap of the parsed mission for the chat transcript. */
export function specSummary(spec: MissionSpecView): string {
  const parts: string[] = [];
  if (spec.survey_category !== null) {
    const radius =
      spec.survey_radius_m !== null ? ` within ${(spec.survey_radius_m / 1000).toFixed(1)} km` : "";
    parts.push(`survey ${spec.survey_category}${radius} around ${spec.survey_center_id ?? "?"}`);
  } else {
    parts.push(`fly ${spec.start_id ?? "?"} to ${spec.end_id ?? "?"}`);
  }
  if (spec.visit_categories.length > 0) {
    parts.push(`via ${spec.visit_categories.join(", ")}`);
  }
  if (spec.fleet_size !== 1) {
    parts.push(`${spec.fleet_size} vehicles`);
  }
  parts.push(`${spec.preference} routing`);
  return parts.join(", ");
}
