/** Stage toolbar, route-alternative picker, waypoint editor, and
 * overlay toggles. Buttons enable exactly when the server's stage
 * machine would accept the request. */

import type { ConsoleController } from "./controller.js";
import type { ConsoleState } from "./store.js";
import { requestAllowed } from "./store.js";
import type { RouteSummary, StageRequest } from "./types.js";
import { OVERLAY_LAYERS } from "./types.js";

const STAGE_LABELS: [StageRequest, string][] = [
  ["route", "Plan Route"],
  ["path", "Plan Path"],
  ["trajectory", "Build Trajectory"],
  ["upload", "Upload Path"],
];

export class StageToolbar {
  readonly root: HTMLElement;
  private readonly stageButtons = new Map<StageRequest, HTMLButtonElement>();
  private readonly status: HTMLElement;
  private readonly alternativesBox: HTMLElement;
  private readonly waypointBox: HTMLElement;
  private readonly overlayBox: HTMLElement;

  constructor(
    container: HTMLElement,
    private readonly controller: ConsoleController,
  ) {
    const doc = container.ownerDocument;
    this.root = doc.createElement("section");
    this.root.className = "stage-toolbar";

    const buttonRow = doc.createElement("div");
    buttonRow.className = "stage-buttons";
    for (const [request, label] of STAGE_LABELS) {
      const button = doc.createElement("button");
      button.type = "button";
      button.textContent = label;
      button.setAttribute("data-request", request);
      button.disabled = true;
      button.addEventListener("click", () => void this.controller.runStage(request));
      buttonRow.appendChild(button);
      this.stageButtons.set(request, button);
    }
    this.root.appendChild(buttonRow);

    this.status = doc.createElement("div");
    this.status.className = "stage-status";
    this.root.appendChild(this.status);

    this.alternativesBox = doc.createElement("div");
    this.alternativesBox.className = "route-alternatives";
    this.root.appendChild(this.alternativesBox);

    this.waypointBox = doc.createElement("div");
    this.waypointBox.className = "waypoint-editor";
    this.root.appendChild(this.waypointBox);

    this.overlayBox = doc.createElement("div");
    this.overlayBox.className = "overlay-toggles";
    this.root.appendChild(this.overlayBox);
    this.buildOverlayToggles();

    container.appendChild(this.root);
  }

  render(state: ConsoleState): void {
    for (const [request, button] of this.stageButtons) {
      button.disabled =
        state.busy || state.sessionId === null || !requestAllowed(state.stage, request);
    }
    this.status.textContent = statusLine(state);
    this.renderAlternatives(state);
    this.renderWaypointEditor(state);
    this.syncOverlayToggles(state);
  }

  private renderAlternatives(state: ConsoleState): void {
    const doc = this.root.ownerDocument;
    while (this.alternativesBox.firstChild) {
      this.alternativesBox.removeChild(this.alternativesBox.firstChild);
    }
    if (state.alternatives.length === 0) {
      return;
    }
    const heading = doc.createElement("div");
    heading.className = "alternatives-heading";
    heading.textContent = "Route alternatives";
    this.alternativesBox.appendChild(heading);
    const pickable = !state.busy && requestAllowed(state.stage, "path");
    for (const alternative of state.alternatives) {
      const row = doc.createElement("button");
      row.type = "button";
      row.className = "alternative-row";
      row.setAttribute("data-label", alternative.label);
      if (isSelected(alternative, state.selectedLabel)) {
        row.classList.add("selected");
      }
      row.textContent = alternativeLine(alternative);
      row.disabled = !pickable;
      row.addEventListener("click", () => void this.controller.selectAlternative(alternative.label));
      this.alternativesBox.appendChild(row);
    }
  }

  private renderWaypointEditor(state: ConsoleState): void {
    const doc = this.root.ownerDocument;
    while (this.waypointBox.firstChild) {
      this.waypointBox.removeChild(this.waypointBox.firstChild);
    }
    if (state.path === null) {
      return;
    }
    const editable = !state.busy && requestAllowed(state.stage, "path");

    if (state.selectedWaypoint !== null) {
      const waypoint = state.path.waypoints[state.selectedWaypoint];
      if (waypoint) {
        const label = doc.createElement("span");
        label.textContent = `Waypoint ${state.selectedWaypoint}: ${waypoint[0].toFixed(5)}, ${waypoint[1].toFixed(5)}, alt `;
        const altInput = doc.createElement("input");
        altInput.type = "number";
        altInput.className = "waypoint-alt";
        altInput.value = String(waypoint[2]);
        altInput.setAttribute("aria-label", "waypoint altitude (m)");
        altInput.disabled = !editable;
        const apply = doc.createElement("button");
        apply.type = "button";
        apply.className = "waypoint-apply";
        apply.textContent = "Set Altitude";
        apply.disabled = !editable;
        apply.addEventListener("click", () => {
          const index = state.selectedWaypoint;
          const alt = Number(altInput.value);
          if (index !== null && Number.isFinite(alt)) {
            void this.controller.setWaypointAltitude(index, alt);
          }
        });
        this.waypointBox.appendChild(label);
        this.waypointBox.appendChild(altInput);
        this.waypointBox.appendChild(apply);
      }
    }

    const undo = doc.createElement("button");
    undo.type = "button";
    undo.className = "waypoint-undo";
    undo.textContent = "Undo Edit";
    undo.disabled = !editable || state.revisionBase === null;
    undo.addEventListener("click", () => void this.controller.undoRevision());
    this.waypointBox.appendChild(undo);
  }

  private buildOverlayToggles(): void {
    const doc = this.root.ownerDocument;
    for (const layer of OVERLAY_LAYERS) {
      const label = doc.createElement("label");
      label.className = "overlay-toggle";
      const checkbox = doc.createElement("input");
      checkbox.type = "checkbox";
      checkbox.setAttribute("data-layer", layer);
      checkbox.addEventListener("change", () => void this.controller.toggleOverlay(layer));
      label.appendChild(checkbox);
      label.appendChild(doc.createTextNode(` ${layer}`));
      this.overlayBox.appendChild(label);
    }
  }

  private syncOverlayToggles(state: ConsoleState): void {
    const boxes = this.overlayBox.querySelectorAll<HTMLInputElement>("input[type=checkbox]");
    for (const box of boxes) {
      const layer = box.getAttribute("data-layer") as (typeof OVERLAY_LAYERS)[number];
      box.checked = state.overlayVisible[layer];
    }
  }
}

function isSelected(alternative: RouteSummary, selectedLabel: string | null): boolean {
  return (
    selectedLabel !== null &&
    (alternative.label === selectedLabel || alternative.also_labels.includes(selectedLabel))
  );
}

function alternativeLine(alternative: RouteSummary): string {
  const labels = [alternative.label, ...alternative.also_labels].join(" / ");
  const km = (alternative.total_distance_m / 1000).toFixed(1);
  const fuel = alternative.total_fuel_l.toFixed(1);
  const cost =
    alternative.total_fuel_cost !== null
      ? `, cost ${alternative.total_fuel_cost.toFixed(2)}`
      : "";
  const direct = alternative.fallback_direct ? " [direct fallback]" : "";
  return `${labels}: ${km} km, ${fuel} L${cost}${direct}`;
}

function statusLine(state: ConsoleState): string {
  if (state.sessionId === null) {
    return "No session. Start one to begin.";
  }
  const parts = [`Session ${state.sessionId}`, `stage ${state.stage}`];
  if (state.graphSummary !== null) {
    parts.push(state.graphSummary);
  }
  if (state.path !== null) {
    const length = state.path.segments.reduce((sum, s) => sum + (s[0] ?? 0), 0);
    const violation = state.path.segments.reduce((sum, s) => sum + (s[3] ?? 0), 0);
    parts.push(`path ${(length / 1000).toFixed(1)} km, violation ${violation.toFixed(1)} m`);
  }
  if (state.trajectoryKinds.length > 0) {
    parts.push(`trajectory ${state.trajectoryKinds.length} commands`);
  }
  if (state.stage === "uploaded") {
    parts.push("mission uploaded, session is read-only");
  }
  if (state.busy) {
    parts.push("working...");
  }
  return parts.join(" | ");
}
