/** Console assembly: one session per page, one base URL, all state
 * flowing store -> widgets and widgets -> controller -> service. */

import type { FetchLike } from "./api.js";
import { PlannerClient } from "./api.js";
import { ChatPanel } from "./chat.js";
import { ConsoleController } from "./controller.js";
import { SvgMap } from "./map.js";
import { ConsoleStore } from "./store.js";
import type { ConsoleState } from "./store.js";
import { StageToolbar } from "./toolbar.js";
import { OVERLAY_LAYERS } from "./types.js";

export interface ConsoleConfig {
  /** Planner service origin, e.g. http://127.0.0.1:8420 */
  baseUrl: string;
  fetchImpl?: FetchLike;
}

export interface Console {
  client: PlannerClient;
  store: ConsoleStore;
  controller: ConsoleController;
  map: SvgMap;
  chat: ChatPanel;
  toolbar: StageToolbar;
  newSessionButton: HTMLButtonElement;
}

export function buildConsole(root: HTMLElement, config: ConsoleConfig): Console {
  const doc = root.ownerDocument;
  const client = new PlannerClient(config.baseUrl, config.fetchImpl);
  const store = new ConsoleStore();
  const controller = new ConsoleController(client, store);

  const header = doc.createElement("header");
  header.className = "console-header";
  const title = doc.createElement("h1");
  title.textContent = "Mission Console";
  const sessionBadge = doc.createElement("span");
  sessionBadge.className = "session-badge";
  const newSessionButton = doc.createElement("button");
  newSessionButton.type = "button";
  newSessionButton.className = "new-session";
  newSessionButton.textContent = "New Session";
  newSessionButton.addEventListener("click", () => void controller.open());
  header.appendChild(title);
  header.appendChild(sessionBadge);
  header.appendChild(newSessionButton);
  root.appendChild(header);

  const main = doc.createElement("main");
  main.className = "console-main";
  const chatSide = doc.createElement("aside");
  chatSide.className = "chat-side";
  const mapSide = doc.createElement("section");
  mapSide.className = "map-side";
  const mapBox = doc.createElement("div");
  mapBox.className = "map-box";
  mapSide.appendChild(mapBox);
  main.appendChild(chatSide);
  main.appendChild(mapSide);
  root.appendChild(main);

  const map = new SvgMap(mapBox, {
    onWaypointDrag: (drag) => void controller.moveWaypoint(drag.index, drag.lat, drag.lon),
    onWaypointSelect: (index) => store.patch({ selectedWaypoint: index }),
  });
  const chat = new ChatPanel(chatSide, controller);
  const toolbar = new StageToolbar(mapSide, controller);

  let lastOverlays: ConsoleState["overlays"] = {};
  store.subscribe((state) => {
    sessionBadge.textContent = state.sessionId === null ? "" : `session ${state.sessionId}`;
    for (const layer of OVERLAY_LAYERS) {
      if (state.overlays[layer] !== lastOverlays[layer]) {
        map.setOverlay(layer, state.overlays[layer] ?? null);
      }
      map.setVisible(layer, state.overlayVisible[layer]);
    }
    lastOverlays = state.overlays;
    chat.render(state);
    toolbar.render(state);
  });

  return { client, store, controller, map, chat, toolbar, newSessionButton };
}
