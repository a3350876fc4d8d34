/** SVG mission map. Draws the overlay GeoJSON the service serves,
 * layer by layer, and turns waypoint handle drags into callbacks; it
 * never recomputes mission geometry itself. */

import type { OverlayCollection, OverlayFeature, OverlayLayer } from "./types.js";
import { OVERLAY_LAYERS } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export const VIEW_WIDTH = 1000;
export const VIEW_HEIGHT = 700;
const VIEW_PADDING = 40;

/** Bottom-to-top paint order; lines go above area fills. */
const LAYER_ORDER: readonly OverlayLayer[] = [
  "weather",
  "population",
  "airspace",
  "route",
  "path",
];

const ROUTE_COLORS = ["#0b64c0", "#c0390b", "#0b8a4b", "#8a0bc0", "#c0a00b", "#0bb2c0"];

interface Projection {
  minLat: number;
  minLon: number;
  maxLat: number;
  cosMid: number;
  scale: number;
  offsetX: number;
  offsetY: number;
}

export interface WaypointDrag {
  index: number;
  lat: number;
  lon: number;
}

export interface MapOptions {
  /** Called when a drag on a waypoint handle ends, with the handle's
   * waypoint index and its new geographic position. */
  onWaypointDrag?: (drag: WaypointDrag) => void;
  /** Called when a waypoint handle is clicked without moving. */
  onWaypointSelect?: (index: number) => void;
}

interface DragState {
  index: number;
  handle: SVGCircleElement;
  startX: number;
  startY: number;
  moved: boolean;
}

export class SvgMap {
  readonly svg: SVGSVGElement;
  private readonly groups: Record<OverlayLayer, SVGGElement>;
  private readonly collections: Partial<Record<OverlayLayer, OverlayCollection>> = {};
  private projection: Projection | null = null;
  private drag: DragState | null = null;

  constructor(
    container: HTMLElement,
    private readonly options: MapOptions = {},
  ) {
    const doc = container.ownerDocument;
    this.svg = doc.createElementNS(SVG_NS, "svg") as SVGSVGElement;
    this.svg.setAttribute("viewBox", `0 0 ${VIEW_WIDTH} ${VIEW_HEIGHT}`);
    this.svg.setAttribute("class", "mission-map");
    container.appendChild(this.svg);

    this.groups = {} as Record<OverlayLayer, SVGGElement>;
    for (const layer of LAYER_ORDER) {
      const group = doc.createElementNS(SVG_NS, "g") as SVGGElement;
      group.setAttribute("data-layer", layer);
      this.svg.appendChild(group);
      this.groups[layer] = group;
    }

    this.svg.addEventListener("mousedown", (event) => this.onMouseDown(event as MouseEvent));
    doc.addEventListener("mousemove", (event) => this.onMouseMove(event as MouseEvent));
    doc.addEventListener("mouseup", (event) => this.onMouseUp(event as MouseEvent));
  }

  /** Replace one layer's data and repaint. Passing null clears it. */
  setOverlay(layer: OverlayLayer, collection: OverlayCollection | null): void {
    if (collection === null) {
      delete this.collections[layer];
    } else {
      this.collections[layer] = collection;
    }
    this.refit();
    this.renderAll();
  }

  setVisible(layer: OverlayLayer, visible: boolean): void {
    this.groups[layer].setAttribute("display", visible ? "inline" : "none");
  }

  clear(): void {
    for (const layer of OVERLAY_LAYERS) {
      delete this.collections[layer];
    }
    this.refit();
    this.renderAll();
  }

  /** Geographic position to SVG user units under the current fit. */
  project(lat: number, lon: number): [number, number] {
    const p = this.projection;
    if (p === null) {
      return [VIEW_WIDTH / 2, VIEW_HEIGHT / 2];
    }
    const x = p.offsetX + (lon - p.minLon) * p.cosMid * p.scale;
    const y = p.offsetY + (p.maxLat - lat) * p.scale;
    return [x, y];
  }

  unproject(x: number, y: number): [number, number] {
    const p = this.projection;
    if (p === null) {
      return [0, 0];
    }
    const lon = p.minLon + (x - p.offsetX) / (p.cosMid * p.scale);
    const lat = p.maxLat - (y - p.offsetY) / p.scale;
    return [lat, lon];
  }

  /** Fit the projection to every loaded coordinate. */
  private refit(): void {
    let minLat = Infinity;
    let maxLat = -Infinity;
    let minLon = Infinity;
    let maxLon = -Infinity;
    for (const collection of Object.values(this.collections)) {
      for (const feature of collection.features) {
        for (const [lon, lat] of positionsOf(feature)) {
          minLat = Math.min(minLat, lat);
          maxLat = Math.max(maxLat, lat);
          minLon = Math.min(minLon, lon);
          maxLon = Math.max(maxLon, lon);
        }
      }
    }
    if (minLat > maxLat) {
      this.projection = null;
      return;
    }
    const cosMid = Math.max(0.05, Math.cos((((minLat + maxLat) / 2) * Math.PI) / 180));
    const spanX = Math.max((maxLon - minLon) * cosMid, 1e-6);
    const spanY = Math.max(maxLat - minLat, 1e-6);
    const scale = Math.min(
      (VIEW_WIDTH - 2 * VIEW_PADDING) / spanX,
      (VIEW_HEIGHT - 2 * VIEW_PADDING) / spanY,
    );
    this.projection = {
      minLat,
      minLon,
      maxLat,
      cosMid,
      scale,
      offsetX: (VIEW_WIDTH - spanX * scale) / 2,
      offsetY: (VIEW_HEIGHT - spanY * scale) / 2,
    };
  }

  private renderAll(): void {
    for (const layer of LAYER_ORDER) {
      this.renderLayer(layer);
    }
  }

  private renderLayer(layer: OverlayLayer): void {
    const group = this.groups[layer];
    while (group.firstChild) {
      group.removeChild(group.firstChild);
    }
    const collection = this.collections[layer];
    if (!collection) {
      return;
    }
    for (const [featureIndex, feature] of collection.features.entries()) {
      if (feature.geometry.type === "Polygon") {
        group.appendChild(this.polygonElement(layer, feature));
      } else {
        group.appendChild(this.lineElement(layer, feature, featureIndex));
        if (layer === "path") {
          this.appendPathHandles(group, feature);
        }
      }
    }
  }

  private polygonElement(layer: OverlayLayer, feature: OverlayFeature): SVGElement {
    const doc = this.svg.ownerDocument;
    const polygon = doc.createElementNS(SVG_NS, "polygon");
    const ring = (feature.geometry.coordinates as number[][][])[0] ?? [];
    polygon.setAttribute(
      "points",
      ring.map(([lon, lat]) => this.project(lat ?? 0, lon ?? 0).join(",")).join(" "),
    );
    if (layer === "weather") {
      const risk = Number(feature.properties["risk"] ?? 0);
      polygon.setAttribute("class", "cell weather-cell");
      polygon.setAttribute("fill", "#c0390b");
      polygon.setAttribute("fill-opacity", String(Math.min(0.65, Math.max(0, risk)) * 0.65));
      polygon.setAttribute("stroke", "none");
    } else if (layer === "population") {
      polygon.setAttribute("class", "zone population-zone");
      polygon.setAttribute("fill", "#c08a0b");
      polygon.setAttribute("fill-opacity", "0.25");
      polygon.setAttribute("stroke", "#c08a0b");
    } else {
      polygon.setAttribute(
        "class",
        `zone airspace-zone airspace-${String(feature.properties["zone_class"] ?? "unclassified")}`,
      );
      polygon.setAttribute("fill", "#c00b2d");
      polygon.setAttribute("fill-opacity", "0.15");
      polygon.setAttribute("stroke", "#c00b2d");
    }
    return polygon;
  }

  private lineElement(
    layer: OverlayLayer,
    feature: OverlayFeature,
    featureIndex: number,
  ): SVGElement {
    const doc = this.svg.ownerDocument;
    const polyline = doc.createElementNS(SVG_NS, "polyline");
    const coords = feature.geometry.coordinates as number[][];
    polyline.setAttribute(
      "points",
      coords.map(([lon, lat]) => this.project(lat ?? 0, lon ?? 0).join(",")).join(" "),
    );
    polyline.setAttribute("fill", "none");
    if (layer === "route") {
      const label = String(feature.properties["label"] ?? `route-${featureIndex + 1}`);
      polyline.setAttribute("class", "route-line");
      polyline.setAttribute("data-label", label);
      polyline.setAttribute("stroke", ROUTE_COLORS[featureIndex % ROUTE_COLORS.length] ?? "#0b64c0");
      polyline.setAttribute("stroke-width", "3");
    } else {
      polyline.setAttribute("class", "path-line");
      polyline.setAttribute("stroke", "#111111");
      polyline.setAttribute("stroke-width", "2");
      polyline.setAttribute("stroke-dasharray", "7 4");
    }
    return polyline;
  }

  /** One circle per path waypoint. Vertices that sit on graph nodes
   * are pinned; the rest can be dragged to request a revision. */
  private appendPathHandles(group: SVGGElement, feature: OverlayFeature): void {
    const doc = this.svg.ownerDocument;
    const coords = feature.geometry.coordinates as number[][];
    const pinned = new Set((feature.properties["node_indices"] as number[] | undefined) ?? []);
    for (const [index, position] of coords.entries()) {
      const [lon, lat] = position;
      const [x, y] = this.project(lat ?? 0, lon ?? 0);
      const circle = doc.createElementNS(SVG_NS, "circle") as SVGCircleElement;
      circle.setAttribute("cx", String(x));
      circle.setAttribute("cy", String(y));
      circle.setAttribute("data-index", String(index));
      if (pinned.has(index)) {
        circle.setAttribute("class", "waypoint node-waypoint");
        circle.setAttribute("r", "6");
        circle.setAttribute("fill", "#111111");
      } else {
        circle.setAttribute("class", "waypoint handle-waypoint");
        circle.setAttribute("r", "5");
        circle.setAttribute("fill", "#ffffff");
        circle.setAttribute("stroke", "#111111");
        circle.setAttribute("stroke-width", "1.5");
      }
      group.appendChild(circle);
    }
  }

  /** Client pixels to SVG user units. Without layout (no rendered
   * size) the scale falls back to 1:1. */
  private svgPoint(event: MouseEvent): [number, number] {
    const rect = this.svg.getBoundingClientRect();
    const scaleX = rect.width > 0 ? VIEW_WIDTH / rect.width : 1;
    const scaleY = rect.height > 0 ? VIEW_HEIGHT / rect.height : 1;
    return [(event.clientX - rect.left) * scaleX, (event.clientY - rect.top) * scaleY];
  }

  private onMouseDown(event: MouseEvent): void {
    const target = event.target as Element | null;
    if (!target || (!this.options.onWaypointDrag && !this.options.onWaypointSelect)) {
      return;
    }
    const handle = target.closest?.("circle.handle-waypoint") as SVGCircleElement | null;
    if (!handle) {
      return;
    }
    const [x, y] = this.svgPoint(event);
    this.drag = {
      index: Number(handle.getAttribute("data-index")),
      handle,
      startX: x,
      startY: y,
      moved: false,
    };
    event.preventDefault();
  }

  private onMouseMove(event: MouseEvent): void {
    if (!this.drag) {
      return;
    }
    const [x, y] = this.svgPoint(event);
    if (Math.abs(x - this.drag.startX) + Math.abs(y - this.drag.startY) > 1) {
      this.drag.moved = true;
    }
    // Ghost position only; the real path updates when the server
    // confirms the revision.
    this.drag.handle.setAttribute("cx", String(x));
    this.drag.handle.setAttribute("cy", String(y));
  }

  private onMouseUp(event: MouseEvent): void {
    const drag = this.drag;
    if (!drag) {
      return;
    }
    this.drag = null;
    // Snap the ghost back; the layer only moves for real once the
    // server confirms the revision and fresh overlay data arrives.
    this.renderLayer("path");
    if (!drag.moved) {
      this.options.onWaypointSelect?.(drag.index);
      return;
    }
    const [x, y] = this.svgPoint(event);
    const [lat, lon] = this.unproject(x, y);
    this.options.onWaypointDrag?.({ index: drag.index, lat, lon });
  }
}

function* positionsOf(feature: OverlayFeature): Iterable<[number, number]> {
  if (feature.geometry.type === "LineString") {
    for (const position of feature.geometry.coordinates) {
      yield [position[0] ?? 0, position[1] ?? 0];
    }
  } else {
    for (const ring of feature.geometry.coordinates) {
      for (const position of ring) {
        yield [position[0] ?? 0, position[1] ?? 0];
      }
    }
  }
}
