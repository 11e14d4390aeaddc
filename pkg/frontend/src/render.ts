/**
 * Canvas drawing for the schematic top-down workspace: tables, zones,
 * object icons with state badges, and the in-progress zone drag.
 */

import type {
  ObjectPayload,
  SnapshotPayload,
  ZonePayload,
} from "./protocol.js";
import { dragRect, type DragState } from "./zones.js";

export interface TruthObject extends ObjectPayload {
  detectable: boolean;
}

export interface Viewport {
  scale: number;
  width: number;
  height: number;
}

export function fitViewport(
  canvas: HTMLCanvasElement,
  tableWidth: number,
  tableHeight: number,
): Viewport {
  const scale = Math.min(
    canvas.width / tableWidth,
    canvas.height / tableHeight,
  );
  return { scale, width: tableWidth, height: tableHeight };
}

export function toCanvas(
  view: Viewport,
  point: [number, number],
): [number, number] {
  return [point[0] * view.scale, point[1] * view.scale];
}

export function toWorkspace(
  view: Viewport,
  point: [number, number],
): [number, number] {
  return [point[0] / view.scale, point[1] / view.scale];
}

const CATEGORY_FILL: Record<string, string> = {};
const PALETTE = [
  "#d9822b", "#3b7dd8", "#4caf50", "#9c27b0",
  "#795548", "#607d8b", "#e91e63", "#00897b",
];

function fillFor(category: string): string {
  if (!(category in CATEGORY_FILL)) {
    const index = Object.keys(CATEGORY_FILL).length % PALETTE.length;
    CATEGORY_FILL[category] = PALETTE[index];
  }
  return CATEGORY_FILL[category];
}

function drawZone(
  ctx: CanvasRenderingContext2D,
  view: Viewport,
  zone: ZonePayload,
): void {
  const [x, y] = toCanvas(view, [zone.rect.x, zone.rect.y]);
  const w = zone.rect.width * view.scale;
  const h = zone.rect.height * view.scale;
  ctx.save();
  ctx.globalAlpha = 0.25;
  ctx.fillStyle = zone.color;
  ctx.fillRect(x, y, w, h);
  ctx.globalAlpha = 1;
  ctx.strokeStyle = zone.color;
  ctx.lineWidth = 2;
  ctx.strokeRect(x, y, w, h);
  ctx.fillStyle = "#333";
  ctx.font = "12px sans-serif";
  ctx.fillText(zone.id, x + 4, y + 14);
  ctx.restore();
}

function drawObject(
  ctx: CanvasRenderingContext2D,
  view: Viewport,
  obj: ObjectPayload,
  options: { dimmed?: boolean; selected?: boolean } = {},
): void {
  const [x, y] = toCanvas(view, obj.position);
  ctx.save();
  ctx.globalAlpha = options.dimmed ? 0.35 : 1;
  ctx.beginPath();
  ctx.arc(x, y, 9, 0, Math.PI * 2);
  ctx.fillStyle = fillFor(obj.category);
  ctx.fill();
  if (options.selected) {
    ctx.strokeStyle = "#000";
    ctx.lineWidth = 3;
    ctx.stroke();
  }
  ctx.fillStyle = "#222";
  ctx.font = "10px sans-serif";
  const label = obj.state
    ? `${obj.category} ${obj.id} [${obj.state}]`
    : `${obj.category} ${obj.id}`;
  ctx.fillText(label, x + 11, y + 3);
  ctx.restore();
}

export function render(
  ctx: CanvasRenderingContext2D,
  view: Viewport,
  snapshot: SnapshotPayload | null,
  extras: {
    drag: DragState | null;
    selectedObject: number | null;
    truth: TruthObject[] | null;
  },
): void {
  ctx.clearRect(0, 0, view.width * view.scale, view.height * view.scale);
  ctx.fillStyle = "#f4efe6";
  ctx.fillRect(0, 0, view.width * view.scale, view.height * view.scale);
  if (snapshot === null) {
    return;
  }
  for (const zone of snapshot.zones) {
    drawZone(ctx, view, zone);
  }
  const perceived = new Set(snapshot.objects.map((o) => o.id));
  if (extras.truth !== null) {
    for (const obj of extras.truth) {
      if (!perceived.has(obj.id)) {
        drawObject(ctx, view, obj, { dimmed: true });
      }
    }
  }
  for (const obj of snapshot.objects) {
    if (obj.contained_in !== null) {
      continue;
    }
    drawObject(ctx, view, obj, {
      selected: obj.id === extras.selectedObject,
    });
  }
  if (extras.drag !== null) {
    const rect = dragRect(extras.drag);
    const [x, y] = toCanvas(view, [rect.x, rect.y]);
    ctx.save();
    ctx.setLineDash([6, 4]);
    ctx.strokeStyle = "#555";
    ctx.strokeRect(
      x, y, rect.width * view.scale, rect.height * view.scale,
    );
    ctx.restore();
  }
}
