/**
 * Zone drawing and editing gestures over the workspace canvas.  A drag
 * becomes a CreateZone command; handle drags become UpdateZone.  The
 * drawn rectangle is optimistic; the authoritative zone arrives with the
 * next snapshot.
 */

import type { ClientFrame, RectPayload, ZonePayload } from "./protocol.js";

export type Point = [number, number];

export interface DragState {
  start: Point;
  current: Point;
}

export function beginDrag(point: Point): DragState {
  return { start: point, current: point };
}

export function moveDrag(drag: DragState, point: Point): DragState {
  return { ...drag, current: point };
}

/** Normalized rectangle between the drag corners, rounded like payloads. */
export function dragRect(drag: DragState): RectPayload {
  const [ax, ay] = drag.start;
  const [bx, by] = drag.current;
  const round = (v: number) => Math.round(v * 1e6) / 1e6;
  return {
    x: round(Math.min(ax, bx)),
    y: round(Math.min(ay, by)),
    width: round(Math.abs(bx - ax)),
    height: round(Math.abs(by - ay)),
  };
}

const MIN_EDGE = 0.02;

/** Null when the drag is too small to be a deliberate zone. */
export function endDrag(
  drag: DragState,
  requestId: string,
): ClientFrame | null {
  const rect = dragRect(drag);
  if (rect.width < MIN_EDGE || rect.height < MIN_EDGE) {
    return null;
  }
  return { kind: "CreateZone", request_id: requestId, zone: { rect } };
}

export function rectContains(rect: RectPayload, point: Point): boolean {
  const [x, y] = point;
  return (
    x >= rect.x &&
    x <= rect.x + rect.width &&
    y >= rect.y &&
    y <= rect.y + rect.height
  );
}

/** Topmost zone under the pointer; later zones draw on top. */
export function hitTest(
  zones: ZonePayload[],
  point: Point,
): ZonePayload | null {
  for (let i = zones.length - 1; i >= 0; i--) {
    if (rectContains(zones[i].rect, point)) {
      return zones[i];
    }
  }
  return null;
}

export function moveZoneFrame(
  zone: ZonePayload,
  to: Point,
  requestId: string,
): ClientFrame {
  const rect = dragRect({
    start: to,
    current: [to[0] + zone.rect.width, to[1] + zone.rect.height],
  });
  return { kind: "UpdateZone", request_id: requestId, zone_id: zone.id,
           rect };
}

export function resizeZoneFrame(
  zone: ZonePayload,
  corner: Point,
  requestId: string,
): ClientFrame {
  const rect = dragRect({
    start: [zone.rect.x, zone.rect.y],
    current: corner,
  });
  return { kind: "UpdateZone", request_id: requestId, zone_id: zone.id,
           rect };
}

export function deleteZoneFrame(
  zoneId: string,
  requestId: string,
): ClientFrame {
  return { kind: "DeleteZone", request_id: requestId, zone_id: zoneId };
}
