// Timeline marks and the spatial event-position overlay. Colors are a pure
// function of store status plus the currently examined anchor; the UI holds
// no color state of its own.

import type { AnchorInfo, RallyInfo } from "./types.js";

export type MarkColor = "BLACK" | "GREEN" | "RED";

export interface TimelineMark {
  anchorId: string;
  /** Normalized [0, 1] position along the rally timeline. */
  position: number;
  color: MarkColor;
  eventType: string;
}

export function buildTimeline(
  anchors: AnchorInfo[],
  rally: RallyInfo,
  focusedAnchorId: string | null = null,
): TimelineMark[] {
  const span = Math.max(1, rally.frame_end - rally.frame_start);
  const marks: TimelineMark[] = [];
  for (const a of anchors) {
    if (a.status === "DELETED") {
      continue;
    }
    const raw = (a.frame_start - rally.frame_start) / span;
    const color: MarkColor =
      a.anchor_id === focusedAnchorId ? "RED" : a.status === "CALIBRATED" ? "GREEN" : "BLACK";
    marks.push({
      anchorId: a.anchor_id,
      position: Math.min(1, Math.max(0, raw)),
      color,
      eventType: a.event_type,
    });
  }
  marks.sort((m, n) => m.position - n.position || (m.anchorId < n.anchorId ? -1 : 1));
  return marks;
}

/** Scale an anchor's video-pixel position onto the displayed element. */
export function scaleToDisplay(
  x: number,
  y: number,
  videoWidth: number,
  videoHeight: number,
  displayWidth: number,
  displayHeight: number,
): { x: number; y: number } {
  return {
    x: (x / videoWidth) * displayWidth,
    y: (y / videoHeight) * displayHeight,
  };
}
