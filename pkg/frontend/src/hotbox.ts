// Circular gesture menus: a four-zone calibration box (left/right scrub the
// anchor frame, up adds, down deletes) and an N-sector radial annotation menu.
// Zone assignment is a pure function of the drag vector; nothing commits until
// the pointer travels past the dead zone.

export const DEFAULT_SCRUB_GAIN = 8; // pixels per frame of scrub
export const DEFAULT_DEAD_ZONE = 6; // pixels of drag with no effect

export type HotboxZone = "LEFT" | "RIGHT" | "UP" | "DOWN" | "NONE";

export interface Point {
  x: number;
  y: number;
}

/** Dominant-axis zone for a drag vector, screen coordinates (y down). */
export function classifyZone(dx: number, dy: number, deadZone = DEFAULT_DEAD_ZONE): HotboxZone {
  if (Math.hypot(dx, dy) < deadZone) {
    return "NONE";
  }
  if (Math.abs(dx) >= Math.abs(dy)) {
    return dx < 0 ? "LEFT" : "RIGHT";
  }
  return dy < 0 ? "UP" : "DOWN";
}

/** Horizontal drag to whole frames: trunc(dx / gain), toward zero. */
export function dragFrameDelta(dx: number, gain = DEFAULT_SCRUB_GAIN): number {
  return Math.trunc(dx / gain) + 0; // + 0 folds -0 into 0
}

export type CalibrationAction =
  | { kind: "calibrate"; delta: number }
  | { kind: "add"; frame: number }
  | { kind: "delete" };

export interface CalibrationPreview {
  zone: HotboxZone;
  /** Frame the video should preview while scrubbing; null outside LEFT/RIGHT. */
  previewFrame: number | null;
}

/**
 * One press-drag-release interaction with the calibration box over an anchor.
 * The caller feeds pointer positions; release() yields the mutation to send,
 * or null for dead-zone releases.
 */
export class CalibrationGesture {
  private origin: Point;
  private current: Point;

  constructor(
    origin: Point,
    private readonly anchorFrame: number,
    private readonly playheadFrame: number,
    private readonly gain = DEFAULT_SCRUB_GAIN,
    private readonly deadZone = DEFAULT_DEAD_ZONE,
  ) {
    this.origin = origin;
    this.current = origin;
  }

  get dragVector(): Point {
    return { x: this.current.x - this.origin.x, y: this.current.y - this.origin.y };
  }

  move(to: Point): CalibrationPreview {
    this.current = to;
    const { x, y } = this.dragVector;
    const zone = classifyZone(x, y, this.deadZone);
    if (zone === "LEFT" || zone === "RIGHT") {
      return { zone, previewFrame: this.anchorFrame + dragFrameDelta(x, this.gain) };
    }
    return { zone, previewFrame: null };
  }

  release(): CalibrationAction | null {
    const { x, y } = this.dragVector;
    switch (classifyZone(x, y, this.deadZone)) {
      case "LEFT":
      case "RIGHT": {
        const delta = dragFrameDelta(x, this.gain);
        return delta === 0 ? null : { kind: "calibrate", delta };
      }
      case "UP":
        return { kind: "add", frame: this.playheadFrame };
      case "DOWN":
        return { kind: "delete" };
      default:
        return null;
    }
  }
}

/**
 * Sector under a drag vector in an N-sector radial menu. Sector 0 is centered
 * straight up, the rest follow clockwise. Dead-zone drags select nothing.
 */
export function sectorForDrag(
  dx: number,
  dy: number,
  sectorCount: number,
  deadZone = DEFAULT_DEAD_ZONE,
): number | null {
  if (sectorCount < 1 || Math.hypot(dx, dy) < deadZone) {
    return null;
  }
  const width = (2 * Math.PI) / sectorCount;
  // screen coords: atan2(dy, dx) grows clockwise; 0 points right.
  // Shift so 0 points up and sector 0 is centered on it.
  let angle = Math.atan2(dy, dx) + Math.PI / 2 + width / 2;
  angle = ((angle % (2 * Math.PI)) + 2 * Math.PI) % (2 * Math.PI);
  return Math.floor(angle / width) % sectorCount;
}

export interface AnnotationChoice {
  contextType: string;
  value: string;
}

/** Radial menu bound to one context type's vocabulary. */
export class AnnotationGesture {
  private origin: Point;
  private current: Point;

  constructor(
    origin: Point,
    private readonly contextType: string,
    private readonly values: string[],
    private readonly deadZone = DEFAULT_DEAD_ZONE,
  ) {
    this.origin = origin;
    this.current = origin;
  }

  move(to: Point): number | null {
    this.current = to;
    return this.activeSector();
  }

  activeSector(): number | null {
    const dx = this.current.x - this.origin.x;
    const dy = this.current.y - this.origin.y;
    return sectorForDrag(dx, dy, this.values.length, this.deadZone);
  }

  release(): AnnotationChoice | null {
    const sector = this.activeSector();
    if (sector === null) {
      return null;
    }
    return { contextType: this.contextType, value: this.values[sector] };
  }
}
