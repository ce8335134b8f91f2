import { describe, expect, it } from "vitest";

import {
  CalibrationGesture,
  classifyZone,
  dragFrameDelta,
  sectorForDrag,
} from "../src/hotbox.js";

describe("dragFrameDelta", () => {
  it("commits trunc(N / k) frames for every scrub gain", () => {
    for (const k of [4, 8, 16]) {
      for (const n of [-65, -33, -17, -8, -3, 0, 3, 8, 17, 24, 33, 65]) {
        expect(dragFrameDelta(n, k)).toBe(Math.trunc(n / k) + 0);
      }
    }
  });

  it("matches the worked example: 24 px at gain 8 is +3 frames", () => {
    expect(dragFrameDelta(24, 8)).toBe(3);
    expect(dragFrameDelta(-24, 8)).toBe(-3);
  });

  it("truncates toward zero on both signs", () => {
    expect(dragFrameDelta(7, 8)).toBe(0);
    expect(dragFrameDelta(-7, 8)).toBe(0);
    expect(dragFrameDelta(15, 8)).toBe(1);
    expect(dragFrameDelta(-15, 8)).toBe(-1);
  });
});

describe("classifyZone", () => {
  it("returns NONE inside the dead zone", () => {
    expect(classifyZone(3, 0, 6)).toBe("NONE");
    expect(classifyZone(0, -5, 6)).toBe("NONE");
    expect(classifyZone(4, 4, 6)).toBe("NONE");
  });

  it("picks the dominant axis beyond the dead zone", () => {
    expect(classifyZone(-20, 3)).toBe("LEFT");
    expect(classifyZone(20, -3)).toBe("RIGHT");
    expect(classifyZone(2, -20)).toBe("UP");
    expect(classifyZone(-2, 20)).toBe("DOWN");
  });
});

describe("CalibrationGesture", () => {
  const start = { x: 100, y: 100 };

  it("dead-zone release commits nothing", () => {
    const g = new CalibrationGesture(start, 200, 250);
    g.move({ x: 103, y: 100 });
    expect(g.release()).toBeNull();
  });

  it("right drag calibrates forward with live frame preview", () => {
    const g = new CalibrationGesture(start, 200, 250, 8, 6);
    const preview = g.move({ x: 124, y: 101 });
    expect(preview.zone).toBe("RIGHT");
    expect(preview.previewFrame).toBe(203);
    expect(g.release()).toEqual({ kind: "calibrate", delta: 3 });
  });

  it("left drag calibrates backward", () => {
    const g = new CalibrationGesture(start, 200, 250, 8, 6);
    g.move({ x: 100 - 17, y: 99 });
    expect(g.release()).toEqual({ kind: "calibrate", delta: -2 });
  });

  it("horizontal drag inside one gain step is not a mutation", () => {
    const g = new CalibrationGesture(start, 200, 250, 8, 6);
    g.move({ x: 107, y: 100 });
    expect(g.release()).toBeNull();
  });

  it("up adds at the playhead, down deletes", () => {
    const up = new CalibrationGesture(start, 200, 250);
    up.move({ x: 101, y: 80 });
    expect(up.release()).toEqual({ kind: "add", frame: 250 });

    const down = new CalibrationGesture(start, 200, 250);
    down.move({ x: 99, y: 130 });
    expect(down.release()).toEqual({ kind: "delete" });
  });
});

describe("sectorForDrag", () => {
  it("divides a 4-value menu into 90-degree sectors starting at the top", () => {
    expect(sectorForDrag(0, -20, 4)).toBe(0); // up
    expect(sectorForDrag(20, 0, 4)).toBe(1); // right
    expect(sectorForDrag(0, 20, 4)).toBe(2); // down
    expect(sectorForDrag(-20, 0, 4)).toBe(3); // left
  });

  it("diagonals land in the nearest sector", () => {
    expect(sectorForDrag(14, -14.01, 4)).toBe(0);
    expect(sectorForDrag(14.01, -14, 4)).toBe(1);
  });

  it("dead zone selects nothing", () => {
    expect(sectorForDrag(2, -2, 4)).toBeNull();
    expect(sectorForDrag(0, 0, 8)).toBeNull();
  });

  it("covers every sector of larger menus", () => {
    const n = 6;
    const seen = new Set<number>();
    for (let deg = 0; deg < 360; deg += 5) {
      const rad = (deg * Math.PI) / 180;
      const sector = sectorForDrag(30 * Math.cos(rad), 30 * Math.sin(rad), n);
      expect(sector).not.toBeNull();
      seen.add(sector!);
    }
    expect(seen.size).toBe(n);
  });
});
