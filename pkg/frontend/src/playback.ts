// Auto-slowdown playback: inside a hint window the video runs at the window's
// rate and pauses once at the anchor frame; passing back before the window
// re-arms it for the next pass.

import type { PlaybackHint } from "./types.js";

export interface PlaybackCommand {
  rate: number;
  pause: boolean;
  /** Frame of the anchor being examined when pausing, else null. */
  pauseAt: number | null;
}

export class PlaybackController {
  private hints: PlaybackHint[];
  private firedPauses = new Set<number>();

  constructor(hints: PlaybackHint[]) {
    this.hints = [...hints].sort((a, b) => a.frame_from - b.frame_from);
  }

  /** Replace hints after a refetch (e.g. an anchor was calibrated). */
  setHints(hints: PlaybackHint[]): void {
    this.hints = [...hints].sort((a, b) => a.frame_from - b.frame_from);
    for (const fired of [...this.firedPauses]) {
      if (!this.hints.some((h) => h.pause_at === fired)) {
        this.firedPauses.delete(fired);
      }
    }
  }

  /** Forget all pauses (e.g. the user restarted the rally). */
  reset(): void {
    this.firedPauses.clear();
  }

  /** Evaluate the playhead position; call once per rendered frame or seek. */
  update(frame: number): PlaybackCommand {
    for (const h of this.hints) {
      // moving back before a window re-arms its pause for the next pass
      if (frame < h.frame_from) {
        this.firedPauses.delete(h.pause_at);
      }
    }
    const active = this.hints.find((h) => h.frame_from <= frame && frame <= h.frame_to);
    if (!active) {
      return { rate: 1, pause: false, pauseAt: null };
    }
    if (frame >= active.pause_at && !this.firedPauses.has(active.pause_at)) {
      this.firedPauses.add(active.pause_at);
      return { rate: active.rate, pause: true, pauseAt: active.pause_at };
    }
    return { rate: active.rate, pause: false, pauseAt: null };
  }
}
