// Session controller: glues the API client, timeline, hotboxes, and playback
// together for one rally at a time.
//
// Invariant: the UI never mutates state locally. Every gesture goes to the
// server, and the visible anchors/hints are whatever the following refetch
// returned. Optimistic updates are deliberately absent.

import { AnnotatorApi } from "./api.js";
import type { CalibrationAction } from "./hotbox.js";
import { PlaybackController, type PlaybackCommand } from "./playback.js";
import { buildTimeline, type TimelineMark } from "./timeline.js";
import type { AnchorInfo, RallyInfo, Vocabulary } from "./types.js";

export class AnnotatorSession {
  private rally: RallyInfo | null = null;
  private anchors: AnchorInfo[] = [];
  private vocabularyByType: Vocabulary = {};
  private playback = new PlaybackController([]);
  private focusedAnchorId: string | null = null;

  constructor(private readonly api: AnnotatorApi) {}

  get currentRally(): RallyInfo | null {
    return this.rally;
  }

  get currentAnchors(): AnchorInfo[] {
    return [...this.anchors];
  }

  get focusedAnchor(): AnchorInfo | null {
    return this.anchors.find((a) => a.anchor_id === this.focusedAnchorId) ?? null;
  }

  get vocabulary(): Vocabulary {
    return this.vocabularyByType;
  }

  async openRally(matchId: string, rally: RallyInfo): Promise<void> {
    this.rally = rally;
    this.focusedAnchorId = null;
    this.vocabularyByType = await this.api.vocabulary(matchId);
    await this.refresh();
    this.playback.reset();
  }

  /** Re-pull anchors and playback hints; the only way state gets here. */
  async refresh(): Promise<void> {
    if (!this.rally) {
      return;
    }
    this.anchors = await this.api.listAnchors(this.rally.rally_id);
    this.playback.setHints(await this.api.playbackHints(this.rally.rally_id));
    if (this.focusedAnchorId && !this.anchors.some((a) => a.anchor_id === this.focusedAnchorId)) {
      this.focusedAnchorId = null;
    }
  }

  marks(): TimelineMark[] {
    if (!this.rally) {
      return [];
    }
    return buildTimeline(this.anchors, this.rally, this.focusedAnchorId);
  }

  focus(anchorId: string | null): void {
    this.focusedAnchorId = anchorId;
  }

  onFrame(frame: number): PlaybackCommand {
    const cmd = this.playback.update(frame);
    if (cmd.pause && cmd.pauseAt !== null) {
      const hit = this.anchors.find(
        (a) => a.status === "UNCALIBRATED" && a.frame_start === cmd.pauseAt,
      );
      this.focusedAnchorId = hit?.anchor_id ?? null;
    }
    return cmd;
  }

  /** Commit a calibration-box action against the focused anchor. */
  async commitCalibration(action: CalibrationAction | null): Promise<void> {
    if (!action || !this.rally) {
      return;
    }
    if (action.kind === "calibrate" || action.kind === "delete") {
      const target = this.focusedAnchor;
      if (!target) {
        return;
      }
      if (action.kind === "calibrate") {
        await this.api.calibrate(target.anchor_id, action.delta);
      } else {
        await this.api.deleteAnchor(target.anchor_id);
        this.focusedAnchorId = null;
      }
    } else {
      await this.api.addAnchor(this.rally.rally_id, action.frame, "HIT");
    }
    await this.refresh();
  }

  /** Commit an annotation-box choice for an event (anchor or whole rally). */
  async commitAnnotation(
    eventId: string,
    choice: { contextType: string; value: string } | null,
  ): Promise<void> {
    if (!choice) {
      return;
    }
    await this.api.annotate(eventId, choice.contextType, choice.value);
    await this.refresh();
  }
}
