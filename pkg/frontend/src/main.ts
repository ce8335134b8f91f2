// Browser shell: binds the session controller to a <video> element, a canvas
// timeline, and pointer-driven hotboxes. Keyboard parity: arrows nudge the
// focused anchor by one frame, Enter confirms (calibrate with delta 0).

import { AnnotatorApi } from "./api.js";
import { AnnotatorSession } from "./app.js";
import { AnnotationGesture, CalibrationGesture } from "./hotbox.js";
import { scaleToDisplay } from "./timeline.js";
import type { RallyInfo } from "./types.js";

const MARK_RADIUS = 5;
const COLORS: Record<string, string> = { BLACK: "#222", GREEN: "#2a2", RED: "#d22" };

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

export async function boot(baseUrl: string): Promise<void> {
  const api = new AnnotatorApi(baseUrl);
  const session = new AnnotatorSession(api);

  const video = el<HTMLVideoElement>("video");
  const timeline = el<HTMLCanvasElement>("timeline");
  const overlay = el<HTMLCanvasElement>("overlay");
  const rallySelect = el<HTMLSelectElement>("rally-select");
  const status = el<HTMLElement>("status");

  const matches = await api.listMatches();
  if (!matches.length) {
    status.textContent = "no matches in store";
    return;
  }
  const match = matches[0];
  if (match.video_url) {
    video.src = match.video_url;
  }
  const fps = match.fps ?? 25;
  const rallies = await api.listRallies(match.match_id);
  for (const r of rallies) {
    const opt = document.createElement("option");
    opt.value = r.rally_id;
    opt.textContent = `${r.rally_id} (${r.server} serves${r.winner ? `, ${r.winner} wins` : ""})`;
    rallySelect.appendChild(opt);
  }

  let currentRally: RallyInfo = rallies[0];
  let gesture: CalibrationGesture | null = null;
  let annotationGesture: AnnotationGesture | null = null;

  const frameNow = () => Math.round(video.currentTime * fps);

  function drawTimeline(): void {
    const ctx = timeline.getContext("2d")!;
    ctx.clearRect(0, 0, timeline.width, timeline.height);
    ctx.fillStyle = "#eee";
    ctx.fillRect(0, timeline.height / 2 - 2, timeline.width, 4);
    for (const mark of session.marks()) {
      ctx.fillStyle = COLORS[mark.color];
      ctx.beginPath();
      ctx.arc(mark.position * timeline.width, timeline.height / 2, MARK_RADIUS, 0, 2 * Math.PI);
      ctx.fill();
    }
  }

  function drawOverlay(): void {
    const ctx = overlay.getContext("2d")!;
    ctx.clearRect(0, 0, overlay.width, overlay.height);
    const anchor = session.focusedAnchor;
    if (anchor && anchor.x !== null && anchor.y !== null && match.width && match.height) {
      const p = scaleToDisplay(anchor.x, anchor.y, match.width, match.height, overlay.width, overlay.height);
      ctx.fillStyle = COLORS.RED;
      ctx.beginPath();
      ctx.arc(p.x, p.y, 6, 0, 2 * Math.PI);
      ctx.fill();
    }
  }

  async function openRally(rally: RallyInfo): Promise<void> {
    currentRally = rally;
    await session.openRally(match.match_id, rally);
    video.currentTime = rally.frame_start / fps;
    drawTimeline();
    drawOverlay();
    status.textContent = `rally ${rally.rally_id}`;
  }

  rallySelect.addEventListener("change", () => {
    const rally = rallies.find((r) => r.rally_id === rallySelect.value);
    if (rally) {
      void openRally(rally);
    }
  });

  video.addEventListener("timeupdate", () => {
    const cmd = session.onFrame(frameNow());
    video.playbackRate = cmd.rate;
    if (cmd.pause) {
      video.pause();
      drawTimeline();
      drawOverlay();
    }
  });

  overlay.addEventListener("pointerdown", (ev) => {
    if (ev.shiftKey && session.focusedAnchor) {
      const vocabulary = session.vocabulary;
      const contextType = session.focusedAnchor.event_type === "RALLY" ? "rally_tactic" : "stroke_type";
      const values = vocabulary[contextType] ?? [];
      annotationGesture = new AnnotationGesture({ x: ev.offsetX, y: ev.offsetY }, contextType, values);
    } else {
      gesture = new CalibrationGesture(
        { x: ev.offsetX, y: ev.offsetY },
        session.focusedAnchor?.frame_start ?? frameNow(),
        frameNow(),
      );
    }
  });

  overlay.addEventListener("pointermove", (ev) => {
    if (gesture) {
      const preview = gesture.move({ x: ev.offsetX, y: ev.offsetY });
      if (preview.previewFrame !== null) {
        video.currentTime = preview.previewFrame / fps;
      }
    } else if (annotationGesture) {
      annotationGesture.move({ x: ev.offsetX, y: ev.offsetY });
    }
  });

  overlay.addEventListener("pointerup", () => {
    if (gesture) {
      const action = gesture.release();
      gesture = null;
      void session.commitCalibration(action).then(drawTimeline).then(drawOverlay);
    } else if (annotationGesture) {
      const choice = annotationGesture.release();
      const target = session.focusedAnchor?.anchor_id ?? currentRally.rally_id;
      annotationGesture = null;
      void session.commitAnnotation(target, choice).then(drawTimeline);
    }
  });

  document.addEventListener("keydown", (ev) => {
    if (ev.key === "ArrowLeft" || ev.key === "ArrowRight") {
      void session
        .commitCalibration({ kind: "calibrate", delta: ev.key === "ArrowLeft" ? -1 : 1 })
        .then(drawTimeline);
    } else if (ev.key === "Enter") {
      void session.commitCalibration({ kind: "calibrate", delta: 0 }).then(drawTimeline);
    }
  });

  await openRally(currentRally);
}
