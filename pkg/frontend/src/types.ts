// Wire types mirroring the annotation service's JSON responses.

export type PlayerSide = "A" | "B";
export type EventType = "HIT" | "BOUNCE" | "RALLY";
export type AnchorStatus = "UNCALIBRATED" | "CALIBRATED" | "DELETED";
export type AnchorOrigin = "DETECTED" | "USER_ADDED";

export interface MatchInfo {
  match_id: string;
  frame_count: number;
  fps: number | null;
  width: number | null;
  height: number | null;
  video_url: string | null;
  rally_count: number;
}

export interface RallyInfo {
  rally_id: string;
  game_index: number;
  frame_start: number;
  frame_end: number;
  server: PlayerSide;
  winner: PlayerSide | null;
  flagged: boolean;
}

export interface AnchorInfo {
  anchor_id: string;
  rally_id: string;
  event_type: EventType;
  frame_start: number;
  frame_end: number;
  x: number | null;
  y: number | null;
  status: AnchorStatus;
  origin: AnchorOrigin;
}

export interface AnnotationInfo {
  annotation_id: string;
  event_id: string;
  context_type: string;
  value: string;
  author: string;
  timestamp: number;
}

export interface PlaybackHint {
  frame_from: number;
  frame_to: number;
  rate: number;
  pause_at: number;
}

export interface QueryRule {
  server?: PlayerSide;
  winner?: PlayerSide;
  min_strokes?: number;
  predicates?: [string, string][];
}

export type Vocabulary = Record<string, string[]>;
