// HTTP client for the annotation service. All state lives server-side; this
// client never caches responses, so every read reflects the store.

import type {
  AnchorInfo,
  AnnotationInfo,
  MatchInfo,
  PlaybackHint,
  QueryRule,
  RallyInfo,
  Vocabulary,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly code: string,
    message: string,
    readonly status: number,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function parse<T>(res: Response): Promise<T> {
  const body = await res.json().catch(() => null);
  if (!res.ok) {
    const err = body?.error;
    throw new ApiError(err?.code ?? "HttpError", err?.message ?? res.statusText, res.status);
  }
  return body as T;
}

export class AnnotatorApi {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, "") + path;
  }

  private get<T>(path: string): Promise<T> {
    return this.fetchFn(this.url(path)).then((r) => parse<T>(r));
  }

  private send<T>(method: string, path: string, body?: unknown): Promise<T> {
    return this.fetchFn(this.url(path), {
      method,
      headers: { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    }).then((r) => parse<T>(r));
  }

  async listMatches(): Promise<MatchInfo[]> {
    return (await this.get<{ matches: MatchInfo[] }>("/matches")).matches;
  }

  async listRallies(matchId: string): Promise<RallyInfo[]> {
    return (await this.get<{ rallies: RallyInfo[] }>(`/matches/${matchId}/rallies`)).rallies;
  }

  async vocabulary(matchId: string): Promise<Vocabulary> {
    return (await this.get<{ vocabulary: Vocabulary }>(`/matches/${matchId}/vocabulary`)).vocabulary;
  }

  async listAnchors(rallyId: string, includeDeleted = false): Promise<AnchorInfo[]> {
    const suffix = includeDeleted ? "?include_deleted=true" : "";
    return (await this.get<{ anchors: AnchorInfo[] }>(`/rallies/${rallyId}/anchors${suffix}`)).anchors;
  }

  calibrate(anchorId: string, delta: number): Promise<AnchorInfo> {
    return this.send<AnchorInfo>("POST", `/anchors/${anchorId}/calibrate`, { delta });
  }

  addAnchor(
    rallyId: string,
    frame: number,
    type: string,
    x?: number,
    y?: number,
  ): Promise<AnchorInfo> {
    return this.send<AnchorInfo>("POST", `/rallies/${rallyId}/anchors`, {
      frame,
      type,
      x: x ?? null,
      y: y ?? null,
    });
  }

  deleteAnchor(anchorId: string): Promise<AnchorInfo> {
    return this.send<AnchorInfo>("DELETE", `/anchors/${anchorId}`);
  }

  annotate(
    eventId: string,
    contextType: string,
    value: string,
    author = "annotator",
  ): Promise<AnnotationInfo> {
    return this.send<AnnotationInfo>("PUT", "/annotations", {
      event_id: eventId,
      context_type: contextType,
      value,
      author,
    });
  }

  async annotations(eventId: string): Promise<AnnotationInfo[]> {
    return (
      await this.get<{ annotations: AnnotationInfo[] }>(`/annotations?event_id=${encodeURIComponent(eventId)}`)
    ).annotations;
  }

  async queryRallies(matchId: string, rule: QueryRule): Promise<RallyInfo[]> {
    return (await this.send<{ rallies: RallyInfo[] }>("POST", `/matches/${matchId}/query`, rule)).rallies;
  }

  async playbackHints(rallyId: string): Promise<PlaybackHint[]> {
    return (await this.get<{ windows: PlaybackHint[] }>(`/rallies/${rallyId}/playback-hints`)).windows;
  }
}
