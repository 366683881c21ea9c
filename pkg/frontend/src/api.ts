/** Typed client for the monitor's HTTP API. */

import type {
  CircleSceneDoc,
  DetailSceneDoc,
  LaneSceneDoc,
  OverviewDoc,
} from "./types.js";

export class ApiError extends Error {
  readonly status: number;
  readonly missing?: string;

  constructor(status: number, message: string, missing?: string) {
    super(message);
    this.status = status;
    this.missing = missing;
  }

  get isNotFound(): boolean {
    return this.status === 404;
  }
}

export interface ApiClient {
  overview(): Promise<OverviewDoc>;
  groupScene(groupId: string): Promise<CircleSceneDoc>;
  formScene(formId: string, requestId: string): Promise<LaneSceneDoc>;
  controlScene(formId: string, requestId: string, order: number): Promise<DetailSceneDoc>;
  streamUrl(): string;
}

type FetchLike = (url: string) => Promise<{
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
}>;

export class HttpApiClient implements ApiClient {
  private readonly base: string;
  private readonly fetchFn: FetchLike;

  constructor(baseUrl = "", fetchFn?: FetchLike) {
    this.base = baseUrl.replace(/\/+$/, "");
    this.fetchFn = fetchFn ?? ((url) => fetch(url));
  }

  private async get<T>(path: string): Promise<T> {
    const response = await this.fetchFn(`${this.base}${path}`);
    if (!response.ok) {
      let message = `request failed with status ${response.status}`;
      let missing: string | undefined;
      try {
        const body = (await response.json()) as { error?: string; missing?: string };
        if (body.error) message = body.error;
        missing = body.missing;
      } catch {
        // non-JSON error body; keep the generic message
      }
      throw new ApiError(response.status, message, missing);
    }
    return (await response.json()) as T;
  }

  overview(): Promise<OverviewDoc> {
    return this.get("/api/overview");
  }

  groupScene(groupId: string): Promise<CircleSceneDoc> {
    return this.get(`/api/groups/${encodeURIComponent(groupId)}/scene`);
  }

  formScene(formId: string, requestId: string): Promise<LaneSceneDoc> {
    return this.get(
      `/api/forms/${encodeURIComponent(formId)}/requests/${encodeURIComponent(requestId)}/scene`,
    );
  }

  controlScene(formId: string, requestId: string, order: number): Promise<DetailSceneDoc> {
    return this.get(
      `/api/forms/${encodeURIComponent(formId)}/requests/${encodeURIComponent(requestId)}` +
        `/controls/${order}/scene`,
    );
  }

  streamUrl(): string {
    return `${this.base}/api/stream`;
  }
}
