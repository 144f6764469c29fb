import type { Observation, SessionConfig, Snapshot } from "./types.js";

export type FetchLike = (
  url: string,
  init?: {
    method?: string;
    headers?: Record<string, string>;
    body?: string;
  },
) => Promise<{ status: number; json(): Promise<unknown> }>;

/** Service rejected the request (4xx/5xx); carries the HTTP status. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

async function decode(response: {
  status: number;
  json(): Promise<unknown>;
}): Promise<Snapshot> {
  const body = (await response.json().catch(() => ({}))) as Record<
    string,
    unknown
  >;
  if (response.status >= 400) {
    const detail =
      typeof body.detail === "string" ? body.detail : `HTTP ${response.status}`;
    throw new ApiError(response.status, detail);
  }
  return body as unknown as Snapshot;
}

/** Thin typed client over the monitoring service endpoints. */
export class MonitorApi {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (url, init) =>
      fetch(url, init) as ReturnType<FetchLike>,
  ) {}

  private url(path: string): string {
    return `${this.baseUrl.replace(/\/$/, "")}${path}`;
  }

  createSession(config: SessionConfig): Promise<Snapshot> {
    return this.fetchFn(this.url("/sessions"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(config),
    }).then(decode);
  }

  getSession(id: string): Promise<Snapshot> {
    return this.fetchFn(this.url(`/sessions/${id}`)).then(decode);
  }

  postObservation(id: string, observation: Observation): Promise<Snapshot> {
    return this.fetchFn(this.url(`/sessions/${id}/observations`), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(observation),
    }).then(decode);
  }

  deleteSession(id: string): Promise<Snapshot> {
    return this.fetchFn(this.url(`/sessions/${id}`), {
      method: "DELETE",
    }).then(decode);
  }
}
