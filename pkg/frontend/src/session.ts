import { ApiError, MonitorApi } from "./api.js";
import type {
  Group,
  Observation,
  SessionConfig,
  Snapshot,
} from "./types.js";

export type Banner = "idle" | "running" | "stop" | "stopped";
export type Connection = "ok" | "offline";

export interface SessionView {
  snapshot: Snapshot | null;
  queued: Observation[];
  inFlight: boolean;
  connection: Connection;
  error: string | null;
}

/** Banner state is read off the last acknowledged snapshot only; the
 * client never recomputes or extrapolates the e-value. */
export function bannerState(view: SessionView): Banner {
  if (!view.snapshot) return "idle";
  if (view.snapshot.reject) return "stop";
  if (view.snapshot.status !== "running") return "stopped";
  return "running";
}

/** One live session: outcomes queue FIFO with a single request in
 * flight; a connection failure keeps the queue intact and flags the
 * view as offline rather than dropping input. */
export class SessionController {
  private view: SessionView = {
    snapshot: null,
    queued: [],
    inFlight: false,
    connection: "ok",
    error: null,
  };

  constructor(
    private readonly api: MonitorApi,
    private readonly onChange: (view: SessionView) => void = () => {},
  ) {}

  get state(): SessionView {
    return {
      ...this.view,
      queued: [...this.view.queued],
    };
  }

  private emit(update: Partial<SessionView>): void {
    this.view = { ...this.view, ...update };
    this.onChange(this.state);
  }

  async start(config: SessionConfig): Promise<boolean> {
    try {
      const snapshot = await this.api.createSession(config);
      this.emit({
        snapshot,
        queued: [],
        inFlight: false,
        connection: "ok",
        error: null,
      });
      return true;
    } catch (error) {
      this.emit({ error: describe(error) });
      return false;
    }
  }

  /** Queue one outcome and start draining if idle. */
  record(group: Group, y: 0 | 1): Promise<void> {
    if (!this.view.snapshot) {
      this.emit({ error: "no running session" });
      return Promise.resolve();
    }
    this.emit({ queued: [...this.view.queued, { group, y }] });
    return this.pump();
  }

  /** Re-attempt delivery after a connection failure. */
  retry(): Promise<void> {
    if (this.view.connection === "offline") {
      this.emit({ connection: "ok" });
    }
    return this.pump();
  }

  async stop(): Promise<void> {
    const snapshot = this.view.snapshot;
    if (!snapshot) return;
    try {
      const updated = await this.api.deleteSession(snapshot.id);
      this.emit({ snapshot: updated, queued: [] });
    } catch (error) {
      this.emit({ error: describe(error) });
    }
  }

  private async pump(): Promise<void> {
    if (this.view.inFlight || this.view.connection === "offline") return;
    const snapshot = this.view.snapshot;
    const next = this.view.queued[0];
    if (!snapshot || !next) return;
    this.emit({ inFlight: true, error: null });
    try {
      const updated = await this.api.postObservation(snapshot.id, next);
      this.emit({
        snapshot: updated,
        queued: this.view.queued.slice(1),
        inFlight: false,
        connection: "ok",
      });
      await this.pump();
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        // the session stopped server-side; refresh and drop the queue
        const latest = await this.api
          .getSession(snapshot.id)
          .catch(() => snapshot);
        this.emit({
          snapshot: latest,
          queued: [],
          inFlight: false,
          error: "session stopped",
        });
        return;
      }
      if (error instanceof ApiError) {
        // rejected input (4xx): drop it, keep the rest flowing
        this.emit({
          queued: this.view.queued.slice(1),
          inFlight: false,
          error: describe(error),
        });
        await this.pump();
        return;
      }
      // network failure: keep the observation queued, warn the monitor
      this.emit({ inFlight: false, connection: "offline" });
    }
  }
}

function describe(error: unknown): string {
  return error instanceof Error ? error.message : String(error);
}
