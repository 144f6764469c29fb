import { readFileSync } from "node:fs";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import { ApiError, MonitorApi } from "../src/api.js";
import { SessionController, bannerState } from "../src/session.js";
import type { Observation, Snapshot } from "../src/types.js";

interface Fixture {
  config: { alpha: number };
  observations: Observation[];
  snapshots: Array<
    Pick<
      Snapshot,
      "e_value" | "log_e" | "blocks_completed" | "pending" | "reject"
    >
  >;
}

const fixture: Fixture = JSON.parse(
  readFileSync(join(__dirname, "fixtures", "golden_stream.json"), "utf-8"),
);

function fixtureSnapshot(index: number): Snapshot {
  const base = fixture.snapshots[index]!;
  return {
    id: "golden",
    status: base.reject ? "stopped-rejected" : "running",
    alpha: fixture.config.alpha,
    threshold: 1 / fixture.config.alpha,
    trajectory: [],
    design: { n_a: 1, n_b: 1 },
    model: { type: "beta" },
    ...base,
  } as Snapshot;
}

const initialSnapshot: Snapshot = {
  id: "golden",
  status: "running",
  e_value: 1,
  log_e: 0,
  blocks_completed: 0,
  pending: { a: 0, b: 0 },
  alpha: fixture.config.alpha,
  threshold: 1 / fixture.config.alpha,
  reject: false,
  trajectory: [],
  design: { n_a: 1, n_b: 1 },
  model: { type: "beta" },
};

/** Scripted service: answers each observation with the frozen snapshot. */
function goldenApi() {
  let step = 0;
  return new MonitorApi("http://service", async (url, init) => {
    if (url.endsWith("/sessions") && init?.method === "POST") {
      return { status: 201, json: async () => initialSnapshot };
    }
    if (url.endsWith("/observations")) {
      const snapshot = fixtureSnapshot(step);
      step += 1;
      return { status: 200, json: async () => snapshot };
    }
    throw new Error(`unexpected request ${url}`);
  });
}

describe("golden stream banner", () => {
  it("flips exactly at the first snapshot with reject=true", async () => {
    const banners: string[] = [];
    const controller = new SessionController(goldenApi(), (view) => {
      banners.push(bannerState(view));
    });
    await controller.start({
      n_a: 1,
      n_b: 1,
      alpha: fixture.config.alpha,
      model: { type: "beta" },
    });
    const flips: number[] = [];
    for (const [index, observation] of fixture.observations.entries()) {
      await controller.record(observation.group, observation.y);
      const view = controller.state;
      expect(view.snapshot!.e_value).toBe(fixture.snapshots[index]!.e_value);
      if (bannerState(view) === "stop") flips.push(index);
    }
    const firstReject = fixture.snapshots.findIndex((s) => s.reject);
    expect(flips[0]).toBe(firstReject);
    expect(banners.filter((b) => b === "stop").length).toBeGreaterThan(0);
    expect(banners.indexOf("stop")).toBe(banners.length - 1);
  });
});

describe("queueing and failure handling", () => {
  it("keeps inputs queued while offline and flushes on retry", async () => {
    let failing = true;
    let posted = 0;
    const api = new MonitorApi("http://service", async (url, init) => {
      if (url.endsWith("/sessions") && init?.method === "POST") {
        return { status: 201, json: async () => initialSnapshot };
      }
      if (failing) throw new TypeError("fetch failed");
      posted += 1;
      return {
        status: 200,
        json: async () => ({ ...initialSnapshot, blocks_completed: posted }),
      };
    });
    const controller = new SessionController(api);
    await controller.start({
      n_a: 1,
      n_b: 1,
      alpha: 0.05,
      model: { type: "beta" },
    });
    await controller.record("a", 1);
    await controller.record("b", 0);
    expect(controller.state.connection).toBe("offline");
    expect(controller.state.queued).toHaveLength(2); // no silent loss
    // the rendered value is still the last acknowledged snapshot
    expect(controller.state.snapshot!.e_value).toBe(1);

    failing = false;
    await controller.retry();
    expect(controller.state.queued).toHaveLength(0);
    expect(posted).toBe(2);
    expect(controller.state.connection).toBe("ok");
  });

  it("renders a stopped session when the service answers 409", async () => {
    const stopped: Snapshot = {
      ...initialSnapshot,
      status: "stopped-rejected",
      reject: true,
      e_value: 25,
      log_e: Math.log(25),
    };
    const api = new MonitorApi("http://service", async (url, init) => {
      if (url.endsWith("/sessions") && init?.method === "POST") {
        return { status: 201, json: async () => initialSnapshot };
      }
      if (init?.method === "POST") {
        return {
          status: 409,
          json: async () => ({ detail: "session is stopped-rejected" }),
        };
      }
      return { status: 200, json: async () => stopped };
    });
    const controller = new SessionController(api);
    await controller.start({
      n_a: 1,
      n_b: 1,
      alpha: 0.05,
      model: { type: "beta" },
    });
    await controller.record("a", 1);
    expect(controller.state.error).toBe("session stopped");
    expect(controller.state.queued).toHaveLength(0);
    expect(bannerState(controller.state)).toBe("stop");
  });

  it("surfaces creation errors inline", async () => {
    const api = new MonitorApi("http://service", async () => ({
      status: 400,
      json: async () => ({ detail: "alpha must lie in (0, 1]" }),
    }));
    const controller = new SessionController(api);
    const ok = await controller.start({
      n_a: 1,
      n_b: 1,
      alpha: 0.05,
      model: { type: "beta" },
    });
    expect(ok).toBe(false);
    expect(controller.state.error).toContain("alpha");
  });
});

describe("api client", () => {
  it("targets the documented endpoints", async () => {
    const calls: Array<{ url: string; method: string; body?: string }> = [];
    const api = new MonitorApi("http://service/", async (url, init) => {
      calls.push({ url, method: init?.method ?? "GET", body: init?.body });
      return { status: 200, json: async () => initialSnapshot };
    });
    await api.getSession("abc");
    await api.postObservation("abc", { group: "b", y: 1 });
    await api.deleteSession("abc");
    expect(calls).toEqual([
      { url: "http://service/sessions/abc", method: "GET", body: undefined },
      {
        url: "http://service/sessions/abc/observations",
        method: "POST",
        body: JSON.stringify({ group: "b", y: 1 }),
      },
      {
        url: "http://service/sessions/abc",
        method: "DELETE",
        body: undefined,
      },
    ]);
  });

  it("raises ApiError with the service detail", async () => {
    const api = new MonitorApi("http://service", async () => ({
      status: 404,
      json: async () => ({ detail: "unknown session" }),
    }));
    await expect(api.getSession("nope")).rejects.toThrowError(ApiError);
  });
});
