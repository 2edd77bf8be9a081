import { FetchLike } from "../src/api.js";
import { ScreeningReport, VolumeInfo } from "../src/types.js";

/** Fixture reports: volume "vol0002" flips between delta=0 and delta=1. */
export const FIXTURE_VOLUMES: VolumeInfo[] = [
  { volume_id: "vol0000", split: "test", n_frames: 9 },
  { volume_id: "vol0001", split: "test", n_frames: 9 },
  { volume_id: "vol0002", split: "test", n_frames: 9 },
];

const SWEEP_GRID: [number, number][] = [
  [-1, 0.2],
  [-0.75, 0.25],
  [-0.5, 0.3],
  [-0.25, 0.4],
  [0, 0.45],
  [0.25, 0.5],
  [0.5, 0.55],
  [0.75, 0.6],
  [1, 0.7],
];

export function fixtureReport(volumeId: string, delta: number): ScreeningReport {
  // decisions: vol0000 always 0, vol0001 always 1, vol0002 positive iff delta >= 0.5
  let decision: 0 | 1;
  if (volumeId === "vol0000") decision = 0;
  else if (volumeId === "vol0001") decision = 1;
  else decision = delta >= 0.5 ? 1 : 0;
  return {
    volume_id: volumeId,
    delta,
    frame_posteriors: [0.123456, 0.5, 0.876543, 0.25, 0.75, 0.4, 0.6],
    decision,
    u_posterior: 0.987654,
    u_disagreement: 0.857142,
    u_sweep: 0.054321,
    sweep: SWEEP_GRID,
  };
}

export interface MockServer {
  fetch: FetchLike;
  calls: { path: string; body: unknown }[];
  screenCount(volumeId: string): number;
  /** Holds responses until release() when latency control is needed. */
  setLatency(ms: number): void;
}

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

export function makeMockServer(): MockServer {
  const calls: { path: string; body: unknown }[] = [];
  let latencyMs = 0;

  const handle = (path: string, body: unknown): Response => {
    if (path === "/volumes") {
      return jsonResponse(200, { volumes: FIXTURE_VOLUMES });
    }
    if (path === "/screen") {
      const { volume_id, delta } = body as { volume_id: string; delta: number };
      if (delta < -1 || delta > 1) {
        return jsonResponse(422, { detail: "delta must be in [-1,1]" });
      }
      if (!FIXTURE_VOLUMES.some((v) => v.volume_id === volume_id)) {
        return jsonResponse(404, { detail: `unknown volume '${volume_id}'` });
      }
      return jsonResponse(200, fixtureReport(volume_id, delta));
    }
    if (path === "/sweep") {
      const { volume_id, deltas } = body as { volume_id: string; deltas: number[] };
      return jsonResponse(200, {
        volume_id,
        sweep: deltas.map((d) => [d, 0.45 + 0.1 * d]),
      });
    }
    return jsonResponse(404, { detail: "not found" });
  };

  const fetchFn: FetchLike = async (url, init) => {
    const path = url.replace(/^https?:\/\/[^/]+/, "");
    const body = init?.body ? JSON.parse(String(init.body)) : null;
    calls.push({ path, body });
    const resp = handle(path, body);
    if (latencyMs > 0) {
      await new Promise((resolve) => setTimeout(resolve, latencyMs));
    }
    return resp;
  };

  return {
    fetch: fetchFn,
    calls,
    screenCount(volumeId: string): number {
      return calls.filter(
        (c) => c.path === "/screen" && (c.body as { volume_id: string }).volume_id === volumeId,
      ).length;
    },
    setLatency(ms: number): void {
      latencyMs = ms;
    },
  };
}
