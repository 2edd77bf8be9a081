/** JSON shapes served by the screening API. Field names are fixed contract. */

export interface ScreeningReport {
  volume_id: string;
  delta: number;
  frame_posteriors: number[];
  decision: 0 | 1;
  u_posterior: number;
  u_disagreement: number;
  u_sweep: number;
  sweep: [number, number][];
}

export interface VolumeInfo {
  volume_id: string;
  split: string;
  n_frames: number;
}

export interface ModelInfo {
  config: Record<string, unknown>;
  effective_geometry: Record<string, number>;
  extended_transition: { t11: number; t22: number } | null;
  frames_per_screen: number;
  n_volumes: number;
  sweep_deltas: number[];
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`API error ${status}: ${detail}`);
  }
}

function isNumberArray(x: unknown): x is number[] {
  return Array.isArray(x) && x.every((v) => typeof v === "number");
}

/** Narrow an arbitrary JSON body to a ScreeningReport or throw. */
export function asScreeningReport(body: unknown): ScreeningReport {
  const r = body as ScreeningReport;
  if (
    typeof r !== "object" ||
    r === null ||
    typeof r.volume_id !== "string" ||
    typeof r.delta !== "number" ||
    !isNumberArray(r.frame_posteriors) ||
    (r.decision !== 0 && r.decision !== 1) ||
    typeof r.u_posterior !== "number" ||
    typeof r.u_disagreement !== "number" ||
    typeof r.u_sweep !== "number" ||
    !Array.isArray(r.sweep) ||
    !r.sweep.every((p) => isNumberArray(p) && p.length === 2)
  ) {
    throw new ApiError(0, "malformed screening report");
  }
  return r;
}
