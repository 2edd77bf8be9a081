import { ScreeningReport, VolumeInfo } from "./types.js";

/** A roster row: the last acknowledged report for the current delta, plus
 * the benchmark (delta = 0) decision used for flip flagging. */
export interface RosterEntry {
  volumeId: string;
  split: string;
  decision: 0 | 1 | null;
  uPosterior: number | null;
  uDisagreement: number | null;
  uSweep: number | null;
  benchmarkDecision: 0 | 1 | null;
}

export interface StoreSnapshot {
  delta: number;
  page: number;
  pageSize: number;
  selectedVolume: string | null;
  roster: RosterEntry[];
  selectedReport: ScreeningReport | null;
  error: string | null;
}

export const SLIDER_STEP = 0.05;

export function clampDelta(value: number): number {
  if (Number.isNaN(value)) return 0;
  const snapped = Math.round(value / SLIDER_STEP) * SLIDER_STEP;
  return Math.min(1, Math.max(-1, Number(snapped.toFixed(2))));
}

/** Central UI state. Responses are tagged with the delta they answered;
 * anything not matching the current delta is dropped, so the displayed
 * decisions always describe the most recently acknowledged response for
 * the delta on screen. */
export class Store {
  private delta = 0;
  private page = 0;
  private readonly pageSize: number;
  private volumes: VolumeInfo[] = [];
  private selectedVolume: string | null = null;
  private reports = new Map<string, ScreeningReport>(); // current-delta reports
  private benchmarks = new Map<string, 0 | 1>(); // decisions at delta = 0
  private selectedReport: ScreeningReport | null = null;
  private sweepCache = new Map<string, [number, number][]>();
  private error: string | null = null;
  private listeners: Array<() => void> = [];

  constructor(pageSize = 20) {
    this.pageSize = pageSize;
  }

  subscribe(listener: () => void): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const l of this.listeners) l();
  }

  get currentDelta(): number {
    return this.delta;
  }

  setVolumes(volumes: VolumeInfo[]): void {
    this.volumes = volumes;
    this.emit();
  }

  setDelta(value: number): void {
    const next = clampDelta(value);
    if (next === this.delta) return;
    this.delta = next;
    // reports for the previous delta no longer describe the screen
    this.reports.clear();
    if (this.selectedReport && this.selectedReport.delta !== next) {
      this.selectedReport = null;
    }
    this.emit();
  }

  setPage(page: number): void {
    this.page = Math.max(0, Math.min(page, this.maxPage()));
    this.emit();
  }

  maxPage(): number {
    return Math.max(0, Math.ceil(this.volumes.length / this.pageSize) - 1);
  }

  visibleVolumes(): VolumeInfo[] {
    const start = this.page * this.pageSize;
    return this.volumes.slice(start, start + this.pageSize);
  }

  selectVolume(volumeId: string | null): void {
    this.selectedVolume = volumeId;
    this.selectedReport = null;
    this.emit();
  }

  get selected(): string | null {
    return this.selectedVolume;
  }

  /** Record a screen response; returns false when dropped as stale. */
  acknowledgeScreen(volumeId: string, deltaTag: number, report: ScreeningReport): boolean {
    if (deltaTag !== this.delta) return false; // late reply for an old delta
    this.reports.set(volumeId, report);
    if (volumeId === this.selectedVolume) {
      this.selectedReport = report;
    }
    this.error = null;
    this.emit();
    return true;
  }

  acknowledgeBenchmark(volumeId: string, report: ScreeningReport): void {
    this.benchmarks.set(volumeId, report.decision);
    this.emit();
  }

  hasBenchmark(volumeId: string): boolean {
    return this.benchmarks.has(volumeId);
  }

  setError(message: string | null): void {
    this.error = message;
    this.emit();
  }

  cachedSweep(volumeId: string, deltas: number[]): [number, number][] | undefined {
    return this.sweepCache.get(`${volumeId}|${deltas.join(",")}`);
  }

  storeSweep(volumeId: string, deltas: number[], sweep: [number, number][]): void {
    this.sweepCache.set(`${volumeId}|${deltas.join(",")}`, sweep);
    this.emit();
  }

  snapshot(): StoreSnapshot {
    const roster = this.visibleVolumes().map((v): RosterEntry => {
      const report = this.reports.get(v.volume_id) ?? null;
      return {
        volumeId: v.volume_id,
        split: v.split,
        decision: report ? report.decision : null,
        uPosterior: report ? report.u_posterior : null,
        uDisagreement: report ? report.u_disagreement : null,
        uSweep: report ? report.u_sweep : null,
        benchmarkDecision: this.benchmarks.get(v.volume_id) ?? null,
      };
    });
    return {
      delta: this.delta,
      page: this.page,
      pageSize: this.pageSize,
      selectedVolume: this.selectedVolume,
      roster,
      selectedReport: this.selectedReport,
      error: this.error,
    };
  }
}

/** A volume is flagged when its decision differs from the benchmark one. */
export function isFlipped(entry: RosterEntry): boolean {
  return (
    entry.decision !== null &&
    entry.benchmarkDecision !== null &&
    entry.decision !== entry.benchmarkDecision
  );
}
