import { ApiClient } from "./api.js";
import { debounce } from "./debounce.js";
import { Store } from "./state.js";
import { ApiError } from "./types.js";

export interface ControllerOptions {
  debounceMs?: number;
  sweepDeltas?: number[];
}

const DEFAULT_SWEEP = [-1, -0.75, -0.5, -0.25, 0, 0.25, 0.5, 0.75, 1];

/** Wires slider/roster events to debounced, delta-tagged API traffic. */
export class Controller {
  private readonly refreshSoon: () => void;
  readonly sweepDeltas: number[];

  constructor(
    private readonly api: ApiClient,
    private readonly store: Store,
    options: ControllerOptions = {},
  ) {
    this.sweepDeltas = options.sweepDeltas ?? DEFAULT_SWEEP;
    this.refreshSoon = debounce(() => {
      void this.refreshRoster();
    }, options.debounceMs ?? 150);
  }

  async start(): Promise<void> {
    const volumes = await this.api.volumes();
    this.store.setVolumes(volumes);
    await this.refreshRoster();
  }

  /** Slider input: clamp happens in the store; requests are debounced. */
  onDeltaChange(value: number): void {
    this.store.setDelta(value);
    this.refreshSoon();
  }

  onPageChange(page: number): void {
    this.store.setPage(page);
    this.refreshSoon();
  }

  async onSelectVolume(volumeId: string): Promise<void> {
    this.store.selectVolume(volumeId);
    const delta = this.store.currentDelta;
    await this.screenOne(volumeId, delta);
    await this.fetchSweepLazily(volumeId);
  }

  /** One /screen round-trip, tagged with the delta it was issued for. */
  private async screenOne(volumeId: string, deltaTag: number): Promise<void> {
    try {
      const report = await this.api.screen(volumeId, deltaTag);
      this.store.acknowledgeScreen(volumeId, deltaTag, report);
    } catch (err) {
      this.store.setError(err instanceof ApiError ? err.detail : String(err));
    }
  }

  private async ensureBenchmark(volumeId: string): Promise<void> {
    if (this.store.hasBenchmark(volumeId)) return;
    try {
      const report = await this.api.screen(volumeId, 0);
      this.store.acknowledgeBenchmark(volumeId, report);
    } catch (err) {
      this.store.setError(err instanceof ApiError ? err.detail : String(err));
    }
  }

  /** Refresh every visible volume at the current delta (one request each). */
  async refreshRoster(): Promise<void> {
    const delta = this.store.currentDelta;
    const visible = this.store.visibleVolumes();
    await Promise.all(
      visible.flatMap((v) => [
        this.ensureBenchmark(v.volume_id),
        this.screenOne(v.volume_id, delta),
      ]),
    );
  }

  async fetchSweepLazily(volumeId: string): Promise<void> {
    if (this.store.cachedSweep(volumeId, this.sweepDeltas)) return;
    try {
      const sweep = await this.api.sweep(volumeId, this.sweepDeltas);
      this.store.storeSweep(volumeId, this.sweepDeltas, sweep);
    } catch (err) {
      this.store.setError(err instanceof ApiError ? err.detail : String(err));
    }
  }
}
