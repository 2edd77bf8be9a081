import { ApiError, ModelInfo, ScreeningReport, VolumeInfo, asScreeningReport } from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** Thin client over the screening endpoints; fetch is injectable for tests. */
export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (u, i) => fetch(u, i),
  ) {}

  private async request(path: string, init?: RequestInit): Promise<unknown> {
    const resp = await this.fetchFn(this.baseUrl + path, init);
    let body: unknown = null;
    try {
      body = await resp.json();
    } catch {
      // fall through; body stays null
    }
    if (!resp.ok) {
      const detail =
        body && typeof body === "object" && "detail" in body
          ? String((body as { detail: unknown }).detail)
          : resp.statusText;
      throw new ApiError(resp.status, detail);
    }
    return body;
  }

  modelInfo(): Promise<ModelInfo> {
    return this.request("/model/info") as Promise<ModelInfo>;
  }

  async volumes(): Promise<VolumeInfo[]> {
    const body = (await this.request("/volumes")) as { volumes: VolumeInfo[] };
    return body.volumes;
  }

  async screen(volumeId: string, delta: number): Promise<ScreeningReport> {
    const body = await this.request("/screen", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ volume_id: volumeId, delta }),
    });
    return asScreeningReport(body);
  }

  async sweep(volumeId: string, deltas: number[]): Promise<[number, number][]> {
    const body = (await this.request("/sweep", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ volume_id: volumeId, deltas }),
    })) as { sweep: [number, number][] };
    return body.sweep;
  }
}
