import { BandDoc, MetaDoc, SurfaceDoc, TukeyDoc } from "./types";

export type FetchLike = (url: string, init?: { signal?: AbortSignal }) => Promise<{
    ok: boolean;
    status: number;
    json(): Promise<unknown>;
}>;

/**
 * Fetch wrapper where only the newest request per channel is allowed to
 * resolve; older in-flight requests are aborted and their results dropped.
 */
export class LatestWins {
    private controllers = new Map<string, AbortController>();

    constructor(private fetchImpl: FetchLike = fetch as unknown as FetchLike) {}

    async get<T>(channel: string, url: string): Promise<T | null> {
        this.controllers.get(channel)?.abort();
        const ctl = new AbortController();
        this.controllers.set(channel, ctl);
        let resp;
        try {
            resp = await this.fetchImpl(url, { signal: ctl.signal });
        } catch (err) {
            if (ctl.signal.aborted) return null; // superseded, not an error
            throw err;
        }
        if (this.controllers.get(channel) !== ctl) return null; // stale
        if (!resp.ok) {
            const body = (await resp.json().catch(() => ({}))) as { error?: string };
            throw new Error(body.error ?? `request failed with status ${resp.status}`);
        }
        return (await resp.json()) as T;
    }
}

export class QsurfClient {
    private latest: LatestWins;

    constructor(public baseUrl: string, fetchImpl?: FetchLike) {
        this.latest = new LatestWins(fetchImpl);
    }

    meta(): Promise<MetaDoc | null> {
        return this.latest.get<MetaDoc>("meta", `${this.baseUrl}/meta`);
    }

    surface(o: [number, number], alpha: number): Promise<SurfaceDoc | null> {
        const url = `${this.baseUrl}/surface?o=${o[0]},${o[1]}&alpha=${alpha}`;
        return this.latest.get<SurfaceDoc>("surface", url);
    }

    median(o: [number, number]): Promise<SurfaceDoc | null> {
        const url = `${this.baseUrl}/surface?o=${o[0]},${o[1]}&alpha=0.5`;
        return this.latest.get<SurfaceDoc>("median", url);
    }

    band(o: [number, number], alpha: number, level = 0.95, draws = 300, seed = 0):
        Promise<BandDoc | null> {
        const url = `${this.baseUrl}/band?o=${o[0]},${o[1]}&alpha=${alpha}` +
            `&level=${level}&draws=${draws}&seed=${seed}`;
        return this.latest.get<BandDoc>("band", url);
    }

    tukey(alpha: number): Promise<TukeyDoc | null> {
        return this.latest.get<TukeyDoc>("tukey", `${this.baseUrl}/tukey?alpha=${alpha}`);
    }

    async uploadCsv(body: string): Promise<void> {
        const resp = await (fetch as unknown as FetchLike)(
            `${this.baseUrl}/dataset`,
            { method: "POST", body } as never,
        );
        if (!resp.ok) {
            const doc = (await resp.json().catch(() => ({}))) as { error?: string };
            throw new Error(doc.error ?? `upload failed with status ${resp.status}`);
        }
    }
}
