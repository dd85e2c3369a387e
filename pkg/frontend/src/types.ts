export type Vec2 = [number, number];

export interface SurfaceEntry {
    u: number[];
    y: number;
    q: number[];
}

export interface SurfaceDoc {
    o: number[];
    alpha: number;
    grid: { scheme: string; dims: number; count: number };
    entries: SurfaceEntry[];
}

export interface BandDoc extends SurfaceDoc {
    level: number;
    halfwidth: number[];
    draws: number;
    seed: number;
    bandwidth: number;
    jitter_applied: number;
}

export interface TukeyDoc {
    alpha: number;
    empty: boolean;
    vertices: number[][];
}

export interface MetaDoc {
    n: number;
    d: number;
    scheme: string;
    directions: number;
    label: string;
}
