import { BandDoc, SurfaceDoc, TukeyDoc, Vec2 } from "./types";
import { transferSurface } from "./transfer";

export const ALPHA_MIN = 0.5;
export const ALPHA_MAX = 0.99;

export interface PinnedSurface {
    o: Vec2;
    alpha: number;
    doc: SurfaceDoc;
}

export interface Overlays {
    band: boolean;
    tukey: boolean;
    dataPoints: boolean;
    median: boolean;
}

export interface ViewState {
    o: Vec2;
    alpha: number;
    /** last server-confirmed surface for (o, alpha), possibly stale during drags */
    surface: SurfaceDoc | null;
    /** optimistic surface shown while a fetch is in flight */
    optimistic: SurfaceDoc | null;
    band: BandDoc | null;
    tukey: TukeyDoc | null;
    median: SurfaceDoc | null;
    pinned: PinnedSurface[];
    overlays: Overlays;
    dataPoints: Array<[number, number]>;
    serviceUp: boolean;
    lastDiscrepancy: number;
}

export type Action =
    | { kind: "move-observer"; o: Vec2 }
    | { kind: "set-alpha"; alpha: number }
    | { kind: "server-surface"; doc: SurfaceDoc }
    | { kind: "server-band"; doc: BandDoc }
    | { kind: "server-tukey"; doc: TukeyDoc }
    | { kind: "server-median"; doc: SurfaceDoc }
    | { kind: "pin" }
    | { kind: "clear-pins" }
    | { kind: "toggle-overlay"; overlay: keyof Overlays }
    | { kind: "set-data-points"; points: Array<[number, number]> }
    | { kind: "service-down" };

export function initialState(): ViewState {
    return {
        o: [0, 0],
        alpha: 0.7,
        surface: null,
        optimistic: null,
        band: null,
        tukey: null,
        median: null,
        pinned: [],
        overlays: { band: false, tukey: false, dataPoints: true, median: false },
        dataPoints: [],
        serviceUp: true,
        lastDiscrepancy: 0,
    };
}

function clampAlpha(alpha: number): number {
    return Math.min(ALPHA_MAX, Math.max(ALPHA_MIN, alpha));
}

/** Pure transition: same state and action always give the same next state. */
export function reduce(state: ViewState, action: Action): ViewState {
    switch (action.kind) {
        case "move-observer": {
            // optimism: carry the last confirmed surface along the exact identity
            const base = state.surface;
            return {
                ...state,
                o: action.o,
                optimistic: base ? transferSurface(base, action.o) : null,
            };
        }
        case "set-alpha": {
            // a level change needs the server; keep showing the old surface
            return { ...state, alpha: clampAlpha(action.alpha), band: null };
        }
        case "server-surface": {
            let discrepancy = 0;
            if (
                state.optimistic &&
                state.optimistic.alpha === action.doc.alpha &&
                sameObserver(state.optimistic.o, action.doc.o)
            ) {
                for (let i = 0; i < action.doc.entries.length; i++) {
                    discrepancy = Math.max(
                        discrepancy,
                        Math.abs(state.optimistic.entries[i].y - action.doc.entries[i].y),
                    );
                }
            }
            return {
                ...state,
                surface: action.doc,
                optimistic: null,
                serviceUp: true,
                lastDiscrepancy: discrepancy,
            };
        }
        case "server-band":
            return { ...state, band: action.doc, serviceUp: true };
        case "server-tukey":
            return { ...state, tukey: action.doc, serviceUp: true };
        case "server-median":
            return { ...state, median: action.doc, serviceUp: true };
        case "pin": {
            const doc = state.optimistic ?? state.surface;
            if (!doc) return state;
            const snap: PinnedSurface = { o: [...state.o], alpha: doc.alpha, doc };
            return { ...state, pinned: [...state.pinned, snap] };
        }
        case "clear-pins":
            return { ...state, pinned: [] };
        case "toggle-overlay":
            return {
                ...state,
                overlays: {
                    ...state.overlays,
                    [action.overlay]: !state.overlays[action.overlay],
                },
            };
        case "set-data-points":
            return { ...state, dataPoints: action.points };
        case "service-down":
            return { ...state, serviceUp: false };
    }
}

function sameObserver(a: number[], b: number[]): boolean {
    return a.length === b.length && a.every((v, i) => v === b[i]);
}

/** Replay a whole interaction log from scratch. */
export function replay(actions: Action[]): ViewState {
    return actions.reduce(reduce, initialState());
}
