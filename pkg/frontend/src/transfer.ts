import { SurfaceDoc, SurfaceEntry } from "./types";

/**
 * Move a surface to a new observer without asking the server:
 * y'(u) = y(u) - <O' - O, u> and q' = O' + y'(u) u.
 *
 * The relation is exact, so applying it optimistically during a drag and
 * reconciling with the server response later cannot diverge beyond rounding.
 */
export function transferSurface(doc: SurfaceDoc, oNew: number[]): SurfaceDoc {
    const oOld = doc.o;
    const delta = oNew.map((v, i) => v - oOld[i]);
    const entries: SurfaceEntry[] = doc.entries.map((e) => {
        let shift = 0;
        for (let i = 0; i < e.u.length; i++) shift += delta[i] * e.u[i];
        const y = e.y - shift;
        const q = e.u.map((ui, i) => oNew[i] + y * ui);
        return { u: e.u, y, q };
    });
    return { ...doc, o: [...oNew], entries };
}

/** Largest per-direction |y| difference between two surfaces on one grid. */
export function maxRangeDiscrepancy(a: SurfaceDoc, b: SurfaceDoc): number {
    if (a.entries.length !== b.entries.length) return Infinity;
    let worst = 0;
    for (let i = 0; i < a.entries.length; i++) {
        worst = Math.max(worst, Math.abs(a.entries[i].y - b.entries[i].y));
    }
    return worst;
}

/** Close the surface polyline in grid order (the grid sweeps the circle). */
export function surfacePolyline(doc: SurfaceDoc): Array<[number, number]> {
    const pts = doc.entries.map((e) => [e.q[0], e.q[1]] as [number, number]);
    if (pts.length > 0) pts.push(pts[0]);
    return pts;
}
