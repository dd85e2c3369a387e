import { ViewState } from "./state";
import { SurfaceDoc } from "./types";
import { surfacePolyline } from "./transfer";

export interface Viewport {
    width: number;
    height: number;
    /** world-units shown across the canvas width */
    span: number;
    center: [number, number];
}

export function worldToScreen(vp: Viewport, p: [number, number]): [number, number] {
    const s = vp.width / vp.span;
    return [
        vp.width / 2 + (p[0] - vp.center[0]) * s,
        vp.height / 2 - (p[1] - vp.center[1]) * s,
    ];
}

export function screenToWorld(vp: Viewport, p: [number, number]): [number, number] {
    const s = vp.width / vp.span;
    return [
        vp.center[0] + (p[0] - vp.width / 2) / s,
        vp.center[1] - (p[1] - vp.height / 2) / s,
    ];
}

const PIN_COLORS = ["#b58900", "#6c71c4", "#2aa198", "#d33682", "#859900", "#cb4b16"];

function drawPolyline(
    ctx: CanvasRenderingContext2D,
    vp: Viewport,
    pts: Array<[number, number]>,
    stroke: string,
    width = 1.5,
    dash: number[] = [],
) {
    if (pts.length < 2) return;
    ctx.save();
    ctx.strokeStyle = stroke;
    ctx.lineWidth = width;
    ctx.setLineDash(dash);
    ctx.beginPath();
    const [x0, y0] = worldToScreen(vp, pts[0]);
    ctx.moveTo(x0, y0);
    for (let i = 1; i < pts.length; i++) {
        const [x, y] = worldToScreen(vp, pts[i]);
        ctx.lineTo(x, y);
    }
    ctx.stroke();
    ctx.restore();
}

function bandRing(doc: SurfaceDoc, halfwidth: number[], sign: 1 | -1) {
    return doc.entries.map((e, i) => {
        const y = e.y + sign * halfwidth[i];
        return [doc.o[0] + y * e.u[0], doc.o[1] + y * e.u[1]] as [number, number];
    });
}

export function draw(ctx: CanvasRenderingContext2D, vp: Viewport, state: ViewState) {
    ctx.clearRect(0, 0, vp.width, vp.height);
    ctx.fillStyle = "#fdf6e3";
    ctx.fillRect(0, 0, vp.width, vp.height);

    if (state.overlays.dataPoints) {
        ctx.fillStyle = "rgba(88,110,117,0.35)";
        for (const p of state.dataPoints) {
            const [x, y] = worldToScreen(vp, p);
            ctx.fillRect(x - 1, y - 1, 2, 2);
        }
    }

    if (state.overlays.band && state.band) {
        const lo = bandRing(state.band, state.band.halfwidth, -1);
        const hi = bandRing(state.band, state.band.halfwidth, 1);
        ctx.save();
        ctx.fillStyle = "rgba(38,139,210,0.15)";
        ctx.beginPath();
        hi.forEach((p, i) => {
            const [x, y] = worldToScreen(vp, p);
            if (i === 0) ctx.moveTo(x, y);
            else ctx.lineTo(x, y);
        });
        ctx.closePath();
        lo.slice().reverse().forEach((p, i) => {
            const [x, y] = worldToScreen(vp, p);
            if (i === 0) ctx.moveTo(x, y);
            else ctx.lineTo(x, y);
        });
        ctx.closePath();
        ctx.fill("evenodd");
        ctx.restore();
    }

    if (state.overlays.tukey && state.tukey && !state.tukey.empty) {
        const poly = state.tukey.vertices.map((v) => [v[0], v[1]] as [number, number]);
        poly.push(poly[0]);
        drawPolyline(ctx, vp, poly, "#859900", 1.5, [6, 3]);
    }

    state.pinned.forEach((pin, i) => {
        drawPolyline(ctx, vp, surfacePolyline(pin.doc),
            PIN_COLORS[i % PIN_COLORS.length], 1.0);
        const [x, y] = worldToScreen(vp, pin.o);
        ctx.fillStyle = PIN_COLORS[i % PIN_COLORS.length];
        ctx.fillRect(x - 3, y - 3, 6, 6);
    });

    if (state.overlays.median && state.median) {
        drawPolyline(ctx, vp, surfacePolyline(state.median), "#dc322f", 1.0, [2, 3]);
    }

    const current = state.optimistic ?? state.surface;
    if (current) {
        drawPolyline(ctx, vp, surfacePolyline(current), "#268bd2", 2.0);
    }

    // observer cross
    const [ox, oy] = worldToScreen(vp, state.o);
    ctx.strokeStyle = "#dc322f";
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    ctx.moveTo(ox - 6, oy);
    ctx.lineTo(ox + 6, oy);
    ctx.moveTo(ox, oy - 6);
    ctx.lineTo(ox, oy + 6);
    ctx.stroke();
}
