import { QsurfClient } from "./api";
import { Action, initialState, reduce, ViewState } from "./state";
import { draw, screenToWorld, Viewport } from "./render";
import { TukeyDoc } from "./types";

const params = new URLSearchParams(window.location.search);
const API = params.get("api") ?? "http://127.0.0.1:8008";

const canvas = document.getElementById("view") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const alphaSlider = document.getElementById("alpha") as HTMLInputElement;
const alphaLabel = document.getElementById("alpha-label") as HTMLSpanElement;
const banner = document.getElementById("banner") as HTMLDivElement;
const tukeyBadge = document.getElementById("tukey-badge") as HTMLSpanElement;
const pinBtn = document.getElementById("pin") as HTMLButtonElement;
const clearBtn = document.getElementById("clear-pins") as HTMLButtonElement;
const fileInput = document.getElementById("csv") as HTMLInputElement;
const discrepancyLabel = document.getElementById("discrepancy") as HTMLSpanElement;

const client = new QsurfClient(API);
const vp: Viewport = { width: canvas.width, height: canvas.height, span: 12, center: [0, 0] };

let state: ViewState = initialState();

function dispatch(action: Action) {
    state = reduce(state, action);
    render();
}

function render() {
    draw(ctx, vp, state);
    alphaLabel.textContent = state.alpha.toFixed(3);
    banner.style.display = state.serviceUp ? "none" : "block";
    tukeyBadge.textContent =
        state.overlays.tukey && state.tukey?.empty ? "tukey region: empty" : "";
    discrepancyLabel.textContent =
        state.lastDiscrepancy > 0 ? `reconcile Δ=${state.lastDiscrepancy.toExponential(2)}` : "";
}

function refetchSurface() {
    client
        .surface(state.o, state.alpha)
        .then((doc) => doc && dispatch({ kind: "server-surface", doc }))
        .catch(() => dispatch({ kind: "service-down" }));
    if (state.overlays.band) refetchBand();
    if (state.overlays.median) refetchMedian();
}

function refetchBand() {
    client
        .band(state.o, state.alpha)
        .then((doc) => doc && dispatch({ kind: "server-band", doc }))
        .catch(() => dispatch({ kind: "service-down" }));
}

function refetchMedian() {
    client
        .median(state.o)
        .then((doc) => doc && dispatch({ kind: "server-median", doc }))
        .catch(() => dispatch({ kind: "service-down" }));
}

function refetchTukey() {
    client
        .tukey(state.alpha)
        .then((doc: TukeyDoc | null) => doc && dispatch({ kind: "server-tukey", doc }))
        .catch(() => dispatch({ kind: "service-down" }));
}

// observer dragging: optimistic transfer immediately, server confirmation async
let dragging = false;
canvas.addEventListener("pointerdown", (ev) => {
    dragging = true;
    canvas.setPointerCapture(ev.pointerId);
});
canvas.addEventListener("pointermove", (ev) => {
    if (!dragging) return;
    const rect = canvas.getBoundingClientRect();
    const o = screenToWorld(vp, [ev.clientX - rect.left, ev.clientY - rect.top]);
    dispatch({ kind: "move-observer", o });
    refetchSurface();
});
canvas.addEventListener("pointerup", (ev) => {
    dragging = false;
    canvas.releasePointerCapture(ev.pointerId);
    refetchSurface();
});

alphaSlider.addEventListener("input", () => {
    dispatch({ kind: "set-alpha", alpha: parseFloat(alphaSlider.value) });
    refetchSurface();
    if (state.overlays.tukey) refetchTukey();
});

pinBtn.addEventListener("click", () => dispatch({ kind: "pin" }));
clearBtn.addEventListener("click", () => dispatch({ kind: "clear-pins" }));

for (const name of ["band", "tukey", "dataPoints", "median"] as const) {
    const box = document.getElementById(`ov-${name}`) as HTMLInputElement;
    box.addEventListener("change", () => {
        dispatch({ kind: "toggle-overlay", overlay: name });
        if (name === "band" && state.overlays.band) refetchBand();
        if (name === "tukey" && state.overlays.tukey) refetchTukey();
        if (name === "median" && state.overlays.median) refetchMedian();
        render();
    });
}

fileInput.addEventListener("change", async () => {
    const file = fileInput.files?.[0];
    if (!file) return;
    const text = await file.text();
    try {
        await client.uploadCsv(text);
    } catch (err) {
        banner.textContent = String(err);
        banner.style.display = "block";
        return;
    }
    const points = text
        .split(/\r?\n/)
        .map((line) => line.split(",").map(Number))
        .filter((row) => row.length === 2 && row.every((v) => Number.isFinite(v)))
        .map((row) => [row[0], row[1]] as [number, number]);
    dispatch({ kind: "set-data-points", points });
    refetchSurface();
});

client
    .meta()
    .then(() => refetchSurface())
    .catch(() => dispatch({ kind: "service-down" }));
render();
