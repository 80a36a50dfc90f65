// Single-page client: slice canvas with overlays, tool strip, slice
// navigator, side panel with paint/cut/3D controls and a mesh viewport.
// Server events queue up and are applied once per animation frame.

import { Connection } from './connection.js';
import { MeshView } from './meshview.js';
import { parseOBJ } from './objparse.js';
import { decodeSlicePayload, toRGBA } from './pgm.js';
import type { CutImageEvent, ServerEvent, SliceEvent } from './protocol.js';
import { applyEvent, initialState, OverlayState } from './state.js';
import { CutTool, PaintTool, ToolName, WireTool } from './tools.js';
import { canvasToPixel, fit, imageToCanvas, makeViewport, pan, Viewport, zoomAt } from './viewport.js';

const $ = (id: string) => document.getElementById(id)!;

const url = `ws://${location.hostname}:${new URLSearchParams(location.search).get('port') ?? '8765'}`;
const conn = new Connection(url);

const state: OverlayState = initialState();
const cutStates = new Map<number, OverlayState>();
let activeCut: number | null = null;
let viewport: Viewport = makeViewport(4);
let cutViewport: Viewport = makeViewport(6);
let tool: ToolName = 'wire';
let showCosts = false;

const pending: ServerEvent[] = [];
conn.onEvent((ev) => pending.push(ev));

const canvas = $('slice') as HTMLCanvasElement;
const ctx = canvas.getContext('2d')!;
const cutCanvas = $('cutview') as HTMLCanvasElement;
const cutCtx = cutCanvas.getContext('2d')!;
const meshView = new MeshView($('meshview') as HTMLCanvasElement);

const wireTool = new WireTool(conn);
const cutWireTools = new Map<number, WireTool>();
const paintTool = new PaintTool(conn);
const cutTool = new CutTool(conn);

const strokes: [number, number][][] = [];
let painting = false;
let panning: [number, number] | null = null;

// ---------------------------------------------------------------------------
// event application
// ---------------------------------------------------------------------------

function drain(): void {
  while (pending.length) {
    const ev = pending.shift()!;
    route(ev);
  }
}

function route(ev: ServerEvent): void {
  const scope = (ev as { cut_id?: number }).cut_id;
  if (ev.type === 'cut_image') {
    const ce = ev as CutImageEvent;
    if (!cutStates.has(ce.cut_id)) cutStates.set(ce.cut_id, initialState());
    applyEvent(cutStates.get(ce.cut_id)!, ev, ce.cut_id);
    const def = cutTool.cuts.find((c) => c.id === ce.cut_id);
    if (!def) {
      // cut_end reply: register with the two points the tool sent
      cutTool.registerCut(ce.cut_id, lastCutP0 ?? [0, 0], lastCutP1 ?? [0, 0]);
    }
    activeCut = ce.cut_id;
    cutWireTools.set(ce.cut_id, makeCutWireTool(ce.cut_id));
    refreshCutList();
    return;
  }
  if (scope !== undefined) {
    if (!cutStates.has(scope)) cutStates.set(scope, initialState());
    applyEvent(cutStates.get(scope)!, ev, scope);
    return;
  }
  applyEvent(state, ev);
  if (ev.type === 'slice') {
    sliceCache = null;
    costsCache = null;
    refreshNavigator(ev as SliceEvent);
    wireTool.reset();
  }
  if (ev.type === 'costs') costsCache = null;
  if (ev.type === 'error') {
    showStatus(`error: ${(ev as { message?: string }).message ?? 'unknown'}`);
  }
  if (ev.type === 'progress' && state.progress) {
    const { slice, total } = state.progress;
    ($('progress') as HTMLProgressElement).max = total;
    ($('progress') as HTMLProgressElement).value = slice;
    showStatus(`3D sweep: slice ${slice}/${total}`);
  }
  if (ev.type === 'mesh' && state.meshObj) {
    meshView.load(parseOBJ(state.meshObj));
  }
}

function makeCutWireTool(cutId: number): WireTool {
  const scoped = {
    send: (msg: Record<string, unknown>) => {
      if (msg.type === 'seed' || msg.type === 'cursor' ||
          msg.type === 'commit' || msg.type === 'close' || msg.type === 'heat') {
        return conn.send({ type: 'segment_cut', cut_id: cutId, op: msg.type,
                           x: msg.x, y: msg.y });
      }
      return conn.send(msg as { type: string });
    },
    close: () => {},
  };
  return new WireTool(scoped);
}

// ---------------------------------------------------------------------------
// rendering
// ---------------------------------------------------------------------------

let sliceCache: HTMLCanvasElement | null = null;
let costsCache: HTMLCanvasElement | null = null;

function imageCanvas(data: string, invert: boolean): HTMLCanvasElement {
  const img = decodeSlicePayload(data);
  const c = document.createElement('canvas');
  c.width = img.width;
  c.height = img.height;
  const ictx = c.getContext('2d')!;
  const rgba = new ImageData(toRGBA(img, invert), img.width, img.height);
  ictx.putImageData(rgba, 0, 0);
  return c;
}

function drawPolyline(target: CanvasRenderingContext2D, vp: Viewport,
                      pts: ArrayLike<number>[], color: string, width = 2): void {
  if (!pts.length) return;
  target.strokeStyle = color;
  target.lineWidth = width;
  target.beginPath();
  const [x0, y0] = imageToCanvas(vp, Number(pts[0][0]), Number(pts[0][1]));
  target.moveTo(x0, y0);
  for (let i = 1; i < pts.length; i++) {
    const [x, y] = imageToCanvas(vp, Number(pts[i][0]), Number(pts[i][1]));
    target.lineTo(x, y);
  }
  target.stroke();
}

function drawOverlays(target: CanvasRenderingContext2D, vp: Viewport,
                      s: OverlayState): void {
  for (const seg of s.committed) drawPolyline(target, vp, seg.points, '#49d17c');
  if (s.closedBoundary) drawPolyline(target, vp, [...s.closedBoundary, s.closedBoundary[0]], '#49d17c', 2.5);
  if (s.wire) drawPolyline(target, vp, s.wire.points, '#ffd23f');
  target.fillStyle = '#ff5d5d';
  for (const [sx, sy] of s.seeds) {
    const [x, y] = imageToCanvas(vp, sx, sy);
    target.beginPath();
    target.arc(x, y, 3, 0, 2 * Math.PI);
    target.fill();
  }
}

function render(): void {
  drain();
  ctx.fillStyle = '#181c22';
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  if (state.slice) {
    if (!sliceCache) sliceCache = imageCanvas(state.slice.data, false);
    ctx.imageSmoothingEnabled = false;
    ctx.drawImage(sliceCache, viewport.panX, viewport.panY,
                  state.slice.width * viewport.zoom, state.slice.height * viewport.zoom);
    if (showCosts && state.costsData) {
      if (!costsCache) costsCache = imageCanvas(state.costsData, true); // bright = low cost
      ctx.globalAlpha = 0.55;
      ctx.drawImage(costsCache, viewport.panX, viewport.panY,
                    state.slice.width * viewport.zoom, state.slice.height * viewport.zoom);
      ctx.globalAlpha = 1.0;
    }
    const contour = state.contours.get(state.slice.index);
    if (contour) drawPolyline(ctx, viewport, [...contour, contour[0]], '#58b6ff', 2.5);
    for (const cut of cutTool.cuts) {
      drawPolyline(ctx, viewport, [cut.p0, cut.p1], '#b98cff', 1.5);
    }
    ctx.strokeStyle = 'rgba(255,255,255,0.5)';
    for (const stroke of strokes) drawPolyline(ctx, viewport, stroke, 'rgba(255,160,80,0.45)', paintTool.brush * viewport.zoom);
    drawOverlays(ctx, viewport, state);
  }
  renderCutPanel();
  meshView.render();
  requestAnimationFrame(render);
}

function renderCutPanel(): void {
  cutCtx.fillStyle = '#181c22';
  cutCtx.fillRect(0, 0, cutCanvas.width, cutCanvas.height);
  if (activeCut === null) return;
  const s = cutStates.get(activeCut);
  const img = s?.cutImages.get(activeCut);
  if (!s || !img) return;
  const key = `cut:${activeCut}`;
  if (cutImageCacheKey !== key) {
    cutImageCache = imageCanvas(img.data, false);
    cutImageCacheKey = key;
    cutViewport = fit(img.width, img.height, cutCanvas.width, cutCanvas.height);
  }
  cutCtx.imageSmoothingEnabled = false;
  cutCtx.drawImage(cutImageCache!, cutViewport.panX, cutViewport.panY,
                   img.width * cutViewport.zoom, img.height * cutViewport.zoom);
  drawOverlays(cutCtx, cutViewport, s);
}

let cutImageCache: HTMLCanvasElement | null = null;
let cutImageCacheKey = '';

// ---------------------------------------------------------------------------
// navigator / side panel
// ---------------------------------------------------------------------------

function refreshNavigator(slice: SliceEvent): void {
  const nav = $('navigator');
  nav.innerHTML = '';
  for (let k = 0; k < slice.depth; k++) {
    const row = document.createElement('div');
    row.className = 'nav-row' + (k === slice.index ? ' active' : '') +
      (state.contours.has(k) ? ' segmented' : '');
    row.title = `slice ${k}`;
    row.addEventListener('click', () => conn.send({ type: 'select_slice', index: k }));
    nav.appendChild(row);
  }
}

function refreshCutList(): void {
  const list = $('cutlist');
  list.innerHTML = '';
  for (const cut of cutTool.cuts) {
    const el = document.createElement('button');
    el.textContent = `cut ${cut.id}`;
    el.className = activeCut === cut.id ? 'active' : '';
    el.addEventListener('click', () => {
      activeCut = cut.id;
      cutImageCacheKey = '';
      refreshCutList();
    });
    list.appendChild(el);
  }
}

function showStatus(text: string): void {
  $('status').textContent = text;
}

// ---------------------------------------------------------------------------
// input wiring
// ---------------------------------------------------------------------------

function canvasPos(e: MouseEvent): [number, number] {
  const r = canvas.getBoundingClientRect();
  return [e.clientX - r.left, e.clientY - r.top];
}

canvas.addEventListener('mousedown', (e) => {
  const [cx, cy] = canvasPos(e);
  const [x, y] = canvasToPixel(viewport, cx, cy);
  if (tool === 'pan' || e.button === 1) {
    panning = [cx, cy];
  } else if (tool === 'wire') {
    wireTool.click(x, y);
  } else if (tool === 'paint') {
    painting = true;
    strokes.push([[x, y]]);
    paintTool.strokeStart(x, y);
  } else if (tool === 'cut') {
    cutLatch(x, y);
  }
});

canvas.addEventListener('mousemove', (e) => {
  const [cx, cy] = canvasPos(e);
  if (panning) {
    viewport = pan(viewport, cx - panning[0], cy - panning[1]);
    panning = [cx, cy];
    return;
  }
  const [x, y] = canvasToPixel(viewport, cx, cy);
  if (tool === 'wire') {
    wireTool.move(x, y);
  } else if (tool === 'paint' && painting) {
    strokes[strokes.length - 1].push([x, y]);
    paintTool.strokeMove(x, y);
  }
});

window.addEventListener('mouseup', () => {
  panning = null;
  if (painting) {
    painting = false;
    paintTool.strokeEnd();
  }
});

canvas.addEventListener('dblclick', () => {
  if (tool === 'wire') wireTool.closeBoundary();
});

canvas.addEventListener('wheel', (e) => {
  e.preventDefault();
  const [cx, cy] = canvasPos(e);
  viewport = zoomAt(viewport, cx, cy, e.deltaY < 0 ? 1.25 : 0.8);
}, { passive: false });

window.addEventListener('keydown', (e) => {
  if (e.key === 'h' && tool === 'wire') wireTool.heat();
  if (e.key === 'Enter' && tool === 'wire') wireTool.closeBoundary();
});

let lastCutP0: [number, number] | null = null;
let lastCutP1: [number, number] | null = null;

function cutLatch(x: number, y: number): void {
  if (!cutTool.awaitingSecondPoint) lastCutP0 = [x, y];
  else lastCutP1 = [x, y];
  cutTool.click(x, y);
}

// cut panel wire interaction
cutCanvas.addEventListener('mousedown', (e) => {
  if (activeCut === null) return;
  const r = cutCanvas.getBoundingClientRect();
  const [x, y] = canvasToPixel(cutViewport, e.clientX - r.left, e.clientY - r.top);
  cutWireTools.get(activeCut)?.click(x, y);
});

cutCanvas.addEventListener('mousemove', (e) => {
  if (activeCut === null) return;
  const r = cutCanvas.getBoundingClientRect();
  const [x, y] = canvasToPixel(cutViewport, e.clientX - r.left, e.clientY - r.top);
  cutWireTools.get(activeCut)?.move(x, y);
});

cutCanvas.addEventListener('dblclick', () => {
  if (activeCut !== null) cutWireTools.get(activeCut)?.closeBoundary();
});

// tool strip + side panel controls
for (const name of ['wire', 'paint', 'cut', 'pan'] as ToolName[]) {
  $(`tool-${name}`).addEventListener('click', () => {
    tool = name;
    document.querySelectorAll('.tool').forEach((el) => el.classList.remove('active'));
    $(`tool-${name}`).classList.add('active');
  });
}

$('load').addEventListener('click', () => {
  const path = ($('volume-path') as HTMLInputElement).value;
  conn.send({ type: 'load', path });
});

$('brush').addEventListener('change', (e) => {
  paintTool.brush = parseInt((e.target as HTMLSelectElement).value, 10);
});

$('train').addEventListener('click', () => paintTool.train());
$('clear-paint').addEventListener('click', () => {
  strokes.length = 0;
  paintTool.clear();
});

$('view-costs').addEventListener('click', () => {
  showCosts = paintTool.toggleView();
  $('view-costs').classList.toggle('active', showCosts);
  if (!showCosts) tool = 'paint'; // depressing the button returns to painting
});

$('run3d').addEventListener('click', () => {
  const depth = state.slice?.depth ?? 1;
  const safety = parseFloat(($('safety') as HTMLInputElement).value);
  cutTool.runSegmentation(0, depth - 1, safety);
});

$('get-mesh').addEventListener('click', () => {
  conn.send({ type: 'get_mesh', samples: 64 });
});

$('heat').addEventListener('click', () => wireTool.heat());

conn.onOpen(() => {
  showStatus('connected');
  const path = ($('volume-path') as HTMLInputElement).value;
  if (path) conn.send({ type: 'load', path });
});

function resize(): void {
  canvas.width = canvas.clientWidth;
  canvas.height = canvas.clientHeight;
  cutCanvas.width = cutCanvas.clientWidth;
  cutCanvas.height = cutCanvas.clientHeight;
  if (state.slice) {
    viewport = fit(state.slice.width, state.slice.height, canvas.width, canvas.height);
  }
}
window.addEventListener('resize', resize);
resize();
requestAnimationFrame(render);
