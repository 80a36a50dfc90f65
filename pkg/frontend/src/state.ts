// Overlay state and the server-event reducer.
//
// The client never computes costs or paths: every wire pixel shown comes
// from a server event. Application is idempotent and ordered by seq, so
// replaying a recorded event log reproduces the identical overlay state and
// a stale wire (lower seq than the one displayed) can never win.

import type { Point, ServerEvent } from './protocol.js';

export interface SliceInfo {
  index: number;
  width: number;
  height: number;
  depth: number;
  spacing: number;
  data: string;
}

export interface OverlayState {
  slice: SliceInfo | null;
  wire: { seq: number; points: Point[] } | null;
  committed: { seq: number; points: Point[] }[];
  seeds: Point[];
  closedBoundary: Point[] | null;
  costsData: string | null;
  cutImages: Map<number, { width: number; height: number; data: string }>;
  contours: Map<number, Point[]>;
  meshObj: string | null;
  progress: { slice: number; total: number } | null;
  errors: { seq: number; code: string; message: string }[];
  seenSeqs: Set<string>;
}

export function initialState(): OverlayState {
  return {
    slice: null,
    wire: null,
    committed: [],
    seeds: [],
    closedBoundary: null,
    costsData: null,
    cutImages: new Map(),
    contours: new Map(),
    meshObj: null,
    progress: null,
    errors: [],
    seenSeqs: new Set(),
  };
}

function once(state: OverlayState, key: string): boolean {
  if (state.seenSeqs.has(key)) return false;
  state.seenSeqs.add(key);
  return true;
}

/** Apply one server event; events for cut scopes are filtered by cutId. */
export function applyEvent(
  state: OverlayState,
  ev: ServerEvent,
  cutId?: number,
): OverlayState {
  const scope = (ev as { cut_id?: number }).cut_id;
  if ((scope ?? undefined) !== cutId && ev.type !== 'cut_image') {
    return state; // belongs to another scope
  }
  switch (ev.type) {
    case 'slice':
      if (once(state, `slice:${ev.seq}:${ev.index}`)) {
        state.slice = {
          index: ev.index,
          width: ev.width,
          height: ev.height,
          depth: ev.depth,
          spacing: ev.spacing,
          data: ev.data,
        };
        // a new slice clears per-slice overlays
        state.wire = null;
        state.committed = [];
        state.seeds = [];
        state.closedBoundary = null;
        state.costsData = null;
      }
      break;
    case 'wire':
      if (state.closedBoundary === null &&
          (state.wire === null || ev.seq >= state.wire.seq)) {
        state.wire = { seq: ev.seq, points: ev.points };
      }
      break;
    case 'segment_committed':
      if (once(state, `committed:${ev.seq}`)) {
        state.committed.push({ seq: ev.seq, points: ev.points });
        const last = ev.points[ev.points.length - 1];
        state.seeds.push(last);
      }
      break;
    case 'auto_seed':
      if (once(state, `auto:${ev.x},${ev.y}`)) {
        state.seeds.push([ev.x, ev.y]);
      }
      break;
    case 'boundary_closed':
      if (once(state, `closed:${ev.seq}`)) {
        state.closedBoundary = ev.points;
        state.wire = null;
      }
      break;
    case 'costs':
      state.costsData = ev.data;
      break;
    case 'cut_image':
      state.cutImages.set(ev.cut_id, {
        width: ev.width,
        height: ev.height,
        data: ev.data,
      });
      break;
    case 'progress':
      state.progress = { slice: ev.slice, total: ev.total };
      break;
    case 'contours':
      state.contours = new Map(ev.slices.map((s) => [s.index, s.contour]));
      break;
    case 'mesh':
      state.meshObj = ev.obj_text;
      break;
    case 'error':
      if (once(state, `error:${ev.seq}:${ev.code}`)) {
        state.errors.push({ seq: ev.seq, code: ev.code, message: ev.message });
      }
      break;
    case 'ack':
      break;
  }
  return state;
}

export function replay(events: ServerEvent[], cutId?: number): OverlayState {
  const state = initialState();
  for (const ev of events) applyEvent(state, ev, cutId);
  return state;
}

/** Stable serialization for replay-equality checks and debugging. */
export function snapshot(state: OverlayState): string {
  return JSON.stringify({
    slice: state.slice,
    wire: state.wire,
    committed: state.committed,
    seeds: state.seeds,
    closed: state.closedBoundary,
    costs: state.costsData,
    cuts: [...state.cutImages.entries()].sort((a, b) => a[0] - b[0]),
    contours: [...state.contours.entries()].sort((a, b) => a[0] - b[0]),
    mesh: state.meshObj,
    progress: state.progress,
    errors: state.errors,
  });
}
