"""Interactive session service: one WebSocket connection = one session.

JSON text frames both ways.  Client messages carry a strictly increasing
``seq``; replies and engine events echo the seq they answer.  Cursor floods
are coalesced by the engine's request buffer, so the last cursor always gets
a wire reply even if intermediate ones are skipped.  All outgoing frames for
a connection flow through one queue, preserving event order.
"""

from __future__ import annotations

import asyncio
import base64
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cost_model import CostWeights, static_cost, train_mapping
from .engine import (
    BoundaryEvent,
    CoolingState,
    EngineRequest,
    EventKind,
    LiveWireSession,
    RequestKind,
)
from .image_ops import CutLine, build_orthogonal_cut
from .pipeline3d import CutBoundary, StripParams, TopologySegment, TopologyViolation
from .pipeline3d import UnreachableSeedError, segment_volume
from .replay import paint_training_samples
from .volume_io import contours_from_json, contours_to_json, load_volume, pgm_bytes

MAX_MESSAGE_BYTES = 1 << 20


@dataclass
class OptionsState:
    w_g: float = 0.5
    w_l: float = 0.5
    w_d: float = 0.0
    w_s: float = 0.0
    cooling_enabled: bool = False
    freeze_after: float = 1500.0
    heating_enabled: bool = False
    heat_period: float = 1000.0
    safety_factor: float = 1.5
    brush_sizes: tuple = (1, 3, 5, 9)
    samples: int = 64
    arc_window_frac: float | None = None

    def weights(self) -> CostWeights:
        return CostWeights(self.w_g, self.w_l, self.w_d, self.w_s)


def _b64_pgm(img) -> str:
    return base64.b64encode(pgm_bytes(img)).decode("ascii")


class Session:
    """Per-connection state: volume, per-slice engine, paint, cuts, results."""

    def __init__(self, send, root: Path):
        import threading

        self._send = send  # enqueue an outgoing dict
        self._cancel = threading.Event()
        self.root = Path(root).resolve()
        self.options = OptionsState()
        self.volume = None
        self.slice_index = 0
        self.field = None
        self.engine: LiveWireSession | None = None
        self.paint_mask = None
        self.mapping = None
        self.cuts: dict[int, dict] = {}
        self._next_cut_id = 1
        self._pending_cut_start = None
        self.contours = None
        self._loop = asyncio.get_running_loop()

    # -- engine plumbing -----------------------------------------------------

    def _bridge(self, scope: dict):
        def cb(ev: BoundaryEvent):
            msg = self._event_to_msg(ev, scope)
            if msg is not None:
                self._loop.call_soon_threadsafe(self._send, msg)
        return cb

    @staticmethod
    def _event_to_msg(ev: BoundaryEvent, scope: dict):
        def pts(poly):
            return [[int(x), int(y)] for x, y in poly]

        if ev.kind is EventKind.WIRE_UPDATED:
            return {"type": "wire", "seq": ev.seq, "points": pts(ev.polyline), **scope}
        if ev.kind is EventKind.SEGMENT_COMMITTED:
            return {"type": "segment_committed", "seq": ev.seq,
                    "points": pts(ev.polyline), **scope}
        if ev.kind is EventKind.AUTO_SEED:
            return {"type": "auto_seed", "x": int(ev.point[0]), "y": int(ev.point[1]),
                    **scope}
        if ev.kind is EventKind.BOUNDARY_CLOSED:
            return {"type": "boundary_closed", "seq": ev.seq,
                    "points": pts(ev.polyline), **scope}
        if ev.kind is EventKind.SEARCH_COMPLETE:
            return {"type": "ack", "seq": ev.seq, **scope}
        if ev.kind is EventKind.ERROR:
            return {"type": "error", "seq": ev.seq, "code": "engine",
                    "message": ev.message, **scope}
        return None

    def _make_engine(self, fld, scope: dict) -> LiveWireSession:
        cooling = CoolingState(self.options.freeze_after) if self.options.cooling_enabled else None
        heat_period = self.options.heat_period if self.options.heating_enabled else None
        session = LiveWireSession(fld, self.options.weights(), cooling=cooling,
                                  auto_heat_period=heat_period)
        session.subscribe(self._bridge(scope))
        return session

    def _slice_engine(self) -> LiveWireSession:
        if self.volume is None:
            raise ValueError("no volume loaded")
        if self.field is None:
            self.field = static_cost(self.volume.voxels[self.slice_index],
                                     self.options.weights(), self.mapping)
        if self.engine is None:
            self.engine = self._make_engine(self.field, {})
        return self.engine

    def _reset_slice_state(self):
        if self.engine is not None:
            self.engine.close(join=False)
        self.engine = None
        self.field = None

    def close(self):
        self._cancel.set()  # aborts any in-flight 3D sweep
        self._reset_slice_state()
        for cut in self.cuts.values():
            if cut.get("engine") is not None:
                cut["engine"].close(join=False)

    # -- message handlers ----------------------------------------------------

    async def handle(self, msg: dict):
        seq = int(msg.get("seq", -1))
        mtype = msg.get("type")
        handler = getattr(self, f"_on_{mtype}", None)
        if handler is None:
            self._send({"type": "error", "seq": seq, "code": "unknown_type",
                        "message": f"unknown message type {mtype!r}"})
            return
        try:
            result = handler(msg, seq)
            if asyncio.iscoroutine(result):
                await result
        except (ValueError, KeyError, OSError, TopologyViolation,
                UnreachableSeedError) as e:
            self._send({"type": "error", "seq": seq, "code": type(e).__name__,
                        "message": str(e)})

    def _slice_msg(self, seq: int) -> dict:
        img = self.volume.voxels[self.slice_index]
        return {
            "type": "slice", "seq": seq, "index": self.slice_index,
            "width": self.volume.width, "height": self.volume.height,
            "depth": self.volume.depth, "spacing": self.volume.spacing,
            "data": _b64_pgm(img),
        }

    def _on_load(self, msg, seq):
        path = (self.root / msg["path"]).resolve()
        if self.root != Path("/") and self.root not in path.parents and path != self.root:
            raise ValueError("path escapes the service root")
        self.volume = load_volume(path)
        self.slice_index = 0
        self._reset_slice_state()
        self.paint_mask = np.zeros((self.volume.height, self.volume.width), dtype=bool)
        self.contours = None
        self._send(self._slice_msg(seq))

    def _on_select_slice(self, msg, seq):
        if self.volume is None:
            raise ValueError("no volume loaded")
        index = int(msg["index"])
        if not 0 <= index < self.volume.depth:
            raise ValueError(f"slice index {index} out of range")
        self.slice_index = index
        self._reset_slice_state()
        self._send(self._slice_msg(seq))

    def _on_seed(self, msg, seq):
        self._slice_engine().submit(EngineRequest(RequestKind.SET_SEED, seq,
                                                  (int(msg["x"]), int(msg["y"]))))

    def _on_cursor(self, msg, seq):
        self._slice_engine().submit(EngineRequest(RequestKind.SET_TARGET, seq,
                                                  (int(msg["x"]), int(msg["y"]))))

    def _on_commit(self, msg, seq):
        self._slice_engine().submit(EngineRequest(RequestKind.COMMIT, seq))

    def _on_close(self, msg, seq):
        self._slice_engine().submit(EngineRequest(RequestKind.CLOSE, seq))

    def _on_heat(self, msg, seq):
        self._slice_engine().submit(EngineRequest(RequestKind.HEAT_STEP, seq))

    def _on_paint(self, msg, seq):
        if self.paint_mask is None:
            raise ValueError("no volume loaded")
        brush = int(msg.get("brush", 3))
        if brush < 1:
            raise ValueError("brush width must be >= 1")
        r = brush / 2.0
        h, w = self.paint_mask.shape
        for x, y in msg["points"]:
            x0, x1 = max(int(x - r), 0), min(int(x + r) + 1, w)
            y0, y1 = max(int(y - r), 0), min(int(y + r) + 1, h)
            for yy in range(y0, y1):
                for xx in range(x0, x1):
                    if (xx - x) ** 2 + (yy - y) ** 2 <= r * r:
                        self.paint_mask[yy, xx] = True
        self._send({"type": "ack", "seq": seq})

    def _on_clear_paint(self, msg, seq):
        if self.paint_mask is not None:
            self.paint_mask[:] = False
        self._send({"type": "ack", "seq": seq})

    def _costs_msg(self, seq) -> dict:
        if self.field is None:
            self.field = static_cost(self.volume.voxels[self.slice_index],
                                     self.options.weights(), self.mapping)
        img = np.clip(self.field.cost, 0, 255).astype(np.uint8)
        return {"type": "costs", "seq": seq, "data": _b64_pgm(img)}

    def _on_train(self, msg, seq):
        if self.volume is None:
            raise ValueError("no volume loaded")
        base = static_cost(self.volume.voxels[self.slice_index], self.options.weights())
        samples = paint_training_samples(base, self.paint_mask)
        self.mapping = train_mapping(samples)  # raises on too few samples
        self._reset_slice_state()
        self._send(self._costs_msg(seq))

    def _on_view_costs(self, msg, seq):
        if self.volume is None:
            raise ValueError("no volume loaded")
        self._send(self._costs_msg(seq))

    def _on_cut_begin(self, msg, seq):
        self._pending_cut_start = (float(msg["x"]), float(msg["y"]))
        self._send({"type": "ack", "seq": seq})

    def _on_cut_end(self, msg, seq):
        if self.volume is None:
            raise ValueError("no volume loaded")
        if self._pending_cut_start is None:
            raise ValueError("cut_end without cut_begin")
        line = CutLine(self._pending_cut_start, (float(msg["x"]), float(msg["y"])))
        self._pending_cut_start = None
        img = build_orthogonal_cut(self.volume, line)
        cut_id = self._next_cut_id
        self._next_cut_id += 1
        fld = static_cost(img, self.options.weights(), self.mapping) \
            if img.shape[0] >= 3 and img.shape[1] >= 3 else None
        self.cuts[cut_id] = {"line": line, "image": img, "field": fld,
                             "engine": None, "boundary": None}
        self._send({"type": "cut_image", "seq": seq, "cut_id": cut_id,
                    "width": img.shape[1], "height": img.shape[0],
                    "data": _b64_pgm(img)})

    def _on_segment_cut(self, msg, seq):
        cut = self.cuts.get(int(msg["cut_id"]))
        if cut is None:
            raise ValueError(f"unknown cut id {msg['cut_id']}")
        if cut["field"] is None:
            raise ValueError("cut image too small to segment")
        if cut["engine"] is None:
            scope = {"cut_id": int(msg["cut_id"])}
            cut["engine"] = self._make_engine(cut["field"], scope)
            cut["engine"].subscribe(self._capture_cut_boundary(int(msg["cut_id"])))
        op = msg.get("op")
        kinds = {"seed": RequestKind.SET_SEED, "cursor": RequestKind.SET_TARGET,
                 "commit": RequestKind.COMMIT, "close": RequestKind.CLOSE,
                 "heat": RequestKind.HEAT_STEP}
        if op not in kinds:
            raise ValueError(f"unknown cut op {op!r}")
        point = None
        if op in ("seed", "cursor"):
            point = (int(msg["x"]), int(msg["y"]))
        cut["engine"].submit(EngineRequest(kinds[op], seq, point))

    def _capture_cut_boundary(self, cut_id: int):
        def cb(ev: BoundaryEvent):
            if ev.kind is EventKind.BOUNDARY_CLOSED:
                self.cuts[cut_id]["boundary"] = np.asarray(ev.polyline)
        return cb

    async def _on_segment3d(self, msg, seq):
        if self.volume is None:
            raise ValueError("no volume loaded")
        segments = []
        for seg in msg["segments"]:
            cbs = []
            for cut_id in seg["cuts"]:
                cut = self.cuts.get(int(cut_id))
                if cut is None:
                    raise ValueError(f"unknown cut id {cut_id}")
                if cut["boundary"] is None:
                    raise ValueError(f"cut {cut_id} has no segmented boundary yet")
                poly = cut["boundary"]
                if len(poly) > 1 and tuple(poly[0]) == tuple(poly[-1]):
                    poly = poly[:-1]
                cbs.append(CutBoundary(cut["line"], poly))
            segments.append(TopologySegment(int(seg["first"]), int(seg["last"]), cbs))
        opts = msg.get("options", {})
        safety = float(opts.get("safety_factor", self.options.safety_factor))

        def progress(done, total):
            self._loop.call_soon_threadsafe(
                self._send, {"type": "progress", "slice": done, "total": total})

        volume = self.volume
        weights = self.options.weights()
        mapping = self.mapping
        cancel = self._cancel

        def job():
            return segment_volume(volume, segments, weights, mapping,
                                  StripParams(safety), progress=progress,
                                  cancel=cancel)

        self.contours = await self._loop.run_in_executor(None, job)
        doc = json.loads(contours_to_json(self.contours))
        self._send({"type": "contours", "seq": seq, **doc})

    def _on_set_options(self, msg, seq):
        known = set(OptionsState.__dataclass_fields__)
        for k, v in msg.items():
            if k in ("type", "seq"):
                continue
            if k not in known:
                raise ValueError(f"unknown option {k!r}")
            setattr(self.options, k, v)
        self._reset_slice_state()
        self._send({"type": "ack", "seq": seq})

    def _on_get_mesh(self, msg, seq):
        from . import mesh as mesh_mod

        if self.contours is None:
            raise ValueError("no contours: run segment3d first")
        m = int(msg.get("samples", self.options.samples))
        result = mesh_mod.reconstruct(self.contours, m, self.options.arc_window_frac)
        frac = self.options.arc_window_frac or 2.0 / m
        obj = mesh_mod.to_obj(result, m=m, arc_window=frac)
        self._send({"type": "mesh", "seq": seq, "obj_text": obj})

    def load_contours_doc(self, doc: dict):
        self.contours = contours_from_json(json.dumps(doc))


async def _handle_connection(ws, root: Path):
    outgoing: asyncio.Queue = asyncio.Queue()
    session = Session(outgoing.put_nowait, root)

    async def sender():
        while True:
            msg = await outgoing.get()
            await ws.send(json.dumps(msg))

    send_task = asyncio.create_task(sender())
    try:
        async for raw in ws:
            try:
                msg = json.loads(raw)
                if not isinstance(msg, dict):
                    raise ValueError("message must be a JSON object")
            except (json.JSONDecodeError, ValueError) as e:
                outgoing.put_nowait({"type": "error", "seq": -1, "code": "bad_json",
                                     "message": str(e)})
                continue
            await session.handle(msg)
    finally:
        send_task.cancel()
        try:
            await send_task
        except asyncio.CancelledError:
            pass
        session.close()


async def serve(host: str = "127.0.0.1", port: int = 8765, root: str = ".",
                ready: asyncio.Event | None = None):
    """Run the session service until cancelled."""
    import websockets.asyncio.server as ws_server

    root_path = Path(root)

    async def handler(ws):
        await _handle_connection(ws, root_path)

    async with ws_server.serve(handler, host, port, max_size=MAX_MESSAGE_BYTES):
        if ready is not None:
            ready.set()
        await asyncio.Future()
