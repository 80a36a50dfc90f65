"""Interactive 2D boundary engine.

``compute_path_tree`` / ``reconstruct`` are the synchronous core: a
single-source shortest-path tree over the 8-connected pixel graph and the
walk-back of one optimal path.  ``LiveWireSession`` wraps them in a worker
thread with a request buffer so a rush of cursor updates never blocks the
caller: targets are coalesced to the newest, seeds and commits are processed
exactly once in order, and results are delivered through subscriber
callbacks as :class:`BoundaryEvent`.
"""

from __future__ import annotations

import threading
import time
from collections import deque
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import kernels
from .cost_model import (
    DIR_DX,
    DIR_DY,
    CostWeights,
    HeatOverlay,
    StaticCostField,
)

UNREACHED = kernels.INF


class EngineError(RuntimeError):
    pass


@dataclass
class PathTree:
    """Dijkstra result: per-pixel cumulative cost and incoming direction."""

    seed: tuple
    cum_cost: np.ndarray
    pred_dir: np.ndarray
    finalized: np.ndarray
    n_finalized: int

    def reached(self, x: int, y: int) -> bool:
        return bool(self.finalized[y, x])


def compute_path_tree(field: StaticCostField, seed, search_mask=None, stop_at=None,
                      weights: CostWeights | None = None,
                      heat: HeatOverlay | None = None) -> PathTree:
    """Shortest-path tree from ``seed`` over the masked 8-connected grid.

    ``stop_at`` lets the search finish once that pixel is finalized; every
    finalized pixel's cumulative cost is globally minimal either way.
    """
    weights = weights or CostWeights()
    h, w = field.shape
    sx, sy = int(seed[0]), int(seed[1])
    if not (0 <= sx < w and 0 <= sy < h):
        raise EngineError(f"seed ({sx}, {sy}) outside image {w}x{h}")
    if search_mask is None:
        mask = np.ones((h, w), dtype=bool)
    else:
        mask = np.asarray(search_mask, dtype=bool)
        if mask.shape != (h, w):
            raise EngineError("search mask dimensions must match the cost field")
        if not mask[sy, sx]:
            raise EngineError(f"seed ({sx}, {sy}) outside the search mask")
    if stop_at is None:
        tx = ty = -1
    else:
        tx, ty = int(stop_at[0]), int(stop_at[1])
    if heat is not None and heat.level > 0:
        heated = heat.mask((h, w))
        factor = heat.factor
    else:
        heated = np.zeros((h, w), dtype=bool)
        factor = 1.0
    pen = np.asarray(weights.turn_penalties, dtype=np.float64)
    cum, pred, final, n = kernels.dijkstra_grid(
        np.ascontiguousarray(field.cost, dtype=np.int32),
        np.ascontiguousarray(field.grad_bin, dtype=np.uint8),
        mask, heated, float(factor),
        float(weights.w_d), pen, float(weights.w_s),
        sx, sy, tx, ty,
    )
    return PathTree((sx, sy), cum, pred, final, int(n))


def reconstruct(tree: PathTree, target) -> np.ndarray:
    """Path seed -> target as an (N, 2) array of (x, y), following stored directions."""
    tx, ty = int(target[0]), int(target[1])
    h, w = tree.cum_cost.shape
    if not (0 <= tx < w and 0 <= ty < h) or not tree.finalized[ty, tx]:
        raise EngineError(f"target ({tx}, {ty}) not finalized in the path tree")
    pts = [(tx, ty)]
    x, y = tx, ty
    limit = h * w
    while (x, y) != tree.seed:
        d = int(tree.pred_dir[y, x])
        if d < 0:
            raise EngineError("broken predecessor chain")
        x -= int(DIR_DX[d])
        y -= int(DIR_DY[d])
        pts.append((x, y))
        if len(pts) > limit:
            raise EngineError("predecessor cycle detected")
    pts.reverse()
    return np.asarray(pts, dtype=np.int64)


# ---------------------------------------------------------------------------
# Cooling
# ---------------------------------------------------------------------------

@dataclass
class CoolingState:
    """Tracks how long the leading part of the wire has stayed unchanged."""

    freeze_after: float = 1500.0
    last_wire: np.ndarray | None = None
    stable_prefix_len: int = 0
    stable_since: float = 0.0

    def reset(self) -> None:
        self.last_wire = None
        self.stable_prefix_len = 0
        self.stable_since = 0.0


def _common_prefix_len(a: np.ndarray, b: np.ndarray) -> int:
    n = min(len(a), len(b))
    if n == 0:
        return 0
    neq = np.nonzero((a[:n] != b[:n]).any(axis=1))[0]
    return int(neq[0]) if neq.size else n


def cooling_tick(state: CoolingState, current_wire, now):
    """Advance cooling; returns the frozen prefix's end pixel or None.

    The prefix common to every wire seen since ``stable_since`` freezes once
    it is at least 2 pixels long and ``freeze_after`` old; the caller commits
    the prefix and reseeds there.  A 1-pixel prefix (just the seed) never
    freezes.
    """
    wire = np.asarray(current_wire)
    if state.last_wire is None:
        state.last_wire = wire
        state.stable_prefix_len = len(wire)
        state.stable_since = now
        return None
    c = _common_prefix_len(wire, state.last_wire)
    if c < state.stable_prefix_len:
        # the surviving shorter prefix has been stable at least as long
        state.stable_prefix_len = c
    state.last_wire = wire
    if state.stable_prefix_len >= 2 and now - state.stable_since >= state.freeze_after:
        p = state.stable_prefix_len
        seed = (int(wire[p - 1][0]), int(wire[p - 1][1]))
        state.last_wire = None
        state.stable_prefix_len = 0
        return seed
    return None


# ---------------------------------------------------------------------------
# Session
# ---------------------------------------------------------------------------

class RequestKind(Enum):
    SET_SEED = "set_seed"
    SET_TARGET = "set_target"
    COMMIT = "commit"
    CLOSE = "close"
    HEAT_STEP = "heat_step"
    CANCEL = "cancel"


class EventKind(Enum):
    WIRE_UPDATED = "wire_updated"
    SEGMENT_COMMITTED = "segment_committed"
    AUTO_SEED = "auto_seed"
    BOUNDARY_CLOSED = "boundary_closed"
    SEARCH_COMPLETE = "search_complete"
    ERROR = "error"


@dataclass
class EngineRequest:
    kind: RequestKind
    seq: int
    point: tuple | None = None


@dataclass
class BoundaryEvent:
    kind: EventKind
    seq: int = -1
    polyline: np.ndarray | None = None
    point: tuple | None = None
    message: str = ""


@dataclass
class Boundary:
    """Committed wire segments chained end-to-start; closed when the loop is shut."""

    segments: list = field(default_factory=list)
    closed: bool = False

    def append(self, polyline: np.ndarray) -> None:
        if self.segments:
            last = self.segments[-1][-1]
            if tuple(last) != tuple(polyline[0]):
                raise EngineError("segment does not chain onto the boundary")
        self.segments.append(np.asarray(polyline))

    @property
    def first_point(self):
        return tuple(self.segments[0][0]) if self.segments else None

    @property
    def last_point(self):
        return tuple(self.segments[-1][-1]) if self.segments else None

    def full_polyline(self) -> np.ndarray:
        if not self.segments:
            return np.zeros((0, 2), dtype=np.int64)
        parts = [self.segments[0]]
        for seg in self.segments[1:]:
            parts.append(seg[1:])
        return np.concatenate(parts)

    def contour(self) -> np.ndarray:
        """Closed boundary as a polygon without the duplicated end point."""
        poly = self.full_polyline()
        if self.closed and len(poly) > 1 and tuple(poly[0]) == tuple(poly[-1]):
            poly = poly[:-1]
        return poly


class LiveWireSession:
    """One interactive segmentation over one cost field.

    Requests are submitted from any thread; a dedicated worker drains the
    buffer, skipping every stale target when newer ones queued up.  Events go
    to subscriber callbacks on the worker thread, tagged with the sequence
    number of the request they answer.
    """

    def __init__(self, field: StaticCostField, weights: CostWeights | None = None,
                 search_mask=None, cooling: CoolingState | None = None,
                 clock=None, auto_heat_period: float | None = None):
        self.field = field
        self.weights = weights or CostWeights()
        self.search_mask = search_mask
        self.cooling = cooling
        self.heat = HeatOverlay()
        self.boundary = Boundary()
        self.clock = clock or (lambda: time.monotonic() * 1000.0)
        self.auto_heat_period = auto_heat_period
        self._subs = []
        self._queue: deque[EngineRequest] = deque()
        self._cv = threading.Condition()
        self._alive = True
        self._tree: PathTree | None = None
        self._seed = None
        self._target = None
        self._wire: np.ndarray | None = None
        self._last_heat = self.clock()
        self._worker = threading.Thread(target=self._run, daemon=True)
        self._worker.start()

    # -- public interface --------------------------------------------------

    def subscribe(self, callback) -> None:
        self._subs.append(callback)

    def submit(self, req: EngineRequest) -> None:
        with self._cv:
            if not self._alive:
                raise EngineError("session closed")
            self._queue.append(req)
            self._cv.notify()

    def close(self, join: bool = True) -> None:
        with self._cv:
            self._alive = False
            self._cv.notify()
        if join:
            self._worker.join(timeout=10.0)

    def drain(self, timeout: float = 10.0) -> None:
        """Block until every submitted request has been processed (test hook)."""
        deadline = time.monotonic() + timeout
        while time.monotonic() < deadline:
            with self._cv:
                if not self._queue and not self._busy:
                    return
            time.sleep(0.001)
        raise TimeoutError("session did not drain")

    # -- worker ------------------------------------------------------------

    _busy = False

    def _emit(self, event: BoundaryEvent) -> None:
        for cb in self._subs:
            cb(event)

    def _run(self) -> None:
        while True:
            with self._cv:
                timeout = None
                if self.cooling is not None or self.auto_heat_period is not None:
                    timeout = 0.05
                while self._alive and not self._queue:
                    if not self._cv.wait(timeout=timeout):
                        break  # timer tick
                if not self._alive:
                    return
                req = self._pop_coalesced()
                self._busy = req is not None
            try:
                if req is not None:
                    self._handle(req)
                else:
                    self._timer_tick()
            except Exception as e:  # engine errors become events, session survives
                self._emit(BoundaryEvent(EventKind.ERROR, seq=req.seq if req else -1,
                                         message=str(e)))
            finally:
                with self._cv:
                    self._busy = False

    def _pop_coalesced(self) -> EngineRequest | None:
        if not self._queue:
            return None
        req = self._queue.popleft()
        if req.kind is RequestKind.SET_TARGET:
            # skip stale targets: answer only the newest of a run
            while self._queue and self._queue[0].kind is RequestKind.SET_TARGET:
                req = self._queue.popleft()
        return req

    def _handle(self, req: EngineRequest) -> None:
        k = req.kind
        if k is RequestKind.SET_SEED:
            self._set_seed(req.point, req.seq)
        elif k is RequestKind.SET_TARGET:
            self._set_target(req.point, req.seq)
        elif k is RequestKind.COMMIT:
            self._commit(req.seq)
        elif k is RequestKind.CLOSE:
            self._close_boundary(req.seq)
        elif k is RequestKind.HEAT_STEP:
            self._heat_step(req.seq)
        elif k is RequestKind.CANCEL:
            self._cancel()

    def _recompute(self, seq: int) -> None:
        self._tree = compute_path_tree(self.field, self._seed, self.search_mask,
                                       weights=self.weights, heat=self.heat)
        self._emit(BoundaryEvent(EventKind.SEARCH_COMPLETE, seq=seq))

    def _set_seed(self, point, seq: int, reset_heat: bool = True) -> None:
        x, y = int(point[0]), int(point[1])
        self._seed = (x, y)
        self._target = None
        self._wire = None
        if reset_heat:
            self.heat.reset()
        if self.cooling is not None:
            self.cooling.reset()
        self._recompute(seq)

    def _set_target(self, point, seq: int) -> None:
        if self._tree is None:
            raise EngineError("no seed set")
        wire = reconstruct(self._tree, point)
        self._target = (int(point[0]), int(point[1]))
        self._wire = wire
        self._emit(BoundaryEvent(EventKind.WIRE_UPDATED, seq=seq, polyline=wire))
        self._cooling_check(seq)

    def _cooling_check(self, seq: int) -> None:
        if self.cooling is None or self._wire is None:
            return
        auto = cooling_tick(self.cooling, self._wire, self.clock())
        if auto is None:
            return
        prefix_len = int(np.nonzero((self._wire == np.asarray(auto)).all(axis=1))[0][0]) + 1
        prefix = self._wire[:prefix_len]
        self.boundary.append(prefix)
        self._emit(BoundaryEvent(EventKind.SEGMENT_COMMITTED, seq=seq, polyline=prefix))
        self._emit(BoundaryEvent(EventKind.AUTO_SEED, seq=seq, point=auto))
        target = self._target
        self._set_seed(auto, seq)
        if target is not None:
            self._set_target(target, seq)

    def _commit(self, seq: int) -> None:
        if self._wire is None:
            raise EngineError("nothing to commit: no current wire")
        self.boundary.append(self._wire)
        self._emit(BoundaryEvent(EventKind.SEGMENT_COMMITTED, seq=seq, polyline=self._wire))
        self._set_seed(self._target, seq)

    def _close_boundary(self, seq: int) -> None:
        if not self.boundary.segments:
            raise EngineError("cannot close: no committed segments")
        first = self.boundary.first_point
        if self._tree is None:
            raise EngineError("no seed set")
        wire = reconstruct(self._tree, first)
        self.boundary.append(wire)
        self.boundary.closed = True
        self._wire = None
        self._target = None
        self._emit(BoundaryEvent(EventKind.BOUNDARY_CLOSED, seq=seq,
                                 polyline=self.boundary.full_polyline()))

    def _heat_step(self, seq: int) -> None:
        if self._wire is None:
            raise EngineError("no current wire to heat")
        self.heat.step(self._wire)
        self._last_heat = self.clock()
        self._tree = compute_path_tree(self.field, self._seed, self.search_mask,
                                       weights=self.weights, heat=self.heat)
        wire = reconstruct(self._tree, self._target)
        self._wire = wire
        self._emit(BoundaryEvent(EventKind.WIRE_UPDATED, seq=seq, polyline=wire))

    def _cancel(self) -> None:
        with self._cv:
            self._queue.clear()
        self._target = None
        self._wire = None

    def _timer_tick(self) -> None:
        if self._wire is None:
            return
        self._cooling_check(-1)
        if self.auto_heat_period is not None and self._wire is not None:
            if self.clock() - self._last_heat >= self.auto_heat_period:
                self._heat_step(-1)
