// Tool state machines: mouse events in image pixel coordinates go in,
// protocol messages come out through the injected channel.

import type { Channel } from './connection.js';
import { Throttle } from './connection.js';

export type ToolName = 'wire' | 'paint' | 'cut' | 'pan';

export class WireTool {
  private throttle: Throttle;
  hasSeed = false;

  constructor(private channel: Channel, maxCursorRate = 60, now?: () => number) {
    this.throttle = new Throttle(maxCursorRate, now);
  }

  click(x: number, y: number): void {
    if (!this.hasSeed) {
      this.channel.send({ type: 'seed', x, y });
      this.hasSeed = true;
    } else {
      this.channel.send({ type: 'commit' });
    }
  }

  move(x: number, y: number): void {
    if (this.hasSeed && this.throttle.ready()) {
      this.channel.send({ type: 'cursor', x, y });
    }
  }

  closeBoundary(): void {
    if (this.hasSeed) {
      this.channel.send({ type: 'close' });
      this.hasSeed = false;
    }
  }

  heat(): void {
    this.channel.send({ type: 'heat' });
  }

  reset(): void {
    this.hasSeed = false;
  }
}

export class PaintTool {
  brush = 3;
  private stroke: [number, number][] = [];
  viewingCosts = false;

  constructor(private channel: Channel) {}

  strokeStart(x: number, y: number): void {
    this.stroke = [[x, y]];
  }

  strokeMove(x: number, y: number): void {
    if (this.stroke.length) this.stroke.push([x, y]);
  }

  strokeEnd(): void {
    if (this.stroke.length) {
      this.channel.send({ type: 'paint', points: this.stroke, brush: this.brush });
      this.stroke = [];
    }
  }

  clear(): void {
    this.channel.send({ type: 'clear_paint' });
  }

  train(): void {
    this.channel.send({ type: 'train' });
  }

  /** The depressible View button: toggles the cost overlay. */
  toggleView(): boolean {
    this.viewingCosts = !this.viewingCosts;
    if (this.viewingCosts) this.channel.send({ type: 'view_costs' });
    return this.viewingCosts;
  }
}

export class CutTool {
  private pending: [number, number] | null = null;
  cuts: { id: number; p0: [number, number]; p1: [number, number] }[] = [];

  constructor(private channel: Channel) {}

  click(x: number, y: number): void {
    if (this.pending === null) {
      this.pending = [x, y];
      this.channel.send({ type: 'cut_begin', x, y });
    } else {
      this.channel.send({ type: 'cut_end', x, y });
      this.pending = null;
    }
  }

  get awaitingSecondPoint(): boolean {
    return this.pending !== null;
  }

  registerCut(id: number, p0: [number, number], p1: [number, number]): void {
    this.cuts.push({ id, p0, p1 });
  }

  runSegmentation(first: number, last: number, safety: number): void {
    this.channel.send({
      type: 'segment3d',
      segments: [{ first, last, cuts: this.cuts.map((c) => c.id) }],
      options: { safety_factor: safety },
    });
  }
}
