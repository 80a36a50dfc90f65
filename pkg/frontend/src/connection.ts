// WebSocket session wrapper: assigns the strictly increasing seq, parses
// server events, and hands them to a listener in arrival order.

import { ClientMessage, parseServerEvent, ServerEvent } from './protocol.js';

export type EventListener = (ev: ServerEvent) => void;

export interface Channel {
  send(msg: ClientMessage): number;
  close(): void;
}

export class Connection implements Channel {
  private ws: WebSocket;
  private seq = 0;
  private listeners: EventListener[] = [];
  log: ServerEvent[] = []; // replayable event log

  constructor(url: string) {
    this.ws = new WebSocket(url);
    this.ws.addEventListener('message', (e) => {
      const ev = parseServerEvent(String(e.data));
      this.log.push(ev);
      for (const fn of this.listeners) fn(ev);
    });
  }

  onEvent(fn: EventListener): void {
    this.listeners.push(fn);
  }

  onOpen(fn: () => void): void {
    this.ws.addEventListener('open', fn);
  }

  send(msg: ClientMessage): number {
    msg.seq = ++this.seq;
    this.ws.send(JSON.stringify(msg));
    return msg.seq;
  }

  close(): void {
    this.ws.close();
  }
}

/** Rate limiter for cursor messages: at most maxPerSecond sends. */
export class Throttle {
  private last = -Infinity;
  private readonly interval: number;

  constructor(maxPerSecond: number, private now: () => number = () => performance.now()) {
    this.interval = 1000 / maxPerSecond;
  }

  ready(): boolean {
    const t = this.now();
    if (t - this.last >= this.interval) {
      this.last = t;
      return true;
    }
    return false;
  }
}
