// Wire protocol: JSON text frames, client seq strictly increasing, replies
// echo the seq they answer.

export type Point = [number, number];

export interface ClientMessage {
  type: string;
  seq?: number;
  [key: string]: unknown;
}

export interface SliceEvent {
  type: 'slice';
  seq: number;
  index: number;
  width: number;
  height: number;
  depth: number;
  spacing: number;
  data: string; // base64 P5 PGM
}

export interface WireEvent {
  type: 'wire';
  seq: number;
  points: Point[];
  cut_id?: number;
}

export interface AutoSeedEvent {
  type: 'auto_seed';
  x: number;
  y: number;
  cut_id?: number;
}

export interface SegmentCommittedEvent {
  type: 'segment_committed';
  seq: number;
  points: Point[];
  cut_id?: number;
}

export interface BoundaryClosedEvent {
  type: 'boundary_closed';
  seq: number;
  points: Point[];
  cut_id?: number;
}

export interface CostsEvent {
  type: 'costs';
  seq: number;
  data: string;
}

export interface CutImageEvent {
  type: 'cut_image';
  seq: number;
  cut_id: number;
  width: number;
  height: number;
  data: string;
}

export interface ProgressEvent {
  type: 'progress';
  slice: number;
  total: number;
}

export interface ContoursEvent {
  type: 'contours';
  seq: number;
  spacing: number;
  segments: [number, number][];
  slices: { index: number; contour: Point[] }[];
}

export interface MeshEvent {
  type: 'mesh';
  seq: number;
  obj_text: string;
}

export interface AckEvent {
  type: 'ack';
  seq: number;
  cut_id?: number;
}

export interface ErrorEvent {
  type: 'error';
  seq: number;
  code: string;
  message: string;
}

export type ServerEvent =
  | SliceEvent
  | WireEvent
  | AutoSeedEvent
  | SegmentCommittedEvent
  | BoundaryClosedEvent
  | CostsEvent
  | CutImageEvent
  | ProgressEvent
  | ContoursEvent
  | MeshEvent
  | AckEvent
  | ErrorEvent;

export function parseServerEvent(raw: string): ServerEvent {
  const msg = JSON.parse(raw);
  if (typeof msg !== 'object' || msg === null || typeof msg.type !== 'string') {
    throw new Error('malformed server event');
  }
  return msg as ServerEvent;
}
