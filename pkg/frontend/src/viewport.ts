// Zoom/pan mapping between image pixel coordinates and canvas coordinates.
// Pixel centers are integers in image space; the transform is exact so
// overlays land within half a pixel at any zoom.

export interface Viewport {
  zoom: number;
  panX: number; // canvas position of image pixel (0, 0)
  panY: number;
}

export function makeViewport(zoom = 1, panX = 0, panY = 0): Viewport {
  return { zoom, panX, panY };
}

export function imageToCanvas(v: Viewport, x: number, y: number): [number, number] {
  return [v.panX + x * v.zoom, v.panY + y * v.zoom];
}

export function canvasToImage(v: Viewport, cx: number, cy: number): [number, number] {
  return [(cx - v.panX) / v.zoom, (cy - v.panY) / v.zoom];
}

export function canvasToPixel(v: Viewport, cx: number, cy: number): [number, number] {
  const [x, y] = canvasToImage(v, cx, cy);
  return [Math.round(x), Math.round(y)];
}

/** Zoom about a fixed canvas point so the pixel under the cursor stays put. */
export function zoomAt(v: Viewport, cx: number, cy: number, factor: number): Viewport {
  const zoom = Math.min(Math.max(v.zoom * factor, 0.25), 64);
  const scale = zoom / v.zoom;
  return {
    zoom,
    panX: cx - (cx - v.panX) * scale,
    panY: cy - (cy - v.panY) * scale,
  };
}

export function pan(v: Viewport, dx: number, dy: number): Viewport {
  return { zoom: v.zoom, panX: v.panX + dx, panY: v.panY + dy };
}

/** Fit an image into a canvas with a small margin, centered. */
export function fit(width: number, height: number, cw: number, ch: number): Viewport {
  const zoom = Math.max(Math.min((cw - 16) / width, (ch - 16) / height), 0.25);
  return {
    zoom,
    panX: (cw - width * zoom) / 2,
    panY: (ch - height * zoom) / 2,
  };
}
