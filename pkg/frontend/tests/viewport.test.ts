import { describe, expect, it } from 'vitest';

import {
  canvasToImage,
  canvasToPixel,
  fit,
  imageToCanvas,
  makeViewport,
  pan,
  zoomAt,
} from '../src/viewport.js';

describe('viewport transforms', () => {
  it('round-trips image coordinates within half a pixel at every zoom', () => {
    for (const zoom of [0.25, 0.5, 1, 2, 3.7, 8, 16, 64]) {
      const v = makeViewport(zoom, 13.4, -7.2);
      for (const [x, y] of [[0, 0], [5, 9], [63, 63], [17, 42]]) {
        const [cx, cy] = imageToCanvas(v, x, y);
        const [bx, by] = canvasToImage(v, cx, cy);
        expect(Math.abs(bx - x)).toBeLessThanOrEqual(0.5);
        expect(Math.abs(by - y)).toBeLessThanOrEqual(0.5);
        expect(canvasToPixel(v, cx, cy)).toEqual([x, y]);
      }
    }
  });

  it('canvasToPixel snaps anywhere inside the pixel cell', () => {
    const v = makeViewport(10, 0, 0);
    // all canvas positions within 0.49 px (image units) of center map back
    for (const dx of [-0.49, 0, 0.49]) {
      for (const dy of [-0.49, 0, 0.49]) {
        const [cx, cy] = imageToCanvas(v, 7 + dx, 11 + dy);
        expect(canvasToPixel(v, cx, cy)).toEqual([7, 11]);
      }
    }
  });

  it('zoomAt keeps the anchor pixel fixed', () => {
    let v = makeViewport(2, 5, 5);
    const anchorImage = canvasToImage(v, 100, 80);
    v = zoomAt(v, 100, 80, 2.0);
    const after = canvasToImage(v, 100, 80);
    expect(after[0]).toBeCloseTo(anchorImage[0], 9);
    expect(after[1]).toBeCloseTo(anchorImage[1], 9);
    expect(v.zoom).toBe(4);
  });

  it('zoom is clamped to a sane range', () => {
    let v = makeViewport(1);
    for (let i = 0; i < 40; i++) v = zoomAt(v, 0, 0, 2);
    expect(v.zoom).toBeLessThanOrEqual(64);
    for (let i = 0; i < 80; i++) v = zoomAt(v, 0, 0, 0.5);
    expect(v.zoom).toBeGreaterThanOrEqual(0.25);
  });

  it('pan shifts canvas coordinates only', () => {
    const v = pan(makeViewport(3, 10, 10), 5, -2);
    expect(imageToCanvas(v, 0, 0)).toEqual([15, 8]);
    expect(v.zoom).toBe(3);
  });

  it('fit centers the image inside the canvas', () => {
    const v = fit(64, 64, 640, 480);
    const [x0, y0] = imageToCanvas(v, 0, 0);
    const [x1, y1] = imageToCanvas(v, 64, 64);
    expect(x0).toBeCloseTo(640 - x1, 6);
    expect(y0).toBeCloseTo(480 - y1, 6);
    expect(x1 - x0).toBeLessThanOrEqual(640);
  });
});
