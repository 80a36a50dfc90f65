// Dependency-free rotating mesh viewport: orthographic projection with a
// painter-sorted flat shade onto a 2D canvas.

import { meshBounds, ObjMesh } from './objparse.js';

export class MeshView {
  angle = 0;
  tilt = -0.5;
  spinning = true;
  private mesh: ObjMesh | null = null;
  private center: [number, number, number] = [0, 0, 0];
  private radius = 1;

  constructor(private canvas: HTMLCanvasElement) {
    canvas.addEventListener('click', () => {
      this.spinning = !this.spinning;
    });
  }

  load(mesh: ObjMesh): void {
    this.mesh = mesh;
    const b = meshBounds(mesh);
    this.center = b.center;
    this.radius = b.radius;
  }

  project(x: number, y: number, z: number): [number, number, number] {
    const [cx, cy, cz] = this.center;
    const ca = Math.cos(this.angle);
    const sa = Math.sin(this.angle);
    const ct = Math.cos(this.tilt);
    const st = Math.sin(this.tilt);
    const dx = x - cx;
    const dy = y - cy;
    const dz = z - cz;
    const rx = ca * dx + sa * dz;
    const rz = -sa * dx + ca * dz;
    const ry = ct * dy - st * rz;
    const depth = st * dy + ct * rz;
    const s = Math.min(this.canvas.width, this.canvas.height) / (3 * this.radius);
    return [
      this.canvas.width / 2 + rx * s,
      this.canvas.height / 2 + ry * s,
      depth,
    ];
  }

  render(): void {
    const ctx = this.canvas.getContext('2d');
    if (!ctx) return;
    ctx.fillStyle = '#101318';
    ctx.fillRect(0, 0, this.canvas.width, this.canvas.height);
    if (!this.mesh) return;
    if (this.spinning) this.angle += 0.01;

    const v = this.mesh.vertices;
    const t = this.mesh.triangles;
    const projected: [number, number, number][] = [];
    for (let i = 0; i < v.length; i += 3) {
      projected.push(this.project(v[i], v[i + 1], v[i + 2]));
    }
    const order: { depth: number; i: number }[] = [];
    for (let i = 0; i < t.length; i += 3) {
      const d = (projected[t[i]][2] + projected[t[i + 1]][2] + projected[t[i + 2]][2]) / 3;
      order.push({ depth: d, i });
    }
    order.sort((a, b) => a.depth - b.depth);
    for (const { i } of order) {
      const a = projected[t[i]];
      const b = projected[t[i + 1]];
      const c = projected[t[i + 2]];
      const nz = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
      const shade = Math.round(120 + 100 * Math.min(Math.abs(nz) / 400, 1));
      ctx.fillStyle = `rgb(${shade * 0.4}, ${shade * 0.75}, ${shade})`;
      ctx.strokeStyle = 'rgba(8, 12, 16, 0.6)';
      ctx.beginPath();
      ctx.moveTo(a[0], a[1]);
      ctx.lineTo(b[0], b[1]);
      ctx.lineTo(c[0], c[1]);
      ctx.closePath();
      ctx.fill();
      ctx.stroke();
    }
  }
}
