// Minimal Wavefront OBJ reader for the mesh payloads (v + triangular f only).

export interface ObjMesh {
  vertices: Float64Array; // xyz triples
  triangles: Uint32Array; // zero-based index triples
}

export function parseOBJ(text: string): ObjMesh {
  const verts: number[] = [];
  const tris: number[] = [];
  for (const line of text.split('\n')) {
    const parts = line.trim().split(/\s+/);
    if (parts[0] === 'v') {
      verts.push(parseFloat(parts[1]), parseFloat(parts[2]), parseFloat(parts[3]));
    } else if (parts[0] === 'f') {
      if (parts.length !== 4) throw new Error('mesh faces must be triangles');
      for (let i = 1; i <= 3; i++) {
        tris.push(parseInt(parts[i].split('/')[0], 10) - 1);
      }
    }
  }
  const mesh = {
    vertices: new Float64Array(verts),
    triangles: new Uint32Array(tris),
  };
  const n = mesh.vertices.length / 3;
  for (const idx of mesh.triangles) {
    if (idx >= n) throw new Error(`face index ${idx + 1} out of range`);
  }
  return mesh;
}

export function meshBounds(mesh: ObjMesh): { center: [number, number, number]; radius: number } {
  const lo = [Infinity, Infinity, Infinity];
  const hi = [-Infinity, -Infinity, -Infinity];
  for (let i = 0; i < mesh.vertices.length; i += 3) {
    for (let a = 0; a < 3; a++) {
      lo[a] = Math.min(lo[a], mesh.vertices[i + a]);
      hi[a] = Math.max(hi[a], mesh.vertices[i + a]);
    }
  }
  const center: [number, number, number] = [
    (lo[0] + hi[0]) / 2,
    (lo[1] + hi[1]) / 2,
    (lo[2] + hi[2]) / 2,
  ];
  const radius = Math.max(hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]) / 2 || 1;
  return { center, radius };
}
