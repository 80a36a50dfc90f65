// Decode the base64 P5 PGM payloads the service ships slices and cost maps in.

export interface GrayImage {
  width: number;
  height: number;
  pixels: Uint8Array;
}

export function decodeBase64(data: string): Uint8Array {
  const bin = atob(data);
  const out = new Uint8Array(bin.length);
  for (let i = 0; i < bin.length; i++) out[i] = bin.charCodeAt(i);
  return out;
}

export function decodePGM(bytes: Uint8Array): GrayImage {
  // header: "P5\n<w> <h>\n<maxval>\n" then raw bytes
  let pos = 0;
  const token = () => {
    while (pos < bytes.length && isSpace(bytes[pos])) pos++;
    const start = pos;
    while (pos < bytes.length && !isSpace(bytes[pos])) pos++;
    return String.fromCharCode(...bytes.subarray(start, pos));
  };
  if (token() !== 'P5') throw new Error('expected binary PGM');
  const width = parseInt(token(), 10);
  const height = parseInt(token(), 10);
  const maxval = parseInt(token(), 10);
  if (!(width > 0 && height > 0) || maxval > 255) throw new Error('bad PGM header');
  pos++; // single whitespace after maxval
  const pixels = bytes.subarray(pos, pos + width * height);
  if (pixels.length !== width * height) throw new Error('truncated PGM data');
  return { width, height, pixels: new Uint8Array(pixels) };
}

export function decodeSlicePayload(data: string): GrayImage {
  return decodePGM(decodeBase64(data));
}

function isSpace(b: number): boolean {
  return b === 0x20 || b === 0x09 || b === 0x0a || b === 0x0d;
}

/** Grayscale (optionally inverted) RGBA buffer for putImageData. */
export function toRGBA(img: GrayImage, invert = false,
                       alpha = 255): Uint8ClampedArray<ArrayBuffer> {
  const out = new Uint8ClampedArray(img.width * img.height * 4);
  for (let i = 0; i < img.pixels.length; i++) {
    const v = invert ? 255 - img.pixels[i] : img.pixels[i];
    out[4 * i] = v;
    out[4 * i + 1] = v;
    out[4 * i + 2] = v;
    out[4 * i + 3] = alpha;
  }
  return out;
}
