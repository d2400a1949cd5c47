import { GLYPH_H, GLYPH_W, glyph } from "./font.js";

export type Color = [number, number, number, number?];

/** Plain RGBA pixel canvas with line/rect/text primitives. */
export class Raster {
  readonly width: number;
  readonly height: number;
  readonly pixels: Uint8Array;

  constructor(width: number, height: number, background: Color = [255, 255, 255]) {
    this.width = width;
    this.height = height;
    this.pixels = new Uint8Array(width * height * 4);
    for (let i = 0; i < width * height; i++) {
      this.pixels[i * 4] = background[0];
      this.pixels[i * 4 + 1] = background[1];
      this.pixels[i * 4 + 2] = background[2];
      this.pixels[i * 4 + 3] = 255;
    }
  }

  set(x: number, y: number, color: Color): void {
    x = Math.round(x);
    y = Math.round(y);
    if (x < 0 || y < 0 || x >= this.width || y >= this.height) return;
    const i = (y * this.width + x) * 4;
    const a = (color[3] ?? 255) / 255;
    this.pixels[i] = Math.round(color[0] * a + this.pixels[i] * (1 - a));
    this.pixels[i + 1] = Math.round(color[1] * a + this.pixels[i + 1] * (1 - a));
    this.pixels[i + 2] = Math.round(color[2] * a + this.pixels[i + 2] * (1 - a));
    this.pixels[i + 3] = 255;
  }

  line(x0: number, y0: number, x1: number, y1: number, color: Color, width = 1): void {
    const dx = x1 - x0;
    const dy = y1 - y0;
    const steps = Math.max(Math.abs(dx), Math.abs(dy), 1);
    for (let s = 0; s <= steps; s++) {
      const x = x0 + (dx * s) / steps;
      const y = y0 + (dy * s) / steps;
      this.set(x, y, color);
      if (width > 1) {
        for (let o = 1; o <= Math.floor(width / 2); o++) {
          if (Math.abs(dx) >= Math.abs(dy)) {
            this.set(x, y - o, color);
            this.set(x, y + o, color);
          } else {
            this.set(x - o, y, color);
            this.set(x + o, y, color);
          }
        }
      }
    }
  }

  rect(x0: number, y0: number, w: number, h: number, color: Color): void {
    for (let y = y0; y < y0 + h; y++) {
      for (let x = x0; x < x0 + w; x++) {
        this.set(x, y, color);
      }
    }
  }

  text(x: number, y: number, s: string, color: Color, scale = 1): void {
    let cx = x;
    for (const ch of s) {
      const g = glyph(ch);
      for (let r = 0; r < GLYPH_H; r++) {
        for (let c = 0; c < GLYPH_W; c++) {
          if ((g[r] >> (GLYPH_W - 1 - c)) & 1) {
            this.rect(cx + c * scale, y + r * scale, scale, scale, color);
          }
        }
      }
      cx += (GLYPH_W + 1) * scale;
    }
  }

  textWidth(s: string, scale = 1): number {
    return s.length * (GLYPH_W + 1) * scale;
  }

  /** Vertical text (rotated 90 degrees counterclockwise). */
  textV(x: number, y: number, s: string, color: Color, scale = 1): void {
    let cy = y;
    for (const ch of s) {
      const g = glyph(ch);
      for (let r = 0; r < GLYPH_H; r++) {
        for (let c = 0; c < GLYPH_W; c++) {
          if ((g[r] >> (GLYPH_W - 1 - c)) & 1) {
            this.rect(x + r * scale, cy - c * scale, scale, scale, color);
          }
        }
      }
      cy -= (GLYPH_W + 1) * scale;
    }
  }
}

export const PALETTE: Color[] = [
  [31, 119, 180],
  [214, 39, 40],
  [44, 160, 44],
  [255, 127, 14],
  [148, 103, 189],
  [140, 86, 75],
  [23, 190, 207],
  [127, 127, 127],
];

/** Yellow-hot colormap for |rho| heatmaps. */
export function heatColor(v: number): Color {
  const t = Math.min(Math.max(v, 0), 1);
  const r = Math.min(1, 3 * t);
  const g = Math.min(1, Math.max(0, 3 * t - 1));
  const b = Math.min(1, Math.max(0, 3 * t - 2));
  return [Math.round(255 * r), Math.round(255 * g), Math.round(255 * b)];
}
