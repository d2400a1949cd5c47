export interface Scale {
  toPixel(v: number): number;
  ticks(): number[];
  domain: [number, number];
}

export function linearScale(lo: number, hi: number, p0: number, p1: number): Scale {
  if (!(hi > lo)) {
    hi = lo + 1;
  }
  const span = hi - lo;
  return {
    domain: [lo, hi],
    toPixel: (v) => p0 + ((v - lo) / span) * (p1 - p0),
    ticks: () => {
      const step = niceStep(span / 5);
      const first = Math.ceil(lo / step) * step;
      const out: number[] = [];
      for (let v = first; v <= hi + 1e-12 * span; v += step) {
        out.push(Math.abs(v) < 1e-12 * span ? 0 : v);
      }
      return out;
    },
  };
}

export function logScale(lo: number, hi: number, p0: number, p1: number): Scale {
  if (!(lo > 0)) {
    throw new Error("log scale needs positive data");
  }
  const la = Math.log10(lo);
  const lb = Math.log10(hi > lo ? hi : lo * 10);
  return {
    domain: [lo, hi],
    toPixel: (v) => p0 + ((Math.log10(v) - la) / (lb - la)) * (p1 - p0),
    ticks: () => {
      const out: number[] = [];
      for (let e = Math.ceil(la); e <= Math.floor(lb); e++) {
        out.push(10 ** e);
      }
      if (out.length === 0) {
        out.push(10 ** la, 10 ** lb);
      }
      return out;
    },
  };
}

function niceStep(raw: number): number {
  const mag = 10 ** Math.floor(Math.log10(raw));
  const r = raw / mag;
  if (r < 1.5) return mag;
  if (r < 3.5) return 2 * mag;
  if (r < 7.5) return 5 * mag;
  return 10 * mag;
}

export function formatTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) {
    return v.toExponential(0).replace("e", "E");
  }
  const s = v.toPrecision(3);
  return s.includes(".") ? s.replace(/\.?0+$/, "") : s;
}
