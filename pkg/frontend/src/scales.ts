/** Linear and log10 axis scales with deterministic tick generation. */

export interface Scale {
  (x: number): number;
  ticks(): number[];
  domain: [number, number];
  range: [number, number];
  isLog: boolean;
}

export function linearScale(domain: [number, number],
                            range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 || 1;
  const f = ((x: number) => r0 + ((x - d0) / span) * (r1 - r0)) as Scale;
  f.ticks = () => linearTicks(d0, d1, 5);
  f.domain = domain;
  f.range = range;
  f.isLog = false;
  return f;
}

export function logScale(domain: [number, number],
                         range: [number, number]): Scale {
  const [d0, d1] = domain;
  if (d0 <= 0 || d1 <= 0) throw new Error("log scale needs positive domain");
  const l0 = Math.log10(d0);
  const l1 = Math.log10(d1);
  const span = l1 - l0 || 1;
  const [r0, r1] = range;
  const f = ((x: number) =>
    r0 + ((Math.log10(x) - l0) / span) * (r1 - r0)) as Scale;
  f.ticks = () => {
    const ticks: number[] = [];
    for (let e = Math.ceil(l0 - 1e-9); e <= Math.floor(l1 + 1e-9); e++) {
      ticks.push(Math.pow(10, e));
    }
    return ticks.length >= 2 ? ticks : [d0, d1];
  };
  f.domain = domain;
  f.range = range;
  f.isLog = true;
  return f;
}

function linearTicks(lo: number, hi: number, count: number): number[] {
  if (lo === hi) return [lo];
  const rawStep = (hi - lo) / count;
  const mag = Math.pow(10, Math.floor(Math.log10(rawStep)));
  const norm = rawStep / mag;
  const step = (norm >= 5 ? 5 : norm >= 2 ? 2 : 1) * mag;
  const start = Math.ceil(lo / step) * step;
  const ticks: number[] = [];
  for (let v = start; v <= hi + step * 1e-9; v += step) {
    ticks.push(Number(v.toPrecision(12)));
  }
  return ticks;
}

export function extent(values: number[], padFrac = 0.05): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (!Number.isFinite(lo)) throw new Error("empty extent");
  if (lo === hi) return [lo - 1, hi + 1];
  const pad = (hi - lo) * padFrac;
  return [lo - pad, hi + pad];
}
