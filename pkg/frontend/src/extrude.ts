/** 2.5D extruded-footprint scenes: pure geometry here, canvas painting in
 * the caller. Buildings render as a top face plus side walls, painter-
 * sorted so nearer (lower on canvas) blocks draw last. */

import { BlockDetail } from "./api.js";

export interface ScenePolygon {
  points: [number, number][];
  fill: string;
  stroke: string | null;
}

const WALL_DARKEN = 0.72;

export function heightColor(h: number, hMax: number): [number, number, number] {
  const t = hMax > 0 ? Math.min(Math.max(h / hMax, 0), 1) : 0;
  return [
    Math.round(224 - 160 * t),
    Math.round(232 - 140 * t),
    Math.round(240 - 80 * t),
  ];
}

function rgb(c: [number, number, number], scale = 1): string {
  const [r, g, b] = c.map((v) => Math.round(v * scale));
  return `rgb(${r},${g},${b})`;
}

export function buildScene(detail: BlockDetail, width: number, height: number): ScenePolygon[] {
  const outer = detail.boundary.outer;
  const xs = outer.map((p) => p[0]);
  const ys = outer.map((p) => p[1]);
  const x0 = Math.min(...xs);
  const x1 = Math.max(...xs);
  const y0 = Math.min(...ys);
  const y1 = Math.max(...ys);
  const span = Math.max(x1 - x0, y1 - y0, 1e-9);

  const hMax = Math.max(1, ...detail.buildings.map((b) => b.height));
  const lift = 0.22 * Math.min(width, height); // screen px for the tallest building
  const pad = 0.08 * span;
  const scale = (Math.min(width, height) - 2) / (span + 2 * pad);

  const px = (x: number): number => (x - x0 + pad) * scale + 1;
  const py = (y: number): number => height - (y - y0 + pad) * scale - lift * 0.5;
  const top = (p: [number, number], h: number): [number, number] =>
    [px(p[0]), py(p[1]) - (h / hMax) * lift];

  const polys: ScenePolygon[] = [];
  const ground = (ring: [number, number][]): [number, number][] =>
    ring.map((p) => [px(p[0]), py(p[1])]);

  polys.push({ points: ground(outer), fill: "#f1ede4", stroke: "#777777" });
  for (const hole of detail.boundary.holes) {
    polys.push({ points: ground(hole), fill: "#ffffff", stroke: "#999999" });
  }

  // farther (higher on canvas) buildings first
  const ordered = [...detail.buildings].sort((a, b) => {
    const ya = Math.min(...a.footprint.outer.map((p) => py(p[1])));
    const yb = Math.min(...b.footprint.outer.map((p) => py(p[1])));
    return ya - yb;
  });

  for (const b of ordered) {
    const color = heightColor(b.height, hMax);
    const ring = b.footprint.outer;
    for (let i = 0; i < ring.length; i++) {
      const a = ring[i];
      const c = ring[(i + 1) % ring.length];
      polys.push({
        points: [
          [px(a[0]), py(a[1])],
          [px(c[0]), py(c[1])],
          top(c, b.height),
          top(a, b.height),
        ],
        fill: rgb(color, WALL_DARKEN),
        stroke: null,
      });
    }
    polys.push({
      points: ring.map((p) => top(p, b.height)),
      fill: rgb(color),
      stroke: "#44484f",
    });
  }
  return polys;
}

export interface Canvas2D {
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  closePath(): void;
  fill(): void;
  stroke(): void;
  clearRect(x: number, y: number, w: number, h: number): void;
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
}

export function paintScene(ctx: Canvas2D, polys: ScenePolygon[],
                           width: number, height: number): void {
  ctx.clearRect(0, 0, width, height);
  ctx.lineWidth = 0.8;
  for (const poly of polys) {
    ctx.beginPath();
    poly.points.forEach(([x, y], i) => (i === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y)));
    ctx.closePath();
    ctx.fillStyle = poly.fill;
    ctx.fill();
    if (poly.stroke) {
      ctx.strokeStyle = poly.stroke;
      ctx.stroke();
    }
  }
}
