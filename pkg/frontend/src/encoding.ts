/** Grayscale encoding map: the query's distance vector on the neuron
 * grid, lighter = closer (mirrors the server's PNG rendering). */

import { Canvas2D } from "./extrude.js";

export function paintEncoding(ctx: Canvas2D, encoding: number[],
                              rows: number, cols: number,
                              width: number, height: number): void {
  ctx.clearRect(0, 0, width, height);
  const peak = Math.max(...encoding);
  const cw = width / cols;
  const ch = height / rows;
  for (let j = 0; j < encoding.length; j++) {
    const light = peak > 0 ? 1 - encoding[j] / peak : 0;
    const v = Math.round(light * 255);
    ctx.fillStyle = `rgb(${v},${v},${v})`;
    const r = Math.floor(j / cols);
    const c = j % cols;
    ctx.beginPath();
    ctx.moveTo(c * cw, r * ch);
    ctx.lineTo((c + 1) * cw, r * ch);
    ctx.lineTo((c + 1) * cw, (r + 1) * ch);
    ctx.lineTo(c * cw, (r + 1) * ch);
    ctx.closePath();
    ctx.fill();
  }
}
