/** The trained neuron grid: weight colors from the API, hatching for
 * empty neurons, hover sample lists, and a brightness overlay for the
 * live query's encoding (brightest cell = BMU). */

import { SomGrid } from "./api.js";

export class SomGridView {
  private cellEls: HTMLElement[] = [];
  private grid: SomGrid | null = null;

  constructor(private readonly root: HTMLElement) {}

  render(grid: SomGrid): void {
    this.grid = grid;
    this.root.textContent = "";
    this.root.style.display = "grid";
    this.root.style.gridTemplateColumns = `repeat(${grid.cols}, 1fr)`;
    this.cellEls = [];
    const byIndex = [...grid.cells].sort((a, b) => a.index - b.index);
    for (const cell of byIndex) {
      const el = document.createElement("div");
      el.className = cell.empty ? "som-cell empty" : "som-cell";
      if (!cell.empty) {
        const [r, g, b] = cell.rgb;
        el.style.backgroundColor = `rgb(${r},${g},${b})`;
      }
      el.title = cell.empty
        ? `neuron ${cell.index}: no samples`
        : `neuron ${cell.index}: ${cell.samples.join(", ")}`;
      const overlay = document.createElement("div");
      overlay.className = "som-overlay";
      overlay.style.opacity = "0";
      el.append(overlay);
      this.root.append(el);
      this.cellEls.push(el);
    }
  }

  /** Overlay opacity per neuron from the query's encoding distances:
   * nearest neuron glows brightest. Presentation only; no numbers shown. */
  overlay(encoding: number[]): void {
    if (!this.grid || encoding.length !== this.cellEls.length) return;
    const peak = Math.max(...encoding);
    for (let j = 0; j < encoding.length; j++) {
      const light = peak > 0 ? 1 - encoding[j] / peak : 0;
      const el = this.cellEls[j].querySelector<HTMLElement>(".som-overlay");
      if (el) el.style.opacity = String(0.85 * light);
    }
  }

  clearOverlay(): void {
    for (const cell of this.cellEls) {
      const el = cell.querySelector<HTMLElement>(".som-overlay");
      if (el) el.style.opacity = "0";
    }
  }
}
