/** One slider per indicator of the active metric set; ranges come from
 * the corpus min/max the API reports. */

import { SetInfo } from "./api.js";
import { RawNode, at, rawNumber } from "./rawjson.js";

const STEPS = 1000;

export class SliderPanel {
  private info: SetInfo | null = null;
  private inputs = new Map<string, HTMLInputElement>();
  private labels = new Map<string, HTMLElement>();

  constructor(
    private readonly root: HTMLElement,
    private readonly onEdit: () => void,
  ) {}

  get setName(): string | null {
    return this.info?.name ?? null;
  }

  setSet(info: SetInfo): void {
    this.info = info;
    this.root.textContent = "";
    this.inputs.clear();
    this.labels.clear();
    for (const name of info.indicators) {
      const [lo, hi] = info.norm_params[name];
      const row = document.createElement("div");
      row.className = "slider-row";

      const label = document.createElement("label");
      label.textContent = name;
      label.htmlFor = `slider-${name}`;

      const input = document.createElement("input");
      input.type = "range";
      input.id = `slider-${name}`;
      input.min = String(lo);
      input.max = String(hi);
      input.step = String((hi - lo) / STEPS);
      input.value = String((lo + hi) / 2);
      input.addEventListener("input", () => {
        this.showValue(name, input.value);
        this.onEdit();
      });

      const value = document.createElement("span");
      value.className = "slider-value";
      value.textContent = input.value;

      row.append(label, input, value);
      this.root.append(row);
      this.inputs.set(name, input);
      this.labels.set(name, value);
    }
  }

  private showValue(name: string, text: string): void {
    const label = this.labels.get(name);
    if (label) label.textContent = text;
  }

  /** Fill sliders from a block's metric record, displaying the API's raw
   * number tokens verbatim. */
  loadFromMetrics(metricsRaw: RawNode): void {
    if (!this.info) return;
    for (const name of this.info.indicators) {
      const node = at(metricsRaw, name);
      if (node === undefined || node.kind !== "number") continue;
      const input = this.inputs.get(name);
      if (!input) continue;
      input.value = String(node.value);
      this.showValue(name, rawNumber(node));
    }
  }

  values(): Record<string, number> {
    const out: Record<string, number> = {};
    for (const [name, input] of this.inputs) out[name] = Number(input.value);
    return out;
  }
}
