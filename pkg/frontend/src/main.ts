/** Explorer wiring: set picker, sliders, debounced single-flight
 * retrieval, result gallery, encoding map, and the SOM grid. */

import { ApiClient, ApiError, SetInfo } from "./api.js";
import { Canvas2D } from "./extrude.js";
import { paintEncoding } from "./encoding.js";
import { ResultGallery } from "./gallery.js";
import { SingleFlight } from "./inflight.js";
import { at, rawNumber } from "./rawjson.js";
import { SliderPanel } from "./sliders.js";
import { SomGridView } from "./somgrid.js";

const DEBOUNCE_MS = 250;
const K = 5;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

export class ExplorerApp {
  private readonly api: ApiClient;
  private readonly flight = new SingleFlight(DEBOUNCE_MS);
  private sets: SetInfo[] = [];
  private sliders!: SliderPanel;
  private gallery!: ResultGallery;
  private somView!: SomGridView;
  private somShape: { rows: number; cols: number } | null = null;

  constructor(base = "") {
    this.api = new ApiClient(base);
  }

  async start(): Promise<void> {
    this.sliders = new SliderPanel(el("sliders"), () => this.queueRetrieve());
    this.gallery = new ResultGallery(el("gallery"), this.api,
                                     (id) => void this.loadBlock(id));
    this.somView = new SomGridView(el("som-grid"));

    this.sets = (await this.api.getSets()).data;
    const select = el<HTMLSelectElement>("set-select");
    select.textContent = "";
    for (const s of this.sets) {
      const opt = document.createElement("option");
      opt.value = s.name;
      opt.textContent = s.name;
      select.append(opt);
    }
    select.addEventListener("change", () => void this.switchSet(select.value));

    el<HTMLButtonElement>("load-block").addEventListener("click", () => {
      const id = el<HTMLInputElement>("block-input").value.trim();
      if (id) void this.loadBlock(id);
    });

    await this.switchSet(this.sets[0]?.name ?? "");
  }

  private info(name: string): SetInfo | undefined {
    return this.sets.find((s) => s.name === name);
  }

  private async switchSet(name: string): Promise<void> {
    const info = this.info(name);
    if (!info) return;
    this.flight.cancel();
    this.sliders.setSet(info);
    this.gallery.clear("move a slider or load a block to retrieve");
    this.clearError();
    try {
      const som = (await this.api.getSom(name)).data;
      this.somShape = { rows: som.rows, cols: som.cols };
      this.somView.render(som);
    } catch (err) {
      this.somShape = null;
      el("som-grid").textContent = "";
      this.showError(err, `no trained model for ${name}`);
    }
  }

  private queueRetrieve(): void {
    const setName = this.sliders.setName;
    if (!setName) return;
    const values = this.sliders.values();
    void this.flight
      .schedule((signal) => this.api.retrieve(
        { set: setName, k: K, exclude_self: false, source: { values } },
        signal,
      ))
      .then(async (res) => {
        if (!res) return; // superseded
        this.clearError();
        await this.gallery.render(res.raw);
        this.paintEncodingMap(res.data.encoding);
        this.somView.overlay(res.data.encoding);
      })
      .catch((err) => this.showError(err, "retrieval failed"));
  }

  /** Load a block's metrics into the sliders and retrieve; the block
   * itself comes back at rank 1. */
  async loadBlock(blockId: string): Promise<void> {
    try {
      const res = await this.api.getBlock(blockId);
      const metricsRaw = at(res.raw, "metrics");
      if (metricsRaw) this.sliders.loadFromMetrics(metricsRaw);
      el<HTMLInputElement>("block-input").value = blockId;
      this.showBlockInfo(res.raw);
      this.clearError();
      this.queueRetrieve();
    } catch (err) {
      this.showError(err, `could not load block ${blockId}`);
    }
  }

  private showBlockInfo(detailRaw: unknown): void {
    const info = el("block-info");
    info.textContent = "";
    const metrics = at(detailRaw as never, "metrics");
    if (!metrics || metrics.kind !== "object") return;
    const idNode = metrics.entries.get("block_id");
    const head = document.createElement("div");
    head.textContent = idNode && idNode.kind === "string" ? idNode.value : "";
    info.append(head);
    const list = document.createElement("dl");
    for (const [key, node] of metrics.entries) {
      if (node.kind !== "number") continue;
      const dt = document.createElement("dt");
      dt.textContent = key;
      const dd = document.createElement("dd");
      dd.textContent = rawNumber(node); // byte-exact API value
      list.append(dt, dd);
    }
    info.append(list);
  }

  private paintEncodingMap(encoding: number[]): void {
    if (!this.somShape) return;
    const canvas = el<HTMLCanvasElement>("encoding-map");
    const ctx = canvas.getContext("2d") as Canvas2D | null;
    if (!ctx) return;
    paintEncoding(ctx, encoding, this.somShape.rows, this.somShape.cols,
                  canvas.width, canvas.height);
  }

  private showError(err: unknown, fallback: string): void {
    const box = el("error-box");
    box.textContent = err instanceof ApiError
      ? `error ${err.status}: ${err.message}`
      : fallback;
    box.style.display = "block";
  }

  private clearError(): void {
    const box = el("error-box");
    box.textContent = "";
    box.style.display = "none";
  }
}

if (typeof document !== "undefined" && document.getElementById("set-select")) {
  const app = new ExplorerApp();
  void app.start();
}
