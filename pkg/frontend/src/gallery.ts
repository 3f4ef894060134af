/** Ranked result cards: 2.5D extrusion preview, rank, id, and the
 * distance exactly as the API printed it. */

import { ApiClient, BlockDetail } from "./api.js";
import { buildScene, paintScene, Canvas2D } from "./extrude.js";
import { RawNode, at, rawNumber } from "./rawjson.js";

const CARD_PX = 150;

export class ResultGallery {
  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
    private readonly onPick: (blockId: string) => void,
  ) {}

  clear(message: string): void {
    this.root.textContent = "";
    const empty = document.createElement("p");
    empty.className = "empty-state";
    empty.textContent = message;
    this.root.append(empty);
  }

  /** Render results from the raw response tree (numbers stay verbatim). */
  async render(responseRaw: RawNode): Promise<void> {
    const results = at(responseRaw, "results");
    if (!results || results.kind !== "array" || results.items.length === 0) {
      this.clear("no results - corpus is empty");
      return;
    }
    this.root.textContent = "";
    const cards: Promise<void>[] = [];
    for (let i = 0; i < results.items.length; i++) {
      const item = results.items[i];
      const idNode = at(item, "block_id");
      const rankNode = at(item, "rank");
      if (!idNode || idNode.kind !== "string" || !rankNode) continue;
      const blockId = idNode.value;

      const card = document.createElement("div");
      card.className = "card";
      card.dataset.blockId = blockId;

      const canvas = document.createElement("canvas");
      canvas.width = CARD_PX;
      canvas.height = CARD_PX;

      const caption = document.createElement("div");
      caption.className = "caption";
      const rankRaw = rankNode.kind === "number" ? rankNode.raw : "?";
      const distRaw = rawNumber(at(item, "distance"));
      caption.innerHTML = "";
      const title = document.createElement("div");
      title.textContent = `#${rankRaw} ${blockId}`;
      const dist = document.createElement("div");
      dist.className = "distance";
      dist.textContent = `d=${distRaw}`;
      caption.append(title, dist);

      card.append(canvas, caption);
      card.addEventListener("click", () => this.onPick(blockId));
      this.root.append(card);

      cards.push(this.paint(canvas, blockId));
    }
    await Promise.all(cards);
  }

  private async paint(canvas: HTMLCanvasElement, blockId: string): Promise<void> {
    let detail: BlockDetail;
    try {
      detail = (await this.api.getBlock(blockId)).data;
    } catch {
      return; // the caption still identifies the block
    }
    const ctx = canvas.getContext("2d") as Canvas2D | null;
    if (!ctx) return;
    paintScene(ctx, buildScene(detail, canvas.width, canvas.height),
               canvas.width, canvas.height);
  }
}
