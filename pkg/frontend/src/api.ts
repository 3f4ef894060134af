/** Typed client for the blockmorph service; every response keeps its
 * raw-token tree so views can show numbers byte-for-byte. */

import { parseRaw, toValue, RawNode } from "./rawjson.js";

export interface SetInfo {
  name: string;
  indicators: string[];
  norm_params: Record<string, [number, number]>;
}

export interface BlockSummary {
  id: string;
  ba: number;
  nob: number;
  centroid: [number, number];
}

export interface PolygonJson {
  outer: [number, number][];
  holes: [number, number][][];
}

export interface BuildingJson {
  id: string;
  footprint: PolygonJson;
  height: number;
  storeys: number;
}

export interface BlockDetail {
  id: string;
  boundary: PolygonJson;
  buildings: BuildingJson[];
  metrics: Record<string, number | string>;
}

export interface RankedItem {
  block_id: string;
  distance: number;
  rank: number;
}

export interface RetrieveResponse {
  query_echo: unknown;
  results: RankedItem[];
  encoding: number[];
}

export interface SomCell {
  index: number;
  row: number;
  col: number;
  weights: number[];
  rgb: [number, number, number];
  samples: string[];
  empty: boolean;
}

export interface SomGrid {
  set_name: string;
  rows: number;
  cols: number;
  cells: SomCell[];
}

export interface RetrieveRequest {
  set: string;
  k: number;
  exclude_self: boolean;
  source: { block_id: string } | { values: Record<string, number> };
}

export interface ApiResult<T> {
  data: T;
  raw: RawNode;
}

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
  }
}

async function decode<T>(res: Response): Promise<ApiResult<T>> {
  const text = await res.text();
  if (!res.ok) {
    let detail = text;
    try {
      detail = JSON.stringify(JSON.parse(text).detail);
    } catch {
      /* keep body text */
    }
    throw new ApiError(res.status, detail);
  }
  const raw = parseRaw(text);
  return { data: toValue(raw) as T, raw };
}

export class ApiClient {
  constructor(private readonly base: string = "") {}

  getSets(): Promise<ApiResult<SetInfo[]>> {
    return fetch(`${this.base}/api/sets`).then((r) => decode<SetInfo[]>(r));
  }

  getBlocks(limit = 50, offset = 0): Promise<ApiResult<BlockSummary[]>> {
    return fetch(`${this.base}/api/blocks?limit=${limit}&offset=${offset}`)
      .then((r) => decode<BlockSummary[]>(r));
  }

  getBlock(id: string): Promise<ApiResult<BlockDetail>> {
    return fetch(`${this.base}/api/blocks/${encodeURIComponent(id)}`)
      .then((r) => decode<BlockDetail>(r));
  }

  getSom(setName: string): Promise<ApiResult<SomGrid>> {
    return fetch(`${this.base}/api/som/${encodeURIComponent(setName)}`)
      .then((r) => decode<SomGrid>(r));
  }

  retrieve(req: RetrieveRequest, signal?: AbortSignal): Promise<ApiResult<RetrieveResponse>> {
    return fetch(`${this.base}/api/retrieve`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(req),
      signal,
    }).then((r) => decode<RetrieveResponse>(r));
  }
}
