/**
 * JSON parsing that preserves the exact source text of every number.
 *
 * The explorer displays numbers exactly as the API serialized them
 * (byte for byte), so instead of Number -> string round-trips (which
 * rewrite e.g. "15718.0" as "15718") every number leaf keeps its raw
 * token alongside the parsed value.
 */

export type RawNode =
  | { kind: "number"; value: number; raw: string }
  | { kind: "string"; value: string }
  | { kind: "boolean"; value: boolean }
  | { kind: "null"; value: null }
  | { kind: "array"; items: RawNode[] }
  | { kind: "object"; entries: Map<string, RawNode> };

export class RawJsonError extends Error {}

class Parser {
  private pos = 0;

  constructor(private readonly text: string) {}

  parse(): RawNode {
    const node = this.parseValue();
    this.skipWs();
    if (this.pos !== this.text.length) {
      throw new RawJsonError(`trailing content at ${this.pos}`);
    }
    return node;
  }

  private skipWs(): void {
    while (this.pos < this.text.length && " \t\n\r".includes(this.text[this.pos])) {
      this.pos++;
    }
  }

  private parseValue(): RawNode {
    this.skipWs();
    const ch = this.text[this.pos];
    if (ch === undefined) throw new RawJsonError("unexpected end of input");
    if (ch === "{") return this.parseObject();
    if (ch === "[") return this.parseArray();
    if (ch === '"') return { kind: "string", value: this.parseString() };
    if (this.text.startsWith("true", this.pos)) {
      this.pos += 4;
      return { kind: "boolean", value: true };
    }
    if (this.text.startsWith("false", this.pos)) {
      this.pos += 5;
      return { kind: "boolean", value: false };
    }
    if (this.text.startsWith("null", this.pos)) {
      this.pos += 4;
      return { kind: "null", value: null };
    }
    return this.parseNumber();
  }

  private parseNumber(): RawNode {
    const start = this.pos;
    const re = /-?(?:0|[1-9]\d*)(?:\.\d+)?(?:[eE][+-]?\d+)?/y;
    re.lastIndex = start;
    const m = re.exec(this.text);
    if (!m || m.index !== start || m[0].length === 0) {
      throw new RawJsonError(`invalid token at ${start}`);
    }
    this.pos = start + m[0].length;
    return { kind: "number", value: Number(m[0]), raw: m[0] };
  }

  private parseString(): string {
    // delegate escape handling to the host JSON parser
    const start = this.pos;
    this.pos++; // opening quote
    while (this.pos < this.text.length) {
      const ch = this.text[this.pos];
      if (ch === "\\") {
        this.pos += 2;
        continue;
      }
      if (ch === '"') {
        this.pos++;
        return JSON.parse(this.text.slice(start, this.pos)) as string;
      }
      this.pos++;
    }
    throw new RawJsonError("unterminated string");
  }

  private parseArray(): RawNode {
    this.pos++; // [
    const items: RawNode[] = [];
    this.skipWs();
    if (this.text[this.pos] === "]") {
      this.pos++;
      return { kind: "array", items };
    }
    for (;;) {
      items.push(this.parseValue());
      this.skipWs();
      const ch = this.text[this.pos];
      if (ch === ",") {
        this.pos++;
      } else if (ch === "]") {
        this.pos++;
        return { kind: "array", items };
      } else {
        throw new RawJsonError(`expected , or ] at ${this.pos}`);
      }
    }
  }

  private parseObject(): RawNode {
    this.pos++; // {
    const entries = new Map<string, RawNode>();
    this.skipWs();
    if (this.text[this.pos] === "}") {
      this.pos++;
      return { kind: "object", entries };
    }
    for (;;) {
      this.skipWs();
      if (this.text[this.pos] !== '"') {
        throw new RawJsonError(`expected key at ${this.pos}`);
      }
      const key = this.parseString();
      this.skipWs();
      if (this.text[this.pos] !== ":") {
        throw new RawJsonError(`expected : at ${this.pos}`);
      }
      this.pos++;
      entries.set(key, this.parseValue());
      this.skipWs();
      const ch = this.text[this.pos];
      if (ch === ",") {
        this.pos++;
      } else if (ch === "}") {
        this.pos++;
        return { kind: "object", entries };
      } else {
        throw new RawJsonError(`expected , or } at ${this.pos}`);
      }
    }
  }
}

export function parseRaw(text: string): RawNode {
  return new Parser(text).parse();
}

/** Plain JS value tree (numbers become Number). */
export function toValue(node: RawNode): unknown {
  switch (node.kind) {
    case "number":
    case "string":
    case "boolean":
    case "null":
      return node.value;
    case "array":
      return node.items.map(toValue);
    case "object": {
      const out: Record<string, unknown> = {};
      for (const [k, v] of node.entries) out[k] = toValue(v);
      return out;
    }
  }
}

/** Navigate an object/array path; undefined when absent. */
export function at(node: RawNode, ...path: (string | number)[]): RawNode | undefined {
  let cur: RawNode | undefined = node;
  for (const step of path) {
    if (cur === undefined) return undefined;
    if (typeof step === "number") {
      cur = cur.kind === "array" ? cur.items[step] : undefined;
    } else {
      cur = cur.kind === "object" ? cur.entries.get(step) : undefined;
    }
  }
  return cur;
}

/** The exact source token of a number node (throws on non-numbers). */
export function rawNumber(node: RawNode | undefined): string {
  if (node === undefined || node.kind !== "number") {
    throw new RawJsonError("expected a number node");
  }
  return node.raw;
}
