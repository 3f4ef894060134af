import { describe, expect, it } from "vitest";

import { at, parseRaw, rawNumber, toValue, RawJsonError } from "../src/rawjson.js";

describe("raw-token JSON parsing", () => {
  it("keeps number tokens byte-for-byte", () => {
    const text = '{"a": 15718.0, "b": 0.0, "c": 1e-05, "d": -3.140000, "e": 12}';
    const node = parseRaw(text);
    expect(rawNumber(at(node, "a"))).toBe("15718.0");
    expect(rawNumber(at(node, "b"))).toBe("0.0");
    expect(rawNumber(at(node, "c"))).toBe("1e-05");
    expect(rawNumber(at(node, "d"))).toBe("-3.140000");
    expect(rawNumber(at(node, "e"))).toBe("12");
  });

  it("parses values identically to JSON.parse", () => {
    const samples = [
      '{"x": [1, 2.5, -3e2], "y": {"z": null, "w": true}, "s": "a\\"b"}',
      "[0.123456, 99, false]",
      '"plain"',
      "42",
    ];
    for (const text of samples) {
      expect(toValue(parseRaw(text))).toEqual(JSON.parse(text));
    }
  });

  it("navigates nested paths", () => {
    const node = parseRaw('{"results": [{"distance": 0.847261}]}');
    expect(rawNumber(at(node, "results", 0, "distance"))).toBe("0.847261");
    expect(at(node, "results", 3)).toBeUndefined();
    expect(at(node, "nope")).toBeUndefined();
  });

  it("rejects malformed input", () => {
    expect(() => parseRaw("{")).toThrow(RawJsonError);
    expect(() => parseRaw('{"a": 1,}')).toThrow(RawJsonError);
    expect(() => parseRaw("1 2")).toThrow(RawJsonError);
    expect(() => rawNumber(at(parseRaw('{"s": "x"}'), "s"))).toThrow(RawJsonError);
  });

  it("handles deep nesting and unicode strings", () => {
    const text = '{"arr": [[{"k": "\\u00e9\\n"}]], "n": 0.5}';
    const node = parseRaw(text);
    expect(toValue(node)).toEqual(JSON.parse(text));
  });
});
