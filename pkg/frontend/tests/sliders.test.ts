import { describe, expect, it, vi } from "vitest";

import { SliderPanel } from "../src/sliders.js";
import { at, parseRaw } from "../src/rawjson.js";

const ONE_BMC = {
  name: "OneBMC",
  indicators: ["WAH", "BCR", "NOB", "BA"],
  norm_params: {
    WAH: [4.0, 80.0] as [number, number],
    BCR: [0.01, 0.9] as [number, number],
    NOB: [1, 12] as [number, number],
    BA: [1200.0, 90000.0] as [number, number],
  },
};

const SPACEMATE = {
  name: "Spacemate",
  indicators: ["AS", "BCR", "FAR", "OSR"],
  norm_params: {
    AS: [1, 20] as [number, number],
    BCR: [0.01, 0.9] as [number, number],
    FAR: [0.05, 8.0] as [number, number],
    OSR: [0.0, 30.0] as [number, number],
  },
};

describe("slider panel", () => {
  it("builds one slider per indicator with corpus ranges", () => {
    const root = document.createElement("div");
    const panel = new SliderPanel(root, () => {});
    panel.setSet(ONE_BMC);
    const inputs = root.querySelectorAll<HTMLInputElement>("input[type=range]");
    expect([...inputs].map((i) => i.id)).toEqual(
      ["slider-WAH", "slider-BCR", "slider-NOB", "slider-BA"]);
    expect(inputs[0].min).toBe("4");
    expect(inputs[0].max).toBe("80");
  });

  it("swaps sliders when the set changes", () => {
    const root = document.createElement("div");
    const panel = new SliderPanel(root, () => {});
    panel.setSet(ONE_BMC);
    panel.setSet(SPACEMATE);
    const ids = [...root.querySelectorAll("input")].map((i) => i.id);
    expect(ids).toEqual(["slider-AS", "slider-BCR", "slider-FAR", "slider-OSR"]);
  });

  it("fires the edit callback on input", () => {
    const root = document.createElement("div");
    const onEdit = vi.fn();
    const panel = new SliderPanel(root, onEdit);
    panel.setSet(ONE_BMC);
    const input = root.querySelector("input")!;
    input.value = "42";
    input.dispatchEvent(new Event("input"));
    expect(onEdit).toHaveBeenCalledOnce();
    expect(panel.values().WAH).toBe(42);
  });

  it("shows raw metric tokens when loading from a block", () => {
    const root = document.createElement("div");
    const panel = new SliderPanel(root, () => {});
    panel.setSet(ONE_BMC);
    const metrics = at(parseRaw(
      '{"metrics": {"WAH": 18.50, "BCR": 0.250, "NOB": 6, "BA": 15718.0}}'),
      "metrics")!;
    panel.loadFromMetrics(metrics);
    const shown = [...root.querySelectorAll(".slider-value")].map((el) => el.textContent);
    expect(shown).toEqual(["18.50", "0.250", "6", "15718.0"]);
    expect(panel.values()).toEqual({ WAH: 18.5, BCR: 0.25, NOB: 6, BA: 15718 });
  });
});
