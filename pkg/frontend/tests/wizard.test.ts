/**
 * Rule wizard: dropdowns track the catalog, step gating, autofill, and
 * the confirmed frame matching a committed transcript line byte for byte.
 */

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import { canonicalJson, type Catalog } from "../src/protocol.js";
import {
  addAction,
  addCondition,
  advance,
  autofillAction,
  back,
  canAdvance,
  canConfirm,
  conditionOptions,
  createRuleFrame,
  removeAction,
  startWizard,
  summaryLines,
} from "../src/wizard.js";

const here = dirname(fileURLToPath(import.meta.url));

const catalog: Catalog = JSON.parse(
  readFileSync(join(here, "fixtures", "catalog_sorting.json"), "utf8"),
);

function goldenRuleLine(): string {
  const transcript = join(
    here, "..", "..", "src", "workcell", "fixtures", "transcripts",
    "sorting.jsonl",
  );
  const line = readFileSync(transcript, "utf8")
    .split("\n")
    .find((l) => l.includes('"request_id": "rule-1"'));
  if (!line) {
    throw new Error("sorting transcript has no rule-1 frame");
  }
  return line;
}

describe("rule wizard", () => {
  it("builds the committed sort-bolts frame byte for byte", () => {
    let w = startWizard();
    w = addCondition(
      w,
      { kind: "is_in", category: "bolt", zone: "green", state: null },
      catalog,
    );
    w = advance(w);
    const draft = autofillAction(w, catalog);
    expect(draft).toEqual({
      category: "bolt",
      from_zone: "green",
      to_zone: "yellow",
      placement: { kind: "middle" },
    });
    w = addAction(
      w,
      { ...draft, placement: { kind: "inside", container: "bolt-box" } },
      catalog,
    );
    w = advance(w);
    expect(canConfirm(w)).toBe(true);
    const frame = createRuleFrame(w, "rule-1", "sort-bolts");
    expect(canonicalJson(frame)).toBe(goldenRuleLine());
  });

  it("offers only catalog entries in the dropdowns", () => {
    const options = conditionOptions(catalog);
    expect(options.categories).toEqual(catalog.categories);
    expect(options.zones).toEqual(catalog.zones);
    expect(options.categories).not.toContain("kit-box");
    expect(options.statesFor("bolt")).toEqual([]);
  });

  it("rejects conditions and actions that name unseen things", () => {
    const w = startWizard();
    expect(() =>
      addCondition(
        w,
        { kind: "is_in", category: "kit-box", zone: "green", state: null },
        catalog,
      ),
    ).toThrow("not in the workspace");
    expect(() =>
      addCondition(
        w,
        { kind: "has_state", category: "bolt", zone: null, state: "open" },
        catalog,
      ),
    ).toThrow("no state");
    expect(() =>
      addAction(
        w,
        {
          category: "bolt",
          from_zone: "green",
          to_zone: "nowhere",
          placement: { kind: "middle" },
        },
        catalog,
      ),
    ).toThrow("no zone");
    expect(() =>
      addAction(
        w,
        {
          category: "bolt",
          from_zone: "green",
          to_zone: "yellow",
          placement: { kind: "inside", container: "bolt" },
        },
        catalog,
      ),
    ).toThrow("not a container");
  });

  it("autofills from a state condition and falls back across zones", () => {
    const assembly: Catalog = {
      categories: ["holder", "bracket"],
      zones: ["red", "blue"],
      states: { holder: ["empty", "assembled"] },
      containers: [],
    };
    let w = startWizard();
    w = addCondition(
      w,
      { kind: "has_state", category: "holder", zone: null, state: "empty" },
      assembly,
    );
    const draft = autofillAction(w, assembly);
    expect(draft.category).toBe("holder");
    expect(draft.from_zone).toBe("red");
    expect(draft.to_zone).toBe("blue");
  });

  it("gates each step on having at least one entry", () => {
    let w = startWizard();
    expect(canAdvance(w)).toBe(false);
    expect(advance(w).step).toBe(1);
    w = addCondition(
      w,
      { kind: "is_in", category: "bolt", zone: "green", state: null },
      catalog,
    );
    w = advance(w);
    expect(w.step).toBe(2);
    expect(canAdvance(w)).toBe(false);
    w = addAction(w, autofillAction(w, catalog), catalog);
    w = advance(w);
    expect(w.step).toBe(3);
    expect(summaryLines(w)).toEqual([
      "when bolt is in green",
      "then move bolt from green to yellow, place in the middle",
    ]);
    expect(canConfirm(w)).toBe(true);
    w = removeAction(w, 0);
    expect(canConfirm(w)).toBe(false);
    expect(() => createRuleFrame(w, "x")).toThrow("not ready");
    expect(back(w).step).toBe(2);
  });
});
