import { describe, expect, it } from "vitest";

import {
  apply,
  initialState,
  labelAt,
  type ConfiguredFrame,
  type Layout,
  type ServerMessage,
} from "../src/protocol.js";

function layout(): Layout {
  return {
    technique: "lattice",
    mode: "progressive",
    breadth: 4,
    depth: 2,
    back_reserved: true,
    root: [0, 0],
    radius: 10,
    pie_radius: 8,
    anchor_width: 1.5,
    zone_width: 4,
    zone_radius: 2,
    label_radius: 5,
    label_margin: 3,
    crust_width: 4,
    dwell_ms: 1000,
    cancel_blink_ms: 700,
    item_angles: [90, 0, -90, -180],
    menu: {
      breadth: 4,
      depth: 2,
      back_reserved: true,
      items: [
        { label: "K", items: [{ label: "A", items: [] }, { label: "B", items: [] }, { label: "C", items: [] }, { label: "D", items: [] }] },
        { label: "N", items: [{ label: "E", items: [] }, { label: "F", items: [] }, { label: "G", items: [] }, { label: "H", items: [] }] },
        { label: "P", items: [{ label: "I", items: [] }, { label: "J", items: [] }, { label: "L", items: [] }, { label: "M", items: [] }] },
        { label: "Q", items: [{ label: "O", items: [] }, { label: "R", items: [] }, { label: "S", items: [] }, { label: "T", items: [] }] },
      ],
    },
  };
}

function configured(): ConfiguredFrame {
  return { type: "Configured", protocol_version: "1", layout: layout() };
}

function event(
  kind: string,
  level: number,
  index: number | null,
  t = 0,
  path?: number[],
): ServerMessage {
  const payload = { t, kind, level, index, x: 0, y: 0, ...(path ? { path } : {}) };
  return { type: "Event", event: payload };
}

describe("labelAt", () => {
  it("walks the menu tree", () => {
    const l = layout();
    expect(labelAt(l, [0])).toBe("K");
    expect(labelAt(l, [1, 0])).toBe("E");
    expect(labelAt(l, [9])).toBe("?");
  });
});

describe("apply", () => {
  it("stores layout and task", () => {
    const s = initialState();
    apply(s, configured());
    apply(s, {
      type: "TaskAssigned",
      target: [1, 0],
      labels: ["N", "E"],
      repetition: 1,
      repetitions_total: 4,
    });
    expect(s.layout?.radius).toBe(10);
    expect(s.task?.labels).toEqual(["N", "E"]);
    expect(s.fatal).toBeNull();
  });

  it("builds breadcrumbs from selection events", () => {
    const s = initialState();
    apply(s, configured());
    apply(s, event("MenuOpened", 1, null, 1000));
    apply(s, event("LevelSelected", 1, 1, 1500));
    // the leaf step arrives as a LevelSelected plus a LeafSelected summary
    apply(s, event("LevelSelected", 2, 0, 1900));
    apply(s, event("LeafSelected", 2, 0, 1900, [1, 0]));
    expect(s.path).toEqual([1, 0]);
    expect(s.selections.map((r) => r.label)).toEqual(["N", "E"]);
    expect(s.selections.map((r) => r.kind)).toEqual(["LevelSelected", "LeafSelected"]);
    expect(s.events).toHaveLength(4);
  });

  it("keeps a bare leaf event visible", () => {
    const s = initialState();
    apply(s, configured());
    apply(s, event("MenuOpened", 1, null));
    apply(s, event("LeafSelected", 1, 2, 0, [2]));
    expect(s.path).toEqual([2]);
    expect(s.selections.map((r) => r.kind)).toEqual(["LeafSelected"]);
    expect(s.selections[0]?.label).toBe("P");
  });

  it("pops the path on BackTaken and keeps the row", () => {
    const s = initialState();
    apply(s, configured());
    apply(s, event("MenuOpened", 1, null));
    apply(s, event("LevelSelected", 1, 2));
    apply(s, event("BackTaken", 2, 0));
    expect(s.path).toEqual([]);
    expect(s.selections.map((r) => r.kind)).toEqual(["LevelSelected", "BackTaken"]);
    expect(s.selections[1]?.label).toBe("back");
  });

  it("clears the trial on Cancelled", () => {
    const s = initialState();
    apply(s, configured());
    apply(s, event("MenuOpened", 1, null));
    apply(s, event("LevelSelected", 1, 1));
    apply(s, event("Cancelled", 2, null));
    expect(s.path).toEqual([]);
    expect(s.selections).toEqual([]);
    expect(s.flash).toBe("cancelled");
  });

  it("records results and resets crumbs on the next open", () => {
    const s = initialState();
    apply(s, configured());
    apply(s, event("MenuOpened", 1, null));
    apply(s, event("LevelSelected", 1, 1));
    apply(s, event("LevelSelected", 2, 0));
    apply(s, event("LeafSelected", 2, 0, 0, [1, 0]));
    apply(s, {
      type: "TrialResult",
      correct: true,
      ct_ms: 1329,
      selected: [1, 0],
      target: [1, 0],
      repetition: 1,
    });
    expect(s.result?.correct).toBe(true);
    expect(s.flash).toBe("correct");
    apply(s, event("MenuOpened", 1, null));
    expect(s.selections).toEqual([]);
    expect(s.result?.correct).toBe(true); // banner keeps the last result
  });

  it("separates fatal from recoverable errors", () => {
    const s = initialState();
    apply(s, { type: "Error", code: "bad_sample", message: "nope" });
    expect(s.fatal).toBeNull();
    expect(s.errors).toHaveLength(1);
    apply(s, { type: "Error", code: "version", message: "expected 1" });
    expect(s.fatal?.code).toBe("version");
  });

  it("ignores telemetry kinds", () => {
    const s = initialState();
    apply(s, configured());
    apply(s, event("DwellProgress", 0, null));
    apply(s, event("ZoneEntered", 1, 2));
    expect(s.selections).toEqual([]);
    expect(s.events).toHaveLength(2);
  });
});
