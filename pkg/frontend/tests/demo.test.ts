// End-to-end: the real app, a DOM via happy-dom, and a live `gazemark serve`
// process on localhost.  The pointer stands in for gaze; every selection the
// UI shows must come from a server Event, never from client-side guessing.

import { spawn, type ChildProcess } from "node:child_process";
import WebSocket from "ws";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { createApp, type AppHandle, type SocketLike } from "../src/app.js";
import { SELECTION_KINDS, type EventPayload } from "../src/protocol.js";

const PORT = 8931;
const URL = `ws://127.0.0.1:${PORT}/session`;
const PX = 20; // px per degree; happy-dom rects are zero-size so clientX is the canvas px

let server: ChildProcess | null = null;
let serverLog = "";

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

async function waitFor(
  cond: () => boolean,
  label: string | (() => string),
  timeoutMs = 15000,
): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (!cond()) {
    if (Date.now() > deadline) {
      const text = typeof label === "function" ? label() : label;
      throw new Error(`timed out waiting for ${text}\nserver log tail:\n${serverLog.slice(-2000)}`);
    }
    await sleep(10);
  }
}

function dump(app: AppHandle): string {
  const f = app.state.frame;
  return JSON.stringify({
    session: f?.session,
    level: f?.level,
    center: f?.center,
    cursor: f?.cursor,
    anchors: f?.anchors.filter((a) => a.active).map((a) => a.path.join("")),
    path: app.state.path,
    selections: app.state.selections.length,
    kinds: app.state.events.map((e) => e.kind).slice(-20),
    errors: app.state.errors,
    fatal: app.state.fatal,
    result: app.state.result !== null,
  });
}

function waitForServer(timeoutMs: number): Promise<void> {
  return new Promise((resolve, reject) => {
    const deadline = Date.now() + timeoutMs;
    const attempt = () => {
      const probe = new WebSocket(URL);
      probe.on("open", () => {
        probe.close();
        resolve();
      });
      probe.on("error", () => {
        probe.close();
        if (Date.now() > deadline) {
          reject(new Error(`service not reachable\nserver log tail:\n${serverLog.slice(-2000)}`));
        } else {
          setTimeout(attempt, 250);
        }
      });
    };
    attempt();
  });
}

beforeAll(async () => {
  server = spawn("gazemark", ["serve", "--host", "127.0.0.1", "--port", String(PORT)], {
    stdio: ["ignore", "pipe", "pipe"],
  });
  server.stdout?.on("data", (chunk) => (serverLog += String(chunk)));
  server.stderr?.on("data", (chunk) => (serverLog += String(chunk)));
  await waitForServer(25000);
});

afterAll(() => {
  server?.kill();
});

function movePointer(app: AppHandle, x: number, y: number): void {
  const cx = app.canvas.width / 2 + x * PX;
  const cy = app.canvas.height / 2 - y * PX;
  app.canvas.dispatchEvent(new MouseEvent("pointermove", { clientX: cx, clientY: cy }));
}

function cursorNear(app: AppHandle, x: number, y: number): boolean {
  const cur = app.state.frame?.cursor;
  if (!cur) return false;
  return Math.hypot(cur[0] - x, cur[1] - y) < 1e-6;
}

function sameArray(a: number[], b: number[]): boolean {
  return a.length === b.length && a.every((v, i) => v === b[i]);
}

/** Move onto the active anchor for the next target step; zone entry selects. */
async function steerLattice(app: AppHandle, level: number, target: number[]): Promise<void> {
  const want = target.slice(0, level);
  await waitFor(
    () => app.state.frame?.anchors.some((a) => a.active && sameArray(a.path, want)) ?? false,
    `level ${level} anchor for [${want}]`,
  );
  const anchor = app.state.frame!.anchors.find((a) => a.active && sameArray(a.path, want))!;
  movePointer(app, anchor.x, anchor.y);
}

/** Cross the pie border radially.  A crossing needs the previous sample
 * inside, so park on the current center before striking outward. */
async function steerBorder(app: AppHandle, level: number, target: number[]): Promise<void> {
  const layout = app.state.layout!;
  const [cx, cy] = app.state.frame!.center;
  movePointer(app, cx, cy);
  await waitFor(() => cursorNear(app, cx, cy), `cursor parked at level ${level} center`);
  const angle = (layout.item_angles[target[level - 1]]! * Math.PI) / 180;
  const reach = layout.radius * 1.25; // strictly outside the border
  movePointer(app, cx + reach * Math.cos(angle), cy + reach * Math.sin(angle));
}

interface ScenarioResult {
  app: AppHandle;
  root: HTMLElement;
}

function mountApp(technique: string, mode: string, seed: number): ScenarioResult {
  const root = document.createElement("div");
  document.body.appendChild(root);
  const app = createApp({
    root,
    url: URL,
    socketFactory: (u) => new WebSocket(u) as unknown as SocketLike,
    config: {
      technique,
      mode,
      breadth: 4,
      depth: 3,
      radius: 10.0,
      dwell_ms: 250,
      task_seed: seed,
    },
    pxPerDegree: PX,
    schedule: (cb) => void setTimeout(cb, 8),
  });
  return { app, root };
}

function selectionEvents(events: EventPayload[]): EventPayload[] {
  let lastOpen = -1;
  for (let i = 0; i < events.length; i++) {
    if (events[i]!.kind === "MenuOpened") lastOpen = i;
  }
  return events.slice(lastOpen + 1).filter((e) => SELECTION_KINDS.has(e.kind));
}

async function runScenario(technique: "lattice" | "border_pie", mode: "progressive" | "full", seed: number): Promise<void> {
  const { app, root } = mountApp(technique, mode, seed);
  try {
    await waitFor(() => app.state.layout !== null && app.state.task !== null, "Configured + TaskAssigned");
    const target = app.state.task!.target;
    expect(target).toHaveLength(3);

    // dwell on the start disk at the root until the menu opens
    movePointer(app, 0, 0);
    await waitFor(() => app.state.events.some((e) => e.kind === "MenuOpened"), "MenuOpened");

    for (let level = 1; level <= 3; level++) {
      if (technique === "lattice") {
        await steerLattice(app, level, target);
      } else {
        await steerBorder(app, level, target);
      }
      await waitFor(
        () => app.state.selections.length === level,
        () => `selection ${level}; ${dump(app)}`,
      );
    }

    await waitFor(() => app.state.result !== null, "TrialResult");
    const result = app.state.result!;
    expect(result.correct).toBe(true);
    expect(result.selected).toEqual(target);
    expect(result.ct_ms).not.toBeNull();

    // result banner
    const resultEl = app.banner.querySelector(".gm-result") as HTMLElement;
    expect(resultEl.textContent).toContain("correct");
    expect(resultEl.dataset.correct).toBe("true");

    // breadcrumbs: one row per selection, labels straight from the task
    const rows = Array.from(app.crumbs.children) as HTMLElement[];
    expect(rows).toHaveLength(3);
    const labels = app.state.task!.labels;
    rows.forEach((row, i) => {
      expect(row.dataset.index).toBe(String(target[i]));
      expect(row.textContent).toBe(labels[i]);
    });
    expect(rows.map((r) => r.dataset.kind)).toEqual([
      "LevelSelected",
      "LevelSelected",
      "LeafSelected",
    ]);

    // 1:1: every displayed row matches a server selection event, in order;
    // the leaf zone entry reports a LevelSelected plus a LeafSelected summary
    const fromServer = selectionEvents(app.state.events);
    expect(fromServer.map((e) => e.kind)).toEqual([
      "LevelSelected",
      "LevelSelected",
      "LevelSelected",
      "LeafSelected",
    ]);
    rows.forEach((row, i) => {
      const ev = fromServer[i]!;
      expect(row.dataset.level).toBe(String(ev.level));
      expect(row.dataset.index).toBe(String(ev.index));
    });
    const leaf = fromServer[3]!;
    expect(leaf.path).toEqual(target);
    expect(leaf.index).toBe(target[2]);
    // and nothing extra arrived outside the trial
    expect(app.state.events.filter((e) => SELECTION_KINDS.has(e.kind))).toHaveLength(4);

    expect(app.state.fatal).toBeNull();
    expect(app.state.errors).toEqual([]);
    expect(app.status.dataset.state).toBe("connected");
  } finally {
    app.dispose();
    root.remove();
  }
}

describe("demo app against a live service", () => {
  it("completes a lattice trial in progressive mode", async () => {
    await runScenario("lattice", "progressive", 7);
  });

  it("completes a lattice trial in full mode", async () => {
    await runScenario("lattice", "full", 8);
  });

  it("completes a border pie trial in progressive mode", async () => {
    await runScenario("border_pie", "progressive", 9);
  });

  it("completes a border pie trial in full mode", async () => {
    await runScenario("border_pie", "full", 10);
  });
});
