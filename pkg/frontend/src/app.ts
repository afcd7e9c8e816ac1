// Demo client: one socket, one sampling/render loop, DOM for the task
// banner and selection breadcrumbs.  The pointer stands in for gaze; the
// server decides everything about selection.

import {
  apply,
  initialState,
  PROTOCOL_VERSION,
  type ClientState,
  type ServerMessage,
} from "./protocol.js";
import { render, type AnchorStyle, type ViewOptions } from "./view.js";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  addEventListener(type: string, listener: (ev: any) => void): void;
}

export interface AppOptions {
  root: HTMLElement;
  url: string;
  socketFactory: (url: string) => SocketLike;
  /** Configure payload: technique, mode, breadth, depth, radius, dwell_ms... */
  config: Record<string, unknown>;
  pxPerDegree?: number;
  anchorStyle?: AnchorStyle;
  showZones?: boolean;
  now?: () => number;
  /** Scheduler for the sample/render tick; defaults to requestAnimationFrame. */
  schedule?: (cb: () => void) => void;
  reconnectDelayMs?: number;
}

export interface AppHandle {
  state: ClientState;
  canvas: HTMLCanvasElement;
  banner: HTMLElement;
  crumbs: HTMLElement;
  status: HTMLElement;
  keyNext(): void;
  reset(): void;
  blink(durationMs: number): void;
  reconfigure(patch: Record<string, unknown>): void;
  setAnchorStyle(style: AnchorStyle): void;
  setShowZones(on: boolean): void;
  dispose(): void;
}

export function createApp(opts: AppOptions): AppHandle {
  const doc = opts.root.ownerDocument;
  const now = opts.now ?? (() => performance.now());
  const schedule =
    opts.schedule ?? ((cb: () => void) => requestAnimationFrame(() => cb()));
  const reconnectDelay = opts.reconnectDelayMs ?? 1000;

  const state = initialState();
  const view: ViewOptions = {
    pxPerDegree: opts.pxPerDegree ?? 40,
    anchorStyle: opts.anchorStyle ?? "white-point",
    showZones: opts.showZones ?? false,
  };
  let config = { ...opts.config };

  opts.root.innerHTML = `
    <div class="gm-status" data-state="connecting">connecting</div>
    <div class="gm-banner">
      <span class="gm-task"></span>
      <span class="gm-result"></span>
    </div>
    <canvas class="gm-canvas" width="960" height="720"></canvas>
    <ol class="gm-crumbs"></ol>
  `;
  const status = opts.root.querySelector(".gm-status") as HTMLElement;
  const banner = opts.root.querySelector(".gm-banner") as HTMLElement;
  const taskEl = opts.root.querySelector(".gm-task") as HTMLElement;
  const resultEl = opts.root.querySelector(".gm-result") as HTMLElement;
  const canvas = opts.root.querySelector(".gm-canvas") as HTMLCanvasElement;
  const crumbs = opts.root.querySelector(".gm-crumbs") as HTMLElement;

  let socket: SocketLike | null = null;
  let connected = false;
  let disposed = false;
  let pointer: { x: number; y: number } | null = null;
  let lastSampleT = -Infinity;
  let renderedVersion = -1;

  function sendJson(msg: Record<string, unknown>): void {
    if (socket && connected) socket.send(JSON.stringify(msg));
  }

  function setStatus(label: string, kind: string): void {
    status.textContent = label;
    status.dataset.state = kind;
  }

  function updateDom(): void {
    if (state.fatal) {
      setStatus(`protocol error: ${state.fatal.code} (${state.fatal.message})`, "fatal");
      return;
    }
    const task = state.task;
    if (task) {
      taskEl.textContent =
        `target ${task.labels.join(" - ")}` +
        ` (repetition ${task.repetition}/${task.repetitions_total})`;
    }
    const result = state.result;
    if (result) {
      const ct = result.ct_ms === null ? "" : ` in ${result.ct_ms.toFixed(0)} ms`;
      resultEl.textContent = result.correct ? `correct${ct}` : `wrong${ct}`;
      resultEl.dataset.correct = String(result.correct);
    } else if (state.flash === "cancelled") {
      resultEl.textContent = "cancelled";
      delete resultEl.dataset.correct;
    } else {
      resultEl.textContent = "";
      delete resultEl.dataset.correct;
    }
    while (crumbs.children.length > state.selections.length) {
      crumbs.removeChild(crumbs.lastChild as Node);
    }
    // resync every row: a leaf confirmation rewrites the last row in place
    for (let i = 0; i < state.selections.length; i++) {
      const row = state.selections[i];
      if (!row) continue;
      let li = crumbs.children[i] as HTMLElement | undefined;
      if (!li) {
        li = doc.createElement("li");
        crumbs.appendChild(li);
      }
      li.textContent = row.label;
      li.dataset.kind = row.kind;
      li.dataset.level = String(row.level);
      li.dataset.index = String(row.index);
    }
  }

  function connect(): void {
    if (disposed) return;
    setStatus("connecting", "connecting");
    const ws = opts.socketFactory(opts.url);
    socket = ws;
    ws.addEventListener("open", () => {
      if (disposed || socket !== ws) return;
      connected = true;
      setStatus("connected", "connected");
      sendJson({ type: "Hello", protocol_version: PROTOCOL_VERSION });
      sendJson({ type: "Configure", config });
    });
    ws.addEventListener("message", (ev: { data: unknown }) => {
      if (disposed || socket !== ws) return;
      let msg: ServerMessage;
      try {
        msg = JSON.parse(String(ev.data));
      } catch {
        return;
      }
      apply(state, msg);
      updateDom();
    });
    ws.addEventListener("close", () => {
      if (socket !== ws) return;
      connected = false;
      socket = null;
      if (disposed) return;
      if (state.fatal) {
        setStatus(`protocol error: ${state.fatal.code} (${state.fatal.message})`, "fatal");
        return;
      }
      setStatus("disconnected, reconnecting", "reconnecting");
      setTimeout(connect, reconnectDelay);
    });
    ws.addEventListener("error", () => {
      // close follows; the close handler owns reconnect
    });
  }

  function pointerToDegrees(pxX: number, pxY: number): [number, number] {
    const s = view.pxPerDegree;
    return [(pxX - canvas.width / 2) / s, (canvas.height / 2 - pxY) / s];
  }

  function onPointerMove(ev: MouseEvent): void {
    const rect = canvas.getBoundingClientRect();
    pointer = { x: ev.clientX - rect.left, y: ev.clientY - rect.top };
  }

  function onKeyDown(ev: KeyboardEvent): void {
    if (ev.key === " ") {
      ev.preventDefault();
      handle.keyNext();
    } else if (ev.key === "r") {
      handle.reset();
    } else if (ev.key === "b") {
      handle.blink(state.layout ? state.layout.cancel_blink_ms : 700);
    }
  }

  function tick(): void {
    if (disposed) return;
    if (connected && state.layout && pointer && !state.fatal) {
      const [x, y] = pointerToDegrees(pointer.x, pointer.y);
      // the decoder needs strictly increasing timestamps
      const t = Math.max(now(), lastSampleT + 0.05);
      lastSampleT = t;
      sendJson({ type: "Sample", t, x, y, valid: true });
    }
    if (state.version !== renderedVersion) {
      renderedVersion = state.version;
      render(canvas, state, view);
    }
    schedule(tick);
  }

  canvas.addEventListener("pointermove", onPointerMove as EventListener);
  doc.addEventListener("keydown", onKeyDown as EventListener);

  const handle: AppHandle = {
    state,
    canvas,
    banner,
    crumbs,
    status,
    keyNext() {
      sendJson({ type: "KeyNext" });
    },
    reset() {
      sendJson({ type: "Reset" });
    },
    blink(durationMs: number) {
      sendJson({ type: "Blink", duration: durationMs });
    },
    reconfigure(patch: Record<string, unknown>) {
      config = { ...config, ...patch };
      sendJson({ type: "Configure", config });
    },
    setAnchorStyle(style: AnchorStyle) {
      view.anchorStyle = style;
      render(canvas, state, view);
    },
    setShowZones(on: boolean) {
      view.showZones = on;
      render(canvas, state, view);
    },
    dispose() {
      disposed = true;
      doc.removeEventListener("keydown", onKeyDown as EventListener);
      if (socket) socket.close();
    },
  };

  connect();
  schedule(tick);
  return handle;
}
