// Canvas renderer.  Every coordinate it draws comes from server frames
// (Configured layout, State anchors/center/cursor); the only client-side
// math is the degree-to-pixel scale.

import type { AnchorFrame, ClientState, Layout } from "./protocol.js";
import { labelAt } from "./protocol.js";

export type AnchorStyle = "white-point" | "red-point" | "cross";

export interface ViewOptions {
  pxPerDegree: number;
  anchorStyle: AnchorStyle;
  showZones: boolean;
}

const COLORS = {
  background: "#16181d",
  pie: "#262a33",
  pieBorder: "#4a5264",
  sector: "#394050",
  crust: "#2e3442",
  label: "#c8cede",
  labelDim: "#737b8e",
  cursor: "#3a3f4a",
  cursorRim: "#9aa1b2",
  start: "#2c3342",
  startRim: "#5b89d6",
  dwell: "#6fa8ff",
  zone: "#46608a",
  anchorWhite: "#f2f4f8",
  anchorRed: "#e5484d",
};

export function render(canvas: HTMLCanvasElement, state: ClientState, opts: ViewOptions): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return; // headless DOM in tests: state, not pixels, is asserted

  const w = canvas.width;
  const h = canvas.height;
  const s = opts.pxPerDegree;
  const px = (x: number) => w / 2 + x * s;
  const py = (y: number) => h / 2 - y * s; // menu y points up, canvas y down

  ctx.fillStyle = COLORS.background;
  ctx.fillRect(0, 0, w, h);

  const layout = state.layout;
  const frame = state.frame;
  if (!layout) return;

  if (frame && frame.session === "open") {
    drawMenu(ctx, layout, frame.center, state.path, px, py, s);
    drawAnchors(ctx, frame.anchors, px, py, s, layout, state.path, opts);
  } else {
    drawStartButton(ctx, layout, frame ? frame.dwell_progress_ms : 0, px, py, s);
  }

  const cursor = frame ? frame.cursor : null;
  if (cursor) {
    ctx.beginPath();
    ctx.arc(px(cursor[0]), py(cursor[1]), 0.25 * s, 0, Math.PI * 2);
    ctx.fillStyle = COLORS.cursor;
    ctx.fill();
    ctx.strokeStyle = COLORS.cursorRim;
    ctx.lineWidth = 1;
    ctx.stroke();
  }
}

function drawStartButton(
  ctx: CanvasRenderingContext2D,
  layout: Layout,
  dwellMs: number,
  px: (x: number) => number,
  py: (y: number) => number,
  s: number,
): void {
  const [rx, ry] = layout.root;
  const r = layout.zone_radius * s;
  ctx.beginPath();
  ctx.arc(px(rx), py(ry), r, 0, Math.PI * 2);
  ctx.fillStyle = COLORS.start;
  ctx.fill();
  ctx.strokeStyle = COLORS.startRim;
  ctx.lineWidth = 2;
  ctx.stroke();

  const progress = Math.min(dwellMs / layout.dwell_ms, 1);
  if (progress > 0) {
    ctx.beginPath();
    ctx.arc(px(rx), py(ry), r + 5, -Math.PI / 2, -Math.PI / 2 + progress * Math.PI * 2);
    ctx.strokeStyle = COLORS.dwell;
    ctx.lineWidth = 3;
    ctx.stroke();
  }

  ctx.fillStyle = COLORS.label;
  ctx.font = `${Math.max(12, 0.4 * s)}px system-ui, sans-serif`;
  ctx.textAlign = "center";
  ctx.textBaseline = "middle";
  ctx.fillText("start", px(rx), py(ry));
}

function drawMenu(
  ctx: CanvasRenderingContext2D,
  layout: Layout,
  center: [number, number],
  path: number[],
  px: (x: number) => number,
  py: (y: number) => number,
  s: number,
): void {
  const cx = px(center[0]);
  const cy = py(center[1]);
  const pieR = layout.pie_radius * s;

  ctx.beginPath();
  ctx.arc(cx, cy, pieR, 0, Math.PI * 2);
  ctx.fillStyle = COLORS.pie;
  ctx.fill();
  ctx.strokeStyle = COLORS.pieBorder;
  ctx.lineWidth = 2;
  ctx.stroke();

  if (layout.technique === "peye") {
    for (const r of [layout.radius, layout.radius + layout.crust_width]) {
      ctx.beginPath();
      ctx.arc(cx, cy, r * s, 0, Math.PI * 2);
      ctx.strokeStyle = COLORS.crust;
      ctx.lineWidth = 1;
      ctx.stroke();
    }
  }

  // sector borders halfway between item directions
  const half = 180 / layout.breadth;
  ctx.strokeStyle = COLORS.sector;
  ctx.lineWidth = 1;
  for (const angle of layout.item_angles) {
    const rad = ((angle + half) * Math.PI) / 180;
    ctx.beginPath();
    ctx.moveTo(cx, cy);
    ctx.lineTo(cx + pieR * Math.cos(rad), cy - pieR * Math.sin(rad));
    ctx.stroke();
  }

  if (layout.label_radius !== null) {
    ctx.font = `${Math.max(11, 0.45 * s)}px system-ui, sans-serif`;
    ctx.textAlign = "center";
    ctx.textBaseline = "middle";
    for (let i = 0; i < layout.breadth; i++) {
      const angle = layout.item_angles[i];
      if (angle === undefined) continue;
      const rad = (angle * Math.PI) / 180;
      const lx = cx + layout.label_radius * s * Math.cos(rad);
      const ly = cy - layout.label_radius * s * Math.sin(rad);
      const label = labelAt(layout, [...path, i]);
      ctx.fillStyle = label === "?" ? COLORS.labelDim : COLORS.label;
      ctx.fillText(label, lx, ly);
    }
  }
}

function drawAnchors(
  ctx: CanvasRenderingContext2D,
  anchors: AnchorFrame[],
  px: (x: number) => number,
  py: (y: number) => number,
  s: number,
  layout: Layout,
  path: number[],
  opts: ViewOptions,
): void {
  const r = (layout.anchor_width / 2) * s;
  for (const a of anchors) {
    if (!a.visible) continue;
    const x = px(a.x);
    const y = py(a.y);
    ctx.globalAlpha = a.active ? 1 : 0.35;
    switch (opts.anchorStyle) {
      case "white-point":
      case "red-point": {
        ctx.beginPath();
        ctx.arc(x, y, r, 0, Math.PI * 2);
        ctx.fillStyle = opts.anchorStyle === "red-point" ? COLORS.anchorRed : COLORS.anchorWhite;
        ctx.fill();
        break;
      }
      case "cross": {
        ctx.strokeStyle = COLORS.anchorWhite;
        ctx.lineWidth = 2;
        ctx.beginPath();
        ctx.moveTo(x - r, y);
        ctx.lineTo(x + r, y);
        ctx.moveTo(x, y - r);
        ctx.lineTo(x, y + r);
        ctx.stroke();
        break;
      }
    }
    if (opts.showZones && a.active) {
      ctx.beginPath();
      ctx.setLineDash([4, 4]);
      ctx.arc(x, y, layout.zone_radius * s, 0, Math.PI * 2);
      ctx.strokeStyle = COLORS.zone;
      ctx.lineWidth = 1;
      ctx.stroke();
      ctx.setLineDash([]);
    }
    ctx.globalAlpha = 1;
  }
}
