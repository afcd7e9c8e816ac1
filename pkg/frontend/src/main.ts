// Browser entry point: query params pick the session, in-page controls
// cover technique, unfolding mode, and anchor style.
//
// Supported params: server, technique, structure (e.g. 4x3), size, mode,
// style, scale (px per degree), zones (1 shows the selection-zone overlay),
// dwell (ms).

import { createApp, type SocketLike } from "./app.js";
import type { AnchorStyle } from "./view.js";

const params = new URLSearchParams(location.search);

function structureOf(raw: string | null): [number, number] {
  const m = raw ? /^(\d+)x(\d+)$/.exec(raw) : null;
  return m ? [Number(m[1]), Number(m[2])] : [4, 3];
}

const [breadth, depth] = structureOf(params.get("structure"));
const config: Record<string, unknown> = {
  technique: params.get("technique") ?? "lattice",
  mode: params.get("mode") ?? "progressive",
  breadth,
  depth,
  radius: Number(params.get("size") ?? 10),
};
if (params.get("dwell")) config.dwell_ms = Number(params.get("dwell"));

const url = params.get("server") ?? `ws://${location.host}/session`;
const style = (params.get("style") ?? "white-point") as AnchorStyle;

const root = document.getElementById("app");
if (!root) throw new Error("missing #app container");

const app = createApp({
  root,
  url,
  socketFactory: (u) => new WebSocket(u) as unknown as SocketLike,
  config,
  pxPerDegree: Number(params.get("scale") ?? 40),
  anchorStyle: style,
  showZones: params.get("zones") === "1",
});

const controls = document.createElement("div");
controls.className = "gm-controls";
controls.innerHTML = `
  <label>technique
    <select data-control="technique">
      <option value="lattice">lattice</option>
      <option value="border_pie">border_pie</option>
      <option value="peye">peye</option>
    </select>
  </label>
  <label>mode
    <select data-control="mode">
      <option value="progressive">progressive</option>
      <option value="full">full</option>
    </select>
  </label>
  <label>anchors
    <select data-control="style">
      <option value="white-point">white point</option>
      <option value="red-point">red point</option>
      <option value="cross">cross</option>
    </select>
  </label>
  <label><input type="checkbox" data-control="zones"> zones</label>
  <span class="gm-hint">space: next target, r: reset, b: blink</span>
`;
root.prepend(controls);

const pick = (name: string) =>
  controls.querySelector(`[data-control="${name}"]`) as HTMLSelectElement;
pick("technique").value = String(config.technique);
pick("mode").value = String(config.mode);
pick("style").value = style;
const zonesBox = controls.querySelector('[data-control="zones"]') as HTMLInputElement;
zonesBox.checked = params.get("zones") === "1";

pick("technique").addEventListener("change", (ev) => {
  app.reconfigure({ technique: (ev.target as HTMLSelectElement).value });
});
pick("mode").addEventListener("change", (ev) => {
  app.reconfigure({ mode: (ev.target as HTMLSelectElement).value });
});
pick("style").addEventListener("change", (ev) => {
  app.setAnchorStyle((ev.target as HTMLSelectElement).value as AnchorStyle);
});
zonesBox.addEventListener("change", () => app.setShowZones(zonesBox.checked));

function fit(): void {
  const w = root!.clientWidth;
  if (w > 0) {
    app.canvas.width = w;
    app.canvas.height = Math.max(480, Math.round(w * 0.72));
  }
}
window.addEventListener("resize", fit);
fit();
