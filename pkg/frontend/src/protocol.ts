// Wire types for the /session WebSocket protocol (docs/protocol.md) and a
// small client-side store.  The store never decides selections: it only
// folds server frames into a renderable snapshot.

export const PROTOCOL_VERSION = "1";

export type Technique = "lattice" | "border_pie" | "peye";
export type Mode = "progressive" | "full";

export interface MenuNode {
  label: string;
  items: MenuNode[];
}

export interface Layout {
  technique: Technique;
  mode: Mode;
  breadth: number;
  depth: number;
  back_reserved: boolean;
  root: [number, number];
  radius: number;
  pie_radius: number;
  anchor_width: number;
  zone_width: number;
  zone_radius: number;
  label_radius: number | null;
  label_margin: number;
  crust_width: number;
  dwell_ms: number;
  cancel_blink_ms: number;
  item_angles: number[];
  menu: { breadth: number; depth: number; back_reserved: boolean; items: MenuNode[] };
}

export interface ConfiguredFrame {
  type: "Configured";
  protocol_version: string;
  layout: Layout;
}

export interface TaskFrame {
  type: "TaskAssigned";
  target: number[];
  labels: string[];
  repetition: number;
  repetitions_total: number;
}

export interface EventPayload {
  t: number;
  kind: string;
  level: number;
  index: number | null;
  x: number | null;
  y: number | null;
  path?: number[];
  progress?: number;
}

export interface AnchorFrame {
  level: number;
  index: number;
  path: number[];
  x: number;
  y: number;
  visible: boolean;
  active: boolean;
}

export interface StateFrame {
  type: "State";
  t: number;
  session: "waiting" | "open" | "done" | "cancelled";
  level: number;
  center: [number, number];
  dwell_progress_ms: number;
  cursor: [number, number] | null;
  anchors: AnchorFrame[];
}

export interface ResultFrame {
  type: "TrialResult";
  correct: boolean;
  ct_ms: number | null;
  selected: number[];
  target: number[];
  repetition: number;
}

export interface ErrorFrame {
  type: "Error";
  code: string;
  message: string;
}

export type ServerMessage =
  | ConfiguredFrame
  | TaskFrame
  | StateFrame
  | { type: "Event"; event: EventPayload }
  | ResultFrame
  | ErrorFrame;

/** Error codes after which the server closes the socket. */
const FATAL_CODES = new Set(["malformed", "protocol", "version"]);

/** Event kinds that represent a selection the UI must display. */
export const SELECTION_KINDS = new Set(["LevelSelected", "LeafSelected", "BackTaken"]);

export interface SelectionRow {
  kind: string;
  level: number;
  index: number | null;
  label: string;
  t: number;
}

export interface ClientState {
  layout: Layout | null;
  task: TaskFrame | null;
  frame: StateFrame | null;
  /** Item indices selected so far in the current trial. */
  path: number[];
  /** Breadcrumb rows, one per selection event of the current trial. */
  selections: SelectionRow[];
  result: ResultFrame | null;
  flash: string | null;
  fatal: ErrorFrame | null;
  errors: ErrorFrame[];
  /** Every Event payload received, for debugging and test assertions. */
  events: EventPayload[];
  /** Bumped once per applied message so render loops can skip idle frames. */
  version: number;
}

export function initialState(): ClientState {
  return {
    layout: null,
    task: null,
    frame: null,
    path: [],
    selections: [],
    result: null,
    flash: null,
    fatal: null,
    errors: [],
    events: [],
    version: 0,
  };
}

/** Label of the item at `path` in the configured menu tree. */
export function labelAt(layout: Layout, path: number[]): string {
  let items = layout.menu.items;
  let label = "";
  for (const idx of path) {
    const node = items[idx];
    if (!node) return "?";
    label = node.label;
    items = node.items;
  }
  return label;
}

function applyEvent(state: ClientState, ev: EventPayload): void {
  state.events.push(ev);
  switch (ev.kind) {
    case "MenuOpened":
      state.path = [];
      state.selections = [];
      state.flash = null;
      break;
    case "LevelSelected":
      if (ev.index !== null) state.path.push(ev.index);
      state.selections.push({
        kind: ev.kind,
        level: ev.level,
        index: ev.index,
        label: state.layout ? labelAt(state.layout, state.path) : "?",
        t: ev.t,
      });
      break;
    case "LeafSelected": {
      // paired with the LevelSelected for the same zone entry: confirm the
      // existing row rather than appending a duplicate selection
      if (ev.path) state.path = [...ev.path];
      const last = state.selections[state.selections.length - 1];
      if (last && last.level === ev.level && last.index === ev.index) {
        last.kind = ev.kind;
        last.t = ev.t;
      } else {
        state.selections.push({
          kind: ev.kind,
          level: ev.level,
          index: ev.index,
          label: state.layout ? labelAt(state.layout, state.path) : "?",
          t: ev.t,
        });
      }
      break;
    }
    case "BackTaken":
      state.path.pop();
      state.selections.push({
        kind: ev.kind,
        level: ev.level,
        index: ev.index,
        label: "back",
        t: ev.t,
      });
      break;
    case "Cancelled":
      // the server re-arms the same target silently; drop the partial trial
      state.path = [];
      state.selections = [];
      state.flash = "cancelled";
      break;
    default:
      // DwellProgress / ZoneEntered / ZoneExited: telemetry, nothing to fold
      break;
  }
}

/** Fold one server message into the snapshot (mutates `state`). */
export function apply(state: ClientState, msg: ServerMessage): void {
  switch (msg.type) {
    case "Configured":
      state.layout = msg.layout;
      state.frame = null;
      state.path = [];
      state.selections = [];
      state.result = null;
      state.flash = null;
      break;
    case "TaskAssigned":
      state.task = msg;
      state.path = [];
      state.selections = [];
      state.flash = null;
      break;
    case "State":
      state.frame = msg;
      break;
    case "Event":
      applyEvent(state, msg.event);
      break;
    case "TrialResult":
      state.result = msg;
      state.flash = msg.correct ? "correct" : "wrong";
      break;
    case "Error":
      if (FATAL_CODES.has(msg.code)) {
        state.fatal = msg;
      } else {
        state.errors.push(msg);
      }
      break;
  }
  state.version += 1;
}
