"""WebSocket session service.

One connection owns one decoder session plus the task flow used in the
demo: the server assigns a target path, the client repeats it four
times, then a KeyNext message unlocks a new target.  The server owns
target randomization and correctness judgment; the client only renders
what it is told.

Wire format: JSON text frames with a "type" discriminator, protocol
version "1".  Every Sample is answered by zero or more Event frames
followed by exactly one State frame, in that order, before the next
inbound frame is read.  The protocol logic lives in SessionChannel,
which is transport-free: feed it one decoded message, get back the
ordered reply list.  The FastAPI endpoint is a thin shell around it, so
replaying a stream through the service and through the library hit the
same code path.

Message reference lives in docs/protocol.md.
"""

# No deferred annotations here: FastAPI resolves the websocket endpoint's
# parameter annotation at runtime, and a stringified local import breaks it.

import json
from typing import Optional

import numpy as np

from .engine import (
    CANCELLED,
    LEAF_SELECTED,
    MENU_OPENED,
    GazeSample,
    Mode,
    SessionConfig,
    Technique,
    open_session,
)
from .errors import ConfigurationError, LayoutError
from .geometry import LayoutParams
from .menu import MenuSpec, build_menu, path_pool_size, sample_target_paths

PROTOCOL_VERSION = "1"
REPETITIONS_PER_TARGET = 4

# message parse errors that should drop the connection
_CLOSE = object()


class SessionChannel:
    """Protocol state machine for one connection, transport-free.

    handle() takes one decoded client message and returns the ordered
    list of reply dicts.  After a fatal error (malformed frame, version
    mismatch) the final reply is an Error and `closed` flips True; the
    transport should send the replies and close.
    """

    def __init__(self, task_seed: Optional[int] = None):
        self.closed = False
        self._hello_done = False
        self._default_task_seed = task_seed
        self._session = None
        self._config: Optional[SessionConfig] = None
        self._menu: Optional[MenuSpec] = None
        self._rng: Optional[np.random.Generator] = None
        self._paths: list[tuple[int, ...]] = []
        self._target: Optional[tuple[int, ...]] = None
        self._completed = 0  # trials finished on the current target
        self._opened_t: Optional[float] = None

    # -- inbound dispatch -------------------------------------------------

    def handle_text(self, raw: str) -> list[dict]:
        try:
            msg = json.loads(raw)
        except json.JSONDecodeError:
            return self._fatal("malformed", "frame is not valid JSON")
        if not isinstance(msg, dict):
            return self._fatal("malformed", "frame must be a JSON object")
        return self.handle(msg)

    def handle(self, msg: dict) -> list[dict]:
        kind = msg.get("type")
        if not isinstance(kind, str):
            return self._fatal("malformed", "missing message type")
        if not self._hello_done:
            if kind != "Hello":
                return self._fatal("protocol", "first message must be Hello")
            return self._hello(msg)
        handler = {
            "Configure": self._configure,
            "Sample": self._sample,
            "Blink": self._blink,
            "KeyNext": self._key_next,
            "Reset": self._reset,
        }.get(kind)
        if handler is None:
            return self._fatal("malformed", f"unknown message type {kind!r}")
        return handler(msg)

    # -- client messages --------------------------------------------------

    def _hello(self, msg: dict) -> list[dict]:
        version = msg.get("protocol_version")
        if version != PROTOCOL_VERSION:
            return self._fatal(
                "version",
                f"protocol_version {version!r} unsupported, server speaks {PROTOCOL_VERSION!r}",
            )
        self._hello_done = True
        return []

    def _configure(self, msg: dict) -> list[dict]:
        raw = msg.get("config")
        if raw is None:
            raw = {}
        if not isinstance(raw, dict):
            return [self._error("bad_config", "config must be an object")]
        try:
            config = self._build_config(raw)
        except (ConfigurationError, LayoutError, ValueError, TypeError, KeyError) as exc:
            return [self._error("bad_config", str(exc))]
        self._config = config
        self._menu = config.menu
        seed = raw.get("task_seed", self._default_task_seed)
        self._rng = np.random.default_rng(seed)
        self._paths = self._all_targets(config.menu)
        self._target = None
        self._completed = 0
        replies = [self._configured()]
        replies.append(self._assign_target())
        self._arm()
        return replies

    def _sample(self, msg: dict) -> list[dict]:
        if self._session is None:
            return [self._error("not_configured", "send Configure first")]
        try:
            sample = GazeSample(
                t=float(msg["t"]),
                x=float(msg["x"]),
                y=float(msg["y"]),
                valid=bool(msg.get("valid", True)),
            )
        except (KeyError, TypeError, ValueError):
            return [self._error("bad_sample", "Sample needs numeric t, x, y")]
        try:
            events = self._session.feed_sample(sample)
        except Exception as exc:  # out-of-order timestamps and kin
            return [self._error("bad_sample", str(exc))]
        for e in events:
            if e.kind == MENU_OPENED:
                self._opened_t = e.t
        replies = [{"type": "Event", "event": e.to_json_dict()} for e in events]
        leaf = next((e for e in events if e.kind == LEAF_SELECTED), None)
        if leaf is not None:
            replies.append(self._trial_result(leaf))
            self._completed += 1
            self._arm()
        elif any(e.kind == CANCELLED for e in events):
            # blink-cancel is handled in _blink; a Cancelled here means the
            # decoder aborted (e.g. back from root): re-arm, same target
            self._arm()
        replies.append(self._state(sample))
        return replies

    def _blink(self, msg: dict) -> list[dict]:
        if self._session is None:
            return [self._error("not_configured", "send Configure first")]
        try:
            duration = float(msg["duration"])
        except (KeyError, TypeError, ValueError):
            return [self._error("bad_blink", "Blink needs numeric duration")]
        events = self._session.blink(duration)
        replies = [{"type": "Event", "event": e.to_json_dict()} for e in events]
        if any(e.kind == CANCELLED for e in events):
            self._arm()  # same target, same repetition: cancel is not a trial
        return replies

    def _key_next(self, msg: dict) -> list[dict]:
        if self._session is None:
            return [self._error("not_configured", "send Configure first")]
        if self._completed < REPETITIONS_PER_TARGET:
            return [
                self._error(
                    "key_next_locked",
                    f"target needs {REPETITIONS_PER_TARGET} completed trials, "
                    f"have {self._completed}",
                )
            ]
        reply = self._assign_target()
        self._arm()
        return [reply]

    def _reset(self, msg: dict) -> list[dict]:
        if self._session is None:
            return [self._error("not_configured", "send Configure first")]
        self._arm()  # discard the in-flight trial
        return [self._task_assigned()]

    # -- server replies ---------------------------------------------------

    def _configured(self) -> dict:
        config = self._config
        params = config.params
        breadth = config.menu.breadth
        angles = [90.0 - i * (360.0 / breadth) for i in range(breadth)]
        try:
            label_radius = params.label_radius()
        except LayoutError:
            label_radius = None
        return {
            "type": "Configured",
            "protocol_version": PROTOCOL_VERSION,
            "layout": {
                "technique": config.technique.value,
                "mode": config.mode.value,
                "breadth": breadth,
                "depth": config.menu.depth,
                "back_reserved": config.menu.back_reserved,
                "root": [config.root[0], config.root[1]],
                "radius": params.radius,
                "pie_radius": params.pie_radius,
                "anchor_width": params.anchor_width,
                "zone_width": params.zone_width,
                "zone_radius": params.zone_radius,
                "label_radius": label_radius,
                "label_margin": params.label_margin,
                "crust_width": params.crust_width,
                "dwell_ms": config.dwell_ms,
                "cancel_blink_ms": config.cancel_blink_ms,
                "item_angles": angles,
                "menu": json.loads(config.menu.to_json()),
            },
        }

    def _assign_target(self) -> dict:
        idx = int(self._rng.integers(0, len(self._paths)))
        self._target = self._paths[idx]
        self._completed = 0
        return self._task_assigned()

    def _task_assigned(self) -> dict:
        return {
            "type": "TaskAssigned",
            "target": list(self._target),
            "labels": self._target_labels(self._target),
            "repetition": self._completed + 1,
            "repetitions_total": REPETITIONS_PER_TARGET,
        }

    def _trial_result(self, leaf) -> dict:
        correct = leaf.path == self._target
        opened = self._opened_t
        ct = leaf.t - opened if opened is not None else None
        return {
            "type": "TrialResult",
            "correct": bool(correct),
            "ct_ms": ct,
            "selected": list(leaf.path),
            "target": list(self._target),
            "repetition": self._completed + 1,
        }

    def _state(self, sample: GazeSample) -> dict:
        session = self._session
        return {
            "type": "State",
            "t": sample.t,
            "session": session.state.value,
            "level": session.level,
            "center": [session.center[0], session.center[1]],
            "dwell_progress_ms": session.dwell_progress_ms,
            "cursor": [sample.x, sample.y] if sample.valid else None,
            "anchors": [
                {
                    "level": a.level,
                    "index": a.index,
                    "path": list(a.path),
                    "x": a.position[0],
                    "y": a.position[1],
                    "visible": a.visible,
                    "active": a.active,
                }
                for a in session.active_anchors()
            ],
        }

    def _error(self, code: str, message: str) -> dict:
        return {"type": "Error", "code": code, "message": message}

    def _fatal(self, code: str, message: str) -> list[dict]:
        self.closed = True
        return [self._error(code, message)]

    # -- internals ----------------------------------------------------------

    def _build_config(self, raw: dict) -> SessionConfig:
        menu = build_menu(
            int(raw.get("breadth", 4)),
            int(raw.get("depth", 3)),
            label_seed=int(raw.get("label_seed", 1)),
            back_reserved=bool(raw.get("back_reserved", True)),
        )
        params = LayoutParams(
            anchor_width=float(raw.get("anchor_width", 1.5)),
            zone_width=float(raw.get("zone_width", 4.0)),
            radius=float(raw.get("radius", 10.0)),
            pie_radius=raw.get("pie_radius"),
            label_margin=float(raw.get("label_margin", 3.0)),
            crust_width=float(raw.get("crust_width", 4.0)),
        )
        root = raw.get("root", (0.0, 0.0))
        return SessionConfig(
            technique=Technique(raw.get("technique", "lattice")),
            menu=menu,
            params=params,
            mode=Mode(raw.get("mode", "progressive")),
            root=(float(root[0]), float(root[1])),
            dwell_ms=float(raw.get("dwell_ms", 1000.0)),
            cancel_blink_ms=float(raw.get("cancel_blink_ms", 700.0)),
        )

    @staticmethod
    def _all_targets(menu: MenuSpec) -> list[tuple[int, ...]]:
        """Every assignable full-depth path, all bend classes pooled."""
        out: list[tuple[int, ...]] = []
        for bends in range(menu.depth):
            n = path_pool_size(menu.breadth, menu.depth, bends, menu.back_reserved, True)
            if n:
                out.extend(
                    tuple(p.indices) for p in sample_target_paths(menu, {bends: n}, 0)
                )
        return out

    def _target_labels(self, target: tuple[int, ...]) -> list[str]:
        items = self._menu.items
        labels = []
        for idx in target:
            labels.append(items[idx].label)
            items = items[idx].items
        return labels

    def _arm(self) -> None:
        """Fresh decoder session for the next trial on the current target."""
        self._session = open_session(self._config)
        self._opened_t: Optional[float] = None


def create_app(static_dir: Optional[str] = None, task_seed: Optional[int] = None):
    """FastAPI app with the /session WebSocket endpoint.

    task_seed fixes target randomization for every connection; leave
    None for independent random targets (a connection can still pass
    task_seed in Configure).
    """
    from fastapi import FastAPI, WebSocket, WebSocketDisconnect

    app = FastAPI(title="gazemark session service")

    @app.websocket("/session")
    async def session_endpoint(ws: WebSocket):
        await ws.accept()
        channel = SessionChannel(task_seed=task_seed)
        try:
            while True:
                raw = await ws.receive_text()
                for reply in channel.handle_text(raw):
                    await ws.send_text(json.dumps(reply, separators=(",", ":")))
                if channel.closed:
                    await ws.close()
                    break
        except WebSocketDisconnect:
            pass

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="static")

    return app
