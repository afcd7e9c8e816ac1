"""Streaming selection decoder for gaze marking menus.

A session consumes timestamped gaze samples and emits selection events.
The flow is the same for every technique: the user dwells on the start
button (a disk the size of one selection zone) until the menu opens,
then walks the menu one level at a time.  What differs is how a level
is committed:

  lattice     the gaze point enters the selection zone of an anchor
              placed `radius` outward from the submenu center; the
              anchor becomes the next submenu center
  border_pie  the segment between consecutive valid samples exits the
              selection circle (radius `radius`); the crossing point
              selects its sector and becomes the next submenu center
  peye        a sample falls into the crust band [radius, radius+crust]
              around the submenu center; the sample point selects its
              sector and becomes the next submenu center

Selections trigger on the first qualifying valid sample; there is no
dwell inside zones.  Invalid samples advance time but are never used
for geometry (and never reset the start dwell).

When the menu reserves Back items, the item opposite the entry
direction at levels >= 2 pops one level instead of selecting.  A Back
at level 1 cannot occur via gaze (level 1 reserves nothing); the
convention for an explicit back request at level 1 is cancellation.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Optional

from . import geometry
from .errors import LayoutError, SessionStateError
from .geometry import LayoutParams, Point
from .menu import MenuSpec, back_index


class Technique(str, enum.Enum):
    LATTICE = "lattice"
    BORDER_PIE = "border_pie"
    PEYE = "peye"


class Mode(str, enum.Enum):
    PROGRESSIVE = "progressive"
    FULL = "full"


class SessionState(str, enum.Enum):
    WAITING = "waiting"  # dwelling on the start button
    OPEN = "open"
    DONE = "done"
    CANCELLED = "cancelled"


# Event kinds, also used as JSONL `kind` values (schema v1).
MENU_OPENED = "MenuOpened"
LEVEL_SELECTED = "LevelSelected"
LEAF_SELECTED = "LeafSelected"
BACK_TAKEN = "BackTaken"
CANCELLED = "Cancelled"
DWELL_PROGRESS = "DwellProgress"
ZONE_ENTERED = "ZoneEntered"
ZONE_EXITED = "ZoneExited"


@dataclass(frozen=True)
class GazeSample:
    t: float  # ms
    x: float  # deg
    y: float  # deg
    valid: bool = True


@dataclass(frozen=True)
class SessionEvent:
    kind: str
    t: float
    level: Optional[int] = None
    index: Optional[int] = None
    anchor: Optional[Point] = None  # re-center point of the selection
    landing: Optional[Point] = None  # gaze evidence that triggered it
    path: Optional[tuple[int, ...]] = None  # LeafSelected only
    progress: Optional[float] = None  # DwellProgress only, 0..1

    def to_json_dict(self) -> dict:
        """Schema v1 row: stable key order (t, kind, level, index, x, y, ...)."""
        d = {
            "t": self.t,
            "kind": self.kind,
            "level": self.level,
            "index": self.index,
            "x": self.landing[0] if self.landing else None,
            "y": self.landing[1] if self.landing else None,
        }
        if self.path is not None:
            d["path"] = list(self.path)
        if self.progress is not None:
            d["progress"] = self.progress
        return d


@dataclass(frozen=True)
class AnchorView:
    level: int
    index: int
    path: tuple[int, ...]
    position: Point
    visible: bool
    active: bool


@dataclass(frozen=True)
class SessionConfig:
    technique: Technique
    menu: MenuSpec
    params: LayoutParams = field(default_factory=LayoutParams)
    mode: Mode = Mode.PROGRESSIVE
    root: Point = (0.0, 0.0)
    dwell_ms: float = 1000.0
    cancel_blink_ms: float = 700.0

    def __post_init__(self):
        object.__setattr__(self, "technique", Technique(self.technique))
        object.__setattr__(self, "mode", Mode(self.mode))
        violations = geometry.validate_layout(self.params, self.menu.breadth)
        # label_margin is a usability guideline, not a decoding precondition:
        # sub-3-degree margins decode fine but push reading fixations toward
        # zones (measuring that effect is what the margin sweep is for).
        # Everything else breaks selection semantics and is rejected.
        blocking = [v for v in violations if v.code != "label_margin"]
        if blocking:
            raise LayoutError(
                "layout unusable: " + "; ".join(v.message for v in blocking)
            )


def open_session(config: SessionConfig, telemetry: bool = False) -> "Session":
    return Session(config, telemetry=telemetry)


class Session:
    """One menu interaction from start-button dwell to leaf selection."""

    def __init__(self, config: SessionConfig, telemetry: bool = False):
        self.config = config
        self.telemetry = telemetry
        self.state = SessionState.WAITING
        self.level = 0  # becomes 1 when the menu opens
        self._centers: list[Point] = [config.root]
        self._path: list[int] = []
        self._dwell_start: Optional[float] = None
        self._last_t: Optional[float] = None
        self._prev_valid: Optional[Point] = None
        self._in_zone: Optional[int] = None  # telemetry tracking
        self._dwell_progress = 0.0

    # -- read-only views ------------------------------------------------

    @property
    def center(self) -> Point:
        return self._centers[-1]

    @property
    def path(self) -> tuple[int, ...]:
        return tuple(self._path)

    @property
    def dwell_progress_ms(self) -> float:
        return self._dwell_progress

    def active_anchors(self) -> list[AnchorView]:
        """Visible anchors under the current mode; empty before the menu opens
        and always empty for techniques without anchors."""
        if self.state is not SessionState.OPEN:
            return []
        if self.config.technique is not Technique.LATTICE:
            return []
        out: list[AnchorView] = []
        b = self.config.menu.breadth
        d = self.config.menu.depth
        r = self.config.params.radius
        prefix = tuple(self._path)

        def walk(center: Point, level: int, path: tuple[int, ...]):
            for i in range(b):
                pos = geometry.anchor_position(center, i, b, r)
                out.append(
                    AnchorView(
                        level=level,
                        index=i,
                        path=path + (i,),
                        position=pos,
                        visible=True,
                        active=(level == self.level),
                    )
                )
                if self.config.mode is Mode.FULL and level < d:
                    walk(pos, level + 1, path + (i,))

        walk(self.center, self.level, prefix)
        if self.config.mode is Mode.PROGRESSIVE:
            out = [a for a in out if a.level == self.level]
        return out

    # -- inputs ----------------------------------------------------------

    def feed(self, samples: Iterable[GazeSample]) -> list[SessionEvent]:
        """Feed a batch; equivalent to feeding one sample at a time."""
        events: list[SessionEvent] = []
        for s in samples:
            events.extend(self.feed_sample(s))
            if self.state in (SessionState.DONE, SessionState.CANCELLED):
                break
        return events

    def feed_sample(self, sample: GazeSample) -> list[SessionEvent]:
        if self.state in (SessionState.DONE, SessionState.CANCELLED):
            raise SessionStateError(f"session is {self.state.value}")
        if self._last_t is not None and sample.t <= self._last_t:
            raise SessionStateError(
                f"timestamps must be strictly increasing ({sample.t} after {self._last_t})"
            )
        self._last_t = sample.t
        if not sample.valid:
            return []  # advances time, contributes no geometry
        events: list[SessionEvent] = []
        p = (sample.x, sample.y)
        if self.state is SessionState.WAITING:
            self._feed_waiting(sample, p, events)
        elif self.state is SessionState.OPEN:
            self._feed_open(sample, p, events)
        self._prev_valid = p
        return events

    def blink(self, duration_ms: float) -> list[SessionEvent]:
        """A blink of at least cancel_blink_ms cancels the session."""
        if self.state in (SessionState.DONE, SessionState.CANCELLED):
            raise SessionStateError(f"session is {self.state.value}")
        if duration_ms >= self.config.cancel_blink_ms:
            return self._cancel()
        return []

    def cancel(self) -> list[SessionEvent]:
        if self.state in (SessionState.DONE, SessionState.CANCELLED):
            raise SessionStateError(f"session is {self.state.value}")
        return self._cancel()

    def request_back(self) -> list[SessionEvent]:
        """Explicit back request (UI affordance): pops a level, or cancels
        at level 1 where there is no level to pop to."""
        if self.state is not SessionState.OPEN:
            raise SessionStateError("menu is not open")
        if self.level <= 1:
            return self._cancel()
        t = self._last_t if self._last_t is not None else 0.0
        return [self._take_back(t, index=None, landing=None)]

    # -- internals --------------------------------------------------------

    def _cancel(self) -> list[SessionEvent]:
        self.state = SessionState.CANCELLED
        t = self._last_t if self._last_t is not None else 0.0
        return [SessionEvent(kind=CANCELLED, t=t)]

    def _feed_waiting(self, sample: GazeSample, p: Point, events: list[SessionEvent]):
        half = self.config.params.zone_radius
        dx = p[0] - self.config.root[0]
        dy = p[1] - self.config.root[1]
        if dx * dx + dy * dy <= half * half:
            if self._dwell_start is None:
                self._dwell_start = sample.t
            self._dwell_progress = sample.t - self._dwell_start
            if self._dwell_progress >= self.config.dwell_ms:
                self.state = SessionState.OPEN
                self.level = 1
                events.append(SessionEvent(kind=MENU_OPENED, t=sample.t))
                # The opening sample is consumed by the dwell; selection
                # evaluation starts with the next sample.
            elif self.telemetry:
                events.append(
                    SessionEvent(
                        kind=DWELL_PROGRESS,
                        t=sample.t,
                        progress=self._dwell_progress / self.config.dwell_ms,
                    )
                )
        else:
            self._dwell_start = None  # full reset on leaving the disk
            self._dwell_progress = 0.0

    def _feed_open(self, sample: GazeSample, p: Point, events: list[SessionEvent]):
        tech = self.config.technique
        if tech is Technique.LATTICE:
            self._feed_lattice(sample, p, events)
        elif tech is Technique.BORDER_PIE:
            self._feed_border(sample, p, events)
        else:
            self._feed_peye(sample, p, events)

    def _feed_lattice(self, sample: GazeSample, p: Point, events: list[SessionEvent]):
        b = self.config.menu.breadth
        r = self.config.params.radius
        zone_w = self.config.params.zone_width
        center = self.center
        hit: Optional[int] = None
        hit_anchor: Optional[Point] = None
        for i in range(b):
            a = geometry.anchor_position(center, i, b, r)
            if geometry.selection_zone_contains(p, a, zone_w):
                hit = i
                hit_anchor = a
                break  # zones are pairwise disjoint by layout validation
        if self.telemetry and hit != self._in_zone:
            if self._in_zone is not None:
                events.append(
                    SessionEvent(kind=ZONE_EXITED, t=sample.t, level=self.level, index=self._in_zone)
                )
            if hit is not None:
                events.append(
                    SessionEvent(kind=ZONE_ENTERED, t=sample.t, level=self.level, index=hit)
                )
        self._in_zone = hit
        if hit is not None:
            self._commit(sample.t, hit, hit_anchor, p, events)

    def _feed_border(self, sample: GazeSample, p: Point, events: list[SessionEvent]):
        if self._prev_valid is None:
            return
        got = geometry.segment_circle_crossing(
            self._prev_valid, p, self.center, self.config.params.radius, self.config.menu.breadth
        )
        if got is None:
            return
        crossing, idx = got
        # One crossing per inbound sample; the next segment starts at the
        # raw sample, so a gaze stranded outside the new circle must
        # re-enter before another exit can select.
        self._commit(sample.t, idx, crossing, crossing, events)

    def _feed_peye(self, sample: GazeSample, p: Point, events: list[SessionEvent]):
        idx = geometry.crust_contains(
            p,
            self.center,
            self.config.params.radius,
            self.config.params.crust_width,
            self.config.menu.breadth,
        )
        if idx is not None:
            self._commit(sample.t, idx, p, p, events)

    def _commit(
        self, t: float, index: int, anchor: Point, landing: Point, events: list[SessionEvent]
    ):
        menu = self.config.menu
        if (
            menu.back_reserved
            and self.level >= 2
            and index == back_index(self._path[-1], menu.breadth)
        ):
            events.append(self._take_back(t, index=index, landing=landing))
            return
        events.append(
            SessionEvent(
                kind=LEVEL_SELECTED,
                t=t,
                level=self.level,
                index=index,
                anchor=anchor,
                landing=landing,
            )
        )
        self._path.append(index)
        self._centers.append(anchor)
        self._in_zone = None
        if self.level == menu.depth:
            self.state = SessionState.DONE
            events.append(
                SessionEvent(
                    kind=LEAF_SELECTED,
                    t=t,
                    level=self.level,
                    index=index,
                    anchor=anchor,
                    landing=landing,
                    path=tuple(self._path),
                )
            )
        else:
            self.level += 1

    def _take_back(
        self, t: float, index: Optional[int], landing: Optional[Point]
    ) -> SessionEvent:
        ev = SessionEvent(
            kind=BACK_TAKEN, t=t, level=self.level, index=index, landing=landing
        )
        self._path.pop()
        self._centers.pop()
        self.level -= 1
        self._in_zone = None
        return ev
