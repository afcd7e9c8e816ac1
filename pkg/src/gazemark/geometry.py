"""Planar geometry for radial gaze menus.

All coordinates and distances are degrees of visual angle in a screen
plane, +x right, +y up.  Item 0 of a ring points straight up and indices
advance clockwise, so item i of a breadth-N ring sits at the polar angle
90 - i*(360/N) (math convention, degrees).

Exactness matters here: the selection engine and the compiled kernel
both build on these formulas, and several downstream checks pin exact
values (cardinal directions, label distances).  Directions at multiples
of 90 degrees therefore come from a lookup table instead of cos/sin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .errors import LayoutError

Point = tuple[float, float]

# (cos, sin) at 0/90/180/270 degrees; index = (angle/90) mod 4.
_CARDINAL = ((1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0))


@dataclass(frozen=True)
class LayoutParams:
    """Radial menu geometry.

    anchor_width   visual size of an anchor point (rendering only)
    zone_width     diameter of each item selection zone, and of the
                   start-button dwell disk
    radius         distance from submenu center to anchor centers; also
                   the selection circle radius for border crossing
    pie_radius     radius of the drawn pie border (defaults to radius-2)
    label_margin   gap between label ring and the inner zone boundary
    crust_width    radial depth of the crust band used by crust selection
    """

    anchor_width: float = 1.5
    zone_width: float = 4.0
    radius: float = 10.0
    pie_radius: Optional[float] = field(default=None)
    label_margin: float = 3.0
    crust_width: float = 4.0

    def __post_init__(self):
        if self.pie_radius is None:
            object.__setattr__(self, "pie_radius", self.radius - 2.0)
        # Hard sanity only; questionable-but-constructible layouts are the
        # business of validate_layout, which reports them as data.
        if not (0 < self.anchor_width < self.zone_width):
            raise LayoutError(
                f"need 0 < anchor_width < zone_width, got "
                f"{self.anchor_width}, {self.zone_width}"
            )
        if self.radius <= 0:
            raise LayoutError(f"radius must be positive, got {self.radius}")
        if self.pie_radius <= 0 or self.pie_radius > self.radius:
            raise LayoutError(f"pie_radius {self.pie_radius} outside (0, {self.radius}]")
        if self.crust_width <= 0:
            raise LayoutError(f"crust_width must be positive, got {self.crust_width}")

    @property
    def zone_radius(self) -> float:
        return self.zone_width / 2.0

    def label_radius(self) -> float:
        """Distance from submenu center to the label ring.

        Raises LayoutError when the margin leaves no room for labels.
        """
        r = self.radius - self.zone_width / 2.0 - self.label_margin
        if r <= 0:
            raise LayoutError(
                f"label ring radius {r} <= 0 for radius={self.radius}, "
                f"zone_width={self.zone_width}, label_margin={self.label_margin}"
            )
        return r


@dataclass(frozen=True)
class LayoutViolation:
    code: str
    message: str


def item_direction(index: int, breadth: int) -> Point:
    """Unit vector toward item `index` of a breadth-N ring.

    Item 0 is up, order is clockwise.  Multiples of 90 degrees are exact.
    """
    if not 0 <= index < breadth:
        raise ValueError(f"index {index} outside [0, {breadth})")
    ang = 90.0 - index * (360.0 / breadth)
    q = ang / 90.0
    if q == math.floor(q):
        return _CARDINAL[int(q) % 4]
    rad = math.radians(ang)
    return (math.cos(rad), math.sin(rad))


def anchor_position(center: Point, index: int, breadth: int, radius: float) -> Point:
    """Anchor center of item `index` for a submenu centered at `center`."""
    dx, dy = item_direction(index, breadth)
    return (center[0] + radius * dx, center[1] + radius * dy)


def lattice_points(root: Point, path: tuple[int, ...], breadth: int, radius: float) -> list[Point]:
    """Anchor chain for `path`: each level's anchor relative to the previous one."""
    out = []
    cur = root
    for idx in path:
        cur = anchor_position(cur, idx, breadth, radius)
        out.append(cur)
    return out


def label_position(center: Point, index: int, breadth: int, params: LayoutParams) -> Point:
    """Center of item `index`'s label, on the label ring inside the pie."""
    dx, dy = item_direction(index, breadth)
    r = params.label_radius()
    return (center[0] + r * dx, center[1] + r * dy)


def selection_zone_contains(point: Point, anchor: Point, zone_width: float) -> bool:
    """True if `point` lies in the zone disk (diameter zone_width) at `anchor`.

    Boundary inclusive.
    """
    dx = point[0] - anchor[0]
    dy = point[1] - anchor[1]
    half = zone_width * 0.5
    return dx * dx + dy * dy <= half * half


def pie_contains(point: Point, center: Point, pie_radius: float) -> bool:
    """True if `point` lies inside or on the drawn pie disk."""
    dx = point[0] - center[0]
    dy = point[1] - center[1]
    return dx * dx + dy * dy <= pie_radius * pie_radius


def sector_of_angle(theta_deg: float, breadth: int) -> int:
    """Item index whose angular span contains `theta_deg`.

    Spans are centered on item directions; an angle exactly on the
    boundary between two spans resolves to the lower index.
    """
    best = -1
    best_d = math.inf
    for i in range(breadth):
        phi = 90.0 - i * (360.0 / breadth)
        d = abs(_wrap180(theta_deg - phi))
        if d < best_d:
            best_d = d
            best = i
    return best


def _wrap180(a: float) -> float:
    return (a + 180.0) % 360.0 - 180.0


def sector_of_point(point: Point, center: Point, breadth: int) -> int:
    theta = math.degrees(math.atan2(point[1] - center[1], point[0] - center[0]))
    return sector_of_angle(theta, breadth)


def segment_circle_crossing(
    p0: Point, p1: Point, center: Point, radius: float, breadth: int
) -> Optional[tuple[Point, int]]:
    """Exit crossing of segment p0->p1 through the circle at `center`.

    Selects on exit only: returns (crossing_point, item_index) iff
    |p0 - center| <= radius < |p1 - center|, else None.  The crossing
    point lies on the circle to ~1e-9 and the index is the sector the
    crossing falls in (boundary ties to the lower index).
    """
    fx = p0[0] - center[0]
    fy = p0[1] - center[1]
    gx = p1[0] - center[0]
    gy = p1[1] - center[1]
    rsq = radius * radius
    if fx * fx + fy * fy > rsq:
        return None
    if gx * gx + gy * gy <= rsq:
        return None
    dx = p1[0] - p0[0]
    dy = p1[1] - p0[1]
    a = dx * dx + dy * dy
    b = 2.0 * (fx * dx + fy * dy)
    c = fx * fx + fy * fy - rsq
    disc = b * b - 4.0 * a * c
    if disc < 0.0:  # can't happen given the radius checks; keep the guard
        return None
    t = (-b + math.sqrt(disc)) / (2.0 * a)
    if t < 0.0:
        t = 0.0
    elif t > 1.0:
        t = 1.0
    px = p0[0] + t * dx
    py = p0[1] + t * dy
    return (px, py), sector_of_point((px, py), center, breadth)


def crust_contains(
    point: Point, center: Point, radius: float, crust_width: float, breadth: int
) -> Optional[int]:
    """Item index if `point` lies in the crust band [radius, radius+crust_width].

    Both radial bounds inclusive; None when outside the band.
    """
    dx = point[0] - center[0]
    dy = point[1] - center[1]
    r = math.sqrt(dx * dx + dy * dy)
    if r < radius or r > radius + crust_width:
        return None
    return sector_of_point(point, center, breadth)


def validate_layout(params: LayoutParams, breadth: int) -> list[LayoutViolation]:
    """Check a layout against the constraints selection correctness rests on.

    Returns violations as data; an empty list means the layout is usable.
    """
    out: list[LayoutViolation] = []
    if not params.zone_width < params.radius:
        out.append(
            LayoutViolation(
                "param_order",
                f"zone_width {params.zone_width} must be smaller than "
                f"radius {params.radius}",
            )
        )
    spacing = 2.0 * params.radius * math.sin(math.pi / breadth)
    if not spacing > params.zone_width:
        out.append(
            LayoutViolation(
                "zone_overlap",
                f"adjacent anchors {spacing:.4f} apart but zones are "
                f"{params.zone_width} wide; sibling zones must be disjoint",
            )
        )
    label_r = params.radius - params.zone_width / 2.0 - params.label_margin
    if not label_r > 0:
        out.append(
            LayoutViolation(
                "label_radius",
                f"label ring radius {label_r:.4f} <= 0; no room for labels",
            )
        )
    if params.label_margin < 3.0:
        out.append(
            LayoutViolation(
                "label_margin",
                f"label-to-zone distance {params.label_margin} below the safe "
                "minimum of 3; reading fixations would stray into zones",
            )
        )
    if not params.pie_radius <= params.radius - params.zone_width / 2.0:
        out.append(
            LayoutViolation(
                "pie_overlap",
                f"pie radius {params.pie_radius} reaches into the zone ring "
                f"(must be <= {params.radius - params.zone_width / 2.0})",
            )
        )
    return out
