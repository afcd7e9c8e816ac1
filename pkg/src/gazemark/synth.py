"""Synthetic gaze generation: scanpath planning and an oculomotor noise model.

A trial is planned as a scanpath (fixation targets with dwell durations
and semantic tags), then rendered into a timestamped sample stream:

  fixations   samples at the tracker rate with Gaussian jitter around the
              point where the eye actually rests
  saccades    a straight flight lasting 21 + 2.2*amplitude ms with a
              minimum-jerk position profile; in-flight samples are marked
              invalid (vision is suppressed mid-saccade, and trackers
              routinely drop them), so selection logic only ever sees
              landing and fixation samples
  landing     the target plus Gaussian endpoint error with
              sd = noise_scale*(coeff*amplitude + floor); targeted
              movements whose true error exceeds corrective_threshold
              get one corrective saccade after corrective_latency_ms
  bias        one constant per-trial offset, uniform in a disk, added to
              every measured sample (tracker calibration error)

Border-exit movements (tag "border_exit") aim past a border rather than
at a visible object, so they carry untargeted_noise_mult times the
endpoint noise and never trigger correctives: without a landing object
there is no visual error signal to correct against.

Timestamps restart each segment on the segment's onset: within a
fixation or flight, consecutive samples are exactly 1000/rate apart, and
the first fixation sample falls exactly on the landing instant.  This
keeps zero-noise trial timing an exact closed-form sum of dwells and
flight durations.

All dwell durations used by planning live on NoiseProfile
(fixation_dwell_ms), so one profile object fully describes behavior.
The planning dwell before each saccade is the preceding fixation's
dwell; the start fixation therefore lasts dwell_ms (menu opening) +
initial (reaction) + one planning dwell.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field, replace
from typing import Iterator, Optional, Sequence, Union

import numpy as np

from . import geometry
from ._kernel import impl
from .engine import GazeSample, SessionConfig, Technique
from .errors import ConfigurationError
from .geometry import Point
from .menu import ItemPath, back_index

# Semantic fixation tags and their kernel codes.
TAG_START = "start"
TAG_LABEL_READ = "label_read"
TAG_ANCHOR = "anchor"
TAG_BORDER_EXIT = "border_exit"
TAG_CODES = {TAG_START: 0, TAG_LABEL_READ: 1, TAG_ANCHOR: 2, TAG_BORDER_EXIT: 3}

# How far beyond the selection border an exit movement aims, degrees.
BORDER_EXIT_OVERSHOOT = 2.0


class Expertise(str, enum.Enum):
    NOVICE = "novice"
    EXPERIENCED = "experienced"


@dataclass(frozen=True)
class FixationDwells:
    """Planned dwell durations (ms) by fixation role."""

    novice_label_read: float = 300.0
    experienced_anchor: float = 300.0
    initial: float = 300.0

    def __post_init__(self):
        for name in ("novice_label_read", "experienced_anchor", "initial"):
            if getattr(self, name) <= 0:
                raise ConfigurationError(f"fixation dwell {name} must be > 0")


@dataclass(frozen=True)
class NoiseProfile:
    sample_rate_hz: float = 120.0
    fixation_jitter_sd: float = 0.3  # deg, per axis
    endpoint_noise_coeff: float = 0.05  # fraction of saccade amplitude
    endpoint_noise_floor: float = 0.1  # deg
    tracker_bias_max: float = 1.0  # deg, uniform-in-disk radius
    corrective_threshold: float = 1.5  # deg of true landing error
    corrective_latency_ms: float = 150.0
    untargeted_noise_mult: float = 2.0  # border exits aim at empty space
    fixation_dwell_ms: FixationDwells = field(default_factory=FixationDwells)
    noise_scale: float = 1.0
    saccade_duration_base_ms: float = 21.0
    saccade_duration_slope_ms_per_deg: float = 2.2

    def __post_init__(self):
        if self.sample_rate_hz <= 0:
            raise ConfigurationError("sample_rate_hz must be > 0")
        if self.corrective_latency_ms <= 0:
            raise ConfigurationError("corrective_latency_ms must be > 0")
        if self.noise_scale < 0:
            raise ConfigurationError("noise_scale must be >= 0")
        for name in (
            "fixation_jitter_sd",
            "endpoint_noise_coeff",
            "endpoint_noise_floor",
            "tracker_bias_max",
            "corrective_threshold",
            "untargeted_noise_mult",
        ):
            if getattr(self, name) < 0:
                raise ConfigurationError(f"{name} must be >= 0")

    def scaled(self, noise_scale: float) -> "NoiseProfile":
        return replace(self, noise_scale=noise_scale)

    def saccade_duration_ms(self, amplitude_deg: float) -> float:
        return saccade_duration_ms(
            amplitude_deg,
            self.saccade_duration_base_ms,
            self.saccade_duration_slope_ms_per_deg,
        )


def saccade_duration_ms(
    amplitude_deg: float, base_ms: float = 21.0, slope_ms_per_deg: float = 2.2
) -> float:
    """Main-sequence flight duration.  Quantized to 1e-6 ms so that the
    duration of a round-number amplitude is an exact decimal (2.2*10
    must be 22 regardless of how the product rounds)."""
    return round(base_ms + slope_ms_per_deg * amplitude_deg, 6)


@dataclass(frozen=True)
class Fixation:
    x: float
    y: float
    dwell_ms: float
    tag: str

    def __post_init__(self):
        if self.tag not in TAG_CODES:
            raise ConfigurationError(f"unknown fixation tag {self.tag!r}")
        if self.dwell_ms <= 0:
            raise ConfigurationError("fixation dwell must be > 0")


@dataclass(frozen=True)
class Scanpath:
    fixations: tuple[Fixation, ...]
    expertise: Expertise
    target: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "fixations", tuple(self.fixations))
        object.__setattr__(self, "expertise", Expertise(self.expertise))
        object.__setattr__(self, "target", tuple(self.target))
        if not self.fixations or self.fixations[0].tag != TAG_START:
            raise ConfigurationError("scanpath must begin with a start fixation")

    def positions(self) -> np.ndarray:
        return np.array([(f.x, f.y) for f in self.fixations], dtype=np.float64)


def _as_rng(seed: Union[int, np.random.Generator, np.random.SeedSequence, None]):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _commit_point(
    technique: Technique,
    center: Point,
    index: int,
    breadth: int,
    params: geometry.LayoutParams,
) -> Point:
    """Where the eye aims to commit item `index` from `center`."""
    if technique is Technique.LATTICE:
        return geometry.anchor_position(center, index, breadth, params.radius)
    d = geometry.item_direction(index, breadth)
    if technique is Technique.BORDER_PIE:
        reach = params.radius + BORDER_EXIT_OVERSHOOT
    else:  # peye: aim at the middle of the crust band
        reach = params.radius + params.crust_width / 2.0
    return (center[0] + reach * d[0], center[1] + reach * d[1])


def _next_center(
    technique: Technique,
    center: Point,
    prev_point: Point,
    commit: Point,
    index: int,
    breadth: int,
    params: geometry.LayoutParams,
) -> Point:
    """Predicted submenu center after committing, mirroring the decoder's
    re-centering rule under zero noise."""
    if technique is Technique.LATTICE:
        return commit  # decoder re-centers exactly at the anchor
    if technique is Technique.PEYE:
        return commit  # decoder re-centers at the triggering sample
    got = geometry.segment_circle_crossing(
        prev_point, commit, center, params.radius, breadth
    )
    if got is None:  # unreachable for a planned exit from inside
        raise ConfigurationError("planned border exit does not cross the border")
    crossing, idx = got
    if idx != index:
        raise ConfigurationError(
            f"planned exit crosses sector {idx}, expected {index}"
        )
    return crossing


def plan_scanpath(
    config: SessionConfig,
    target: Union[ItemPath, Sequence[int]],
    expertise: Union[Expertise, str] = Expertise.EXPERIENCED,
    rng: Union[int, np.random.Generator, None] = None,
    dwells: Optional[FixationDwells] = None,
) -> Scanpath:
    """Plan the fixation sequence for one trial.

    Experienced users hop straight through the commit points (anchors or
    border exits).  Novices first read 1..breadth-1 labels at each level
    (count and order seeded), always ending on the target's label, then
    commit.  Back items are planned around, never read or selected.
    """
    expertise = Expertise(expertise)
    dwells = dwells if dwells is not None else FixationDwells()
    path = tuple(target.indices) if isinstance(target, ItemPath) else tuple(target)
    menu = config.menu
    b = menu.breadth
    if len(path) != menu.depth:
        raise ConfigurationError(
            f"target depth {len(path)} does not match menu depth {menu.depth}"
        )
    for k, idx in enumerate(path):
        if not 0 <= idx < b:
            raise ConfigurationError(f"target index {idx} out of range for breadth {b}")
        if menu.back_reserved and k >= 1 and idx == back_index(path[k - 1], b):
            raise ConfigurationError(
                f"target selects the back item at level {k + 1}"
            )

    generator = _as_rng(rng)
    params = config.params
    tech = config.technique
    first_plan = (
        dwells.experienced_anchor
        if expertise is Expertise.EXPERIENCED
        else dwells.novice_label_read
    )
    fixations: list[Fixation] = [
        Fixation(
            config.root[0],
            config.root[1],
            config.dwell_ms + dwells.initial + first_plan,
            TAG_START,
        )
    ]
    commit_tag = TAG_ANCHOR if tech is Technique.LATTICE else TAG_BORDER_EXIT
    center = config.root
    prev_point = config.root
    for k, idx in enumerate(path):
        if expertise is Expertise.NOVICE:
            distractors = [j for j in range(b) if j != idx]
            if menu.back_reserved and k >= 1:
                blocked = back_index(path[k - 1], b)
                distractors = [j for j in distractors if j != blocked]
            reads = int(generator.integers(1, b))  # breadth >= 2 always
            extra = min(reads - 1, len(distractors))
            order = (
                list(generator.choice(len(distractors), size=extra, replace=False))
                if extra > 0
                else []
            )
            for pick in order:
                lp = geometry.label_position(center, distractors[pick], b, params)
                fixations.append(
                    Fixation(lp[0], lp[1], dwells.novice_label_read, TAG_LABEL_READ)
                )
                prev_point = lp
            lp = geometry.label_position(center, idx, b, params)
            fixations.append(
                Fixation(lp[0], lp[1], dwells.novice_label_read, TAG_LABEL_READ)
            )
            prev_point = lp
        commit = _commit_point(tech, center, idx, b, params)
        fixations.append(
            Fixation(commit[0], commit[1], dwells.experienced_anchor, commit_tag)
        )
        center = _next_center(tech, center, prev_point, commit, idx, b, params)
        prev_point = commit
    return Scanpath(tuple(fixations), expertise, path)


@dataclass
class SampleStream:
    """Rendered trial: parallel arrays plus per-saccade measured landings."""

    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    valid: np.ndarray
    landings: np.ndarray  # (n_saccades, 2), measured (bias included)
    bias: Point = (0.0, 0.0)

    def __len__(self) -> int:
        return int(self.t.shape[0])

    def __iter__(self) -> Iterator[GazeSample]:
        for i in range(len(self)):
            yield GazeSample(
                float(self.t[i]), float(self.x[i]), float(self.y[i]), bool(self.valid[i])
            )

    def __getitem__(self, i: int) -> GazeSample:
        return GazeSample(
            float(self.t[i]), float(self.x[i]), float(self.y[i]), bool(self.valid[i])
        )

    def to_jsonl(self) -> str:
        lines = []
        for i in range(len(self)):
            lines.append(
                json.dumps(
                    {
                        "t": float(self.t[i]),
                        "x": float(self.x[i]),
                        "y": float(self.y[i]),
                        "valid": bool(self.valid[i]),
                    },
                    separators=(",", ":"),
                )
            )
        return "\n".join(lines) + ("\n" if lines else "")

    @staticmethod
    def from_jsonl(text: str) -> "SampleStream":
        ts, xs, ys, vs = [], [], [], []
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            ts.append(float(row["t"]))
            xs.append(float(row["x"]))
            ys.append(float(row["y"]))
            vs.append(bool(row.get("valid", True)))
        return SampleStream(
            t=np.array(ts, dtype=np.float64),
            x=np.array(xs, dtype=np.float64),
            y=np.array(ys, dtype=np.float64),
            valid=np.array(vs, dtype=bool),
            landings=np.zeros((0, 2), dtype=np.float64),
        )


def synthesize(
    scanpath: Scanpath,
    noise: NoiseProfile,
    rng: Union[int, np.random.Generator, None] = None,
    backend=None,
) -> SampleStream:
    """Render a scanpath into a measured sample stream.

    backend overrides the kernel module (default: the one selected at
    import); both kernels draw the same random stream, so results are
    bit-identical either way.
    """
    kernel = impl if backend is None else backend
    generator = _as_rng(rng)
    fx = np.array([f.x for f in scanpath.fixations], dtype=np.float64)
    fy = np.array([f.y for f in scanpath.fixations], dtype=np.float64)
    dw = np.array([f.dwell_ms for f in scanpath.fixations], dtype=np.float64)
    tags = np.array([TAG_CODES[f.tag] for f in scanpath.fixations], dtype=np.int64)
    t, x, y, valid, land_x, land_y, bx, by = kernel.synth_trial(
        fx,
        fy,
        dw,
        tags,
        noise.sample_rate_hz,
        noise.fixation_jitter_sd,
        noise.endpoint_noise_coeff,
        noise.endpoint_noise_floor,
        noise.corrective_threshold,
        noise.corrective_latency_ms,
        noise.tracker_bias_max,
        noise.untargeted_noise_mult,
        noise.noise_scale,
        noise.saccade_duration_base_ms,
        noise.saccade_duration_slope_ms_per_deg,
        generator,
    )
    return SampleStream(
        t=t,
        x=x,
        y=y,
        valid=valid,
        landings=np.column_stack([land_x, land_y])
        if len(land_x)
        else np.zeros((0, 2), dtype=np.float64),
        bias=(float(bx), float(by)),
    )


@dataclass(frozen=True)
class ScreenResult:
    estimated_bias: Point
    passed: bool
    per_point_offsets: tuple[Point, ...]


def nine_point_screen(
    noise: NoiseProfile,
    seed: Union[int, np.random.Generator, None] = None,
    bias: Optional[Point] = None,
    samples_per_point: int = 120,
    extent_deg: float = 10.0,
    threshold_deg: float = 2.0,
) -> ScreenResult:
    """Simulate the pre-study tracking-accuracy screen: fixate a 3x3 grid
    of points at +-extent, estimate the mean measured offset, pass iff its
    magnitude is within threshold.

    Calibration fixations are assumed perfectly targeted (participants
    keep correcting onto the dot), so the offset isolates jitter mean and
    constant tracker bias.  Pass `bias` to screen a specific tracker
    error; by default one is drawn per the profile.
    """
    generator = _as_rng(seed)
    k = noise.noise_scale
    if bias is None:
        if k > 0.0 and noise.tracker_bias_max > 0.0:
            u1 = generator.random()
            u2 = generator.random()
            r = noise.tracker_bias_max * k * math.sqrt(u1)
            a = 2.0 * math.pi * u2
            bias = (r * math.cos(a), r * math.sin(a))
        else:
            bias = (0.0, 0.0)
    jsd = noise.fixation_jitter_sd * k
    offsets: list[Point] = []
    for gy in (extent_deg, 0.0, -extent_deg):
        for gx in (-extent_deg, 0.0, extent_deg):
            if jsd > 0.0:
                z = generator.standard_normal((samples_per_point, 2))
                mx = float(np.mean(jsd * z[:, 0]))
                my = float(np.mean(jsd * z[:, 1]))
            else:
                mx = my = 0.0
            offsets.append((mx + bias[0], my + bias[1]))
    ex = sum(o[0] for o in offsets) / len(offsets)
    ey = sum(o[1] for o in offsets) / len(offsets)
    passed = math.sqrt(ex * ex + ey * ey) <= threshold_deg
    return ScreenResult((ex, ey), passed, tuple(offsets))
