"""Seeded Monte Carlo experiment harness.

Runs a grid of cells (technique x menu structure x ring radius), each
with a seeded target set and four repetitions per target mirroring a
within-subjects protocol:

  rep 1   novice plan (label reading), tagged novice
  rep 2   experienced plan, tagged training and excluded from summaries
          (the transition rep: behavior is expert-like but unstable)
  rep 3+  experienced plan, tagged experienced

Every trial derives all randomness from (master_seed, trial_index), so
any subset of trials can be re-run independently and a full run is
byte-reproducible regardless of execution order.  Target sets derive
from (master_seed, cell identity), so adding cells does not reshuffle
existing ones.

Trial counts per cell are bent_mix totals (16 targets in the presets)
times trials_scale, times repetitions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from ._kernel import impl
from .engine import (
    LEAF_SELECTED,
    MENU_OPENED,
    Mode,
    SessionConfig,
    SessionEvent,
    Technique,
)
from .errors import ConfigurationError
from .geometry import LayoutParams
from .menu import MenuSpec, build_menu, path_pool_size, sample_target_paths
from .synth import Expertise, NoiseProfile, plan_scanpath, synthesize

# Bent-path mixes per menu structure, proportions out of 16 targets.
DEFAULT_BENT_MIXES: dict[tuple[int, int], dict[int, int]] = {
    (4, 3): {0: 1, 1: 6, 2: 9},
    (6, 3): {0: 1, 1: 4, 2: 11},
}

_TECH_CODE = {Technique.LATTICE: 0, Technique.BORDER_PIE: 1, Technique.PEYE: 2}

# Salts for independent seed streams under one master seed.
_SALT_TARGETS = 1
_SALT_TRIAL = 0


@dataclass(frozen=True)
class CellKey:
    technique: Technique
    breadth: int
    depth: int
    radius: float

    def label(self) -> str:
        return (
            f"{self.technique.value}-{self.breadth}x{self.depth}-r{self.radius:g}"
        )


@dataclass(frozen=True)
class ExperimentConfig:
    techniques: tuple[Technique, ...] = (Technique.LATTICE, Technique.BORDER_PIE)
    structures: tuple[tuple[int, int], ...] = ((4, 3), (6, 3))
    radii: tuple[float, ...] = (8.0, 10.0, 12.0)
    repetitions: int = 4
    trials_scale: int = 1
    bent_mixes: Mapping[tuple[int, int], Mapping[int, int]] = field(
        default_factory=lambda: {k: dict(v) for k, v in DEFAULT_BENT_MIXES.items()}
    )
    noise: NoiseProfile = field(default_factory=NoiseProfile)
    master_seed: int = 1_2345
    label_seed: int = 1
    back_reserved: bool = True
    anchor_width: float = 1.5
    zone_width: float = 4.0
    label_margin: float = 3.0
    crust_width: float = 4.0
    dwell_ms: float = 1000.0

    def __post_init__(self):
        object.__setattr__(
            self, "techniques", tuple(Technique(t) for t in self.techniques)
        )
        object.__setattr__(
            self, "structures", tuple((int(b), int(d)) for b, d in self.structures)
        )
        object.__setattr__(self, "radii", tuple(float(r) for r in self.radii))
        if self.repetitions < 1:
            raise ConfigurationError("repetitions must be >= 1")
        if self.trials_scale < 1:
            raise ConfigurationError("trials_scale must be >= 1")
        mixes = {}
        for key, mix in self.bent_mixes.items():
            bd = (int(key[0]), int(key[1]))
            mixes[bd] = {int(c): int(n) for c, n in mix.items()}
            if any(n < 0 for n in mixes[bd].values()) or sum(mixes[bd].values()) < 1:
                raise ConfigurationError(f"bent mix for {bd} must be positive")
        object.__setattr__(self, "bent_mixes", mixes)

    def cells(self) -> list[CellKey]:
        return [
            CellKey(t, b, d, r)
            for t in self.techniques
            for (b, d) in self.structures
            for r in self.radii
        ]

    def layout_for(self, radius: float) -> LayoutParams:
        return LayoutParams(
            anchor_width=self.anchor_width,
            zone_width=self.zone_width,
            radius=radius,
            label_margin=self.label_margin,
            crust_width=self.crust_width,
        )

    def mix_for(self, breadth: int, depth: int) -> dict[int, int]:
        mix = self.bent_mixes.get((breadth, depth))
        if mix is None:
            # any structure outside the presets: straight paths only
            mix = {0: min(16, path_pool_size(breadth, depth, 0, self.back_reserved, True))}
        return dict(mix)

    def with_noise_scale(self, scale: float) -> "ExperimentConfig":
        return replace(self, noise=self.noise.scaled(scale))

    @staticmethod
    def from_dict(raw: Mapping) -> "ExperimentConfig":
        exp = dict(raw.get("experiment", {}))
        noise_raw = dict(raw.get("noise", {}))
        layout_raw = dict(raw.get("layout", {}))
        kwargs: dict = {}
        if "techniques" in exp:
            kwargs["techniques"] = tuple(Technique(t) for t in exp["techniques"])
        if "structures" in exp:
            kwargs["structures"] = tuple(
                (int(b), int(d)) for b, d in exp["structures"]
            )
        for name in (
            "radii",
            "repetitions",
            "trials_scale",
            "master_seed",
            "label_seed",
            "back_reserved",
            "dwell_ms",
        ):
            if name in exp:
                kwargs[name] = exp[name]
        if "bent_mixes" in exp:
            mixes = {}
            for key, mix in exp["bent_mixes"].items():
                b, d = key.split("x")
                mixes[(int(b), int(d))] = {int(c): int(n) for c, n in mix.items()}
            kwargs["bent_mixes"] = mixes
        if noise_raw:
            dw = noise_raw.pop("fixation_dwell_ms", None)
            if dw is not None:
                from .synth import FixationDwells

                noise_raw["fixation_dwell_ms"] = FixationDwells(**dw)
            kwargs["noise"] = NoiseProfile(**noise_raw)
        for name in ("anchor_width", "zone_width", "label_margin", "crust_width"):
            if name in layout_raw:
                kwargs[name] = layout_raw[name]
        return ExperimentConfig(**kwargs)

    def to_resolved_dict(self) -> dict:
        """Full defaults-applied snapshot, written next to run outputs."""
        from dataclasses import asdict

        return {
            "experiment": {
                "techniques": [t.value for t in self.techniques],
                "structures": [list(s) for s in self.structures],
                "radii": list(self.radii),
                "repetitions": self.repetitions,
                "trials_scale": self.trials_scale,
                "master_seed": self.master_seed,
                "label_seed": self.label_seed,
                "back_reserved": self.back_reserved,
                "dwell_ms": self.dwell_ms,
                "bent_mixes": {
                    f"{b}x{d}": {str(c): n for c, n in mix.items()}
                    for (b, d), mix in self.bent_mixes.items()
                },
            },
            "noise": asdict(self.noise),
            "layout": {
                "anchor_width": self.anchor_width,
                "zone_width": self.zone_width,
                "label_margin": self.label_margin,
                "crust_width": self.crust_width,
            },
        }


@dataclass
class TrialRecord:
    trial_index: int
    technique: str
    breadth: int
    depth: int
    radius: float
    target: tuple[int, ...]
    bent: int
    repetition: int
    expertise: str
    training: bool
    completed: bool
    correct: bool
    ct_ms: Optional[float]
    selected: Optional[tuple[int, ...]]
    n_samples: int
    landings: np.ndarray  # (m, 2) measured landing points
    events: list[SessionEvent]

    def to_json_dict(self) -> dict:
        return {
            "schema": 1,
            "trial": self.trial_index,
            "technique": self.technique,
            "breadth": self.breadth,
            "depth": self.depth,
            "radius": self.radius,
            "target": list(self.target),
            "bent": self.bent,
            "rep": self.repetition,
            "expertise": self.expertise,
            "training": self.training,
            "completed": self.completed,
            "correct": self.correct,
            "ct_ms": self.ct_ms,
            "selected": list(self.selected) if self.selected is not None else None,
            "n_samples": self.n_samples,
            "landings": [[float(x), float(y)] for x, y in self.landings],
            "events": [e.to_json_dict() for e in self.events],
        }

    @staticmethod
    def from_json_dict(row: Mapping) -> "TrialRecord":
        return TrialRecord(
            trial_index=int(row["trial"]),
            technique=row["technique"],
            breadth=int(row["breadth"]),
            depth=int(row["depth"]),
            radius=float(row["radius"]),
            target=tuple(row["target"]),
            bent=int(row["bent"]),
            repetition=int(row["rep"]),
            expertise=row["expertise"],
            training=bool(row["training"]),
            completed=bool(row["completed"]),
            correct=bool(row["correct"]),
            ct_ms=row["ct_ms"],
            selected=tuple(row["selected"]) if row["selected"] is not None else None,
            n_samples=int(row["n_samples"]),
            landings=np.array(row["landings"], dtype=np.float64).reshape(-1, 2),
            events=[],  # events stay raw in the log; analyses use row fields
        )


def cell_targets(config: ExperimentConfig, cell: CellKey, menu: MenuSpec) -> list[tuple[tuple[int, ...], int]]:
    """Seeded (target, bent_class) sequence for one cell.

    Each bent class contributes mix[class] * trials_scale targets, drawn
    by cycling seeded permutations of the full class pool, so repeats are
    as balanced as the pool size allows.
    """
    mix = config.mix_for(cell.breadth, cell.depth)
    out: list[tuple[tuple[int, ...], int]] = []
    for c in sorted(mix):
        want = mix[c] * config.trials_scale
        if want == 0:
            continue
        pool_n = path_pool_size(
            cell.breadth, cell.depth, c, config.back_reserved, True
        )
        if pool_n == 0:
            raise ConfigurationError(
                f"no {c}-bend paths exist for {cell.breadth}x{cell.depth}"
            )
        pool = [
            tuple(p.indices)
            for p in sample_target_paths(menu, {c: pool_n}, 0)
        ]
        rng = np.random.default_rng(
            np.random.SeedSequence(
                [
                    config.master_seed,
                    _SALT_TARGETS,
                    _TECH_CODE[cell.technique],
                    cell.breadth,
                    cell.depth,
                    int(round(cell.radius * 1000)),
                    c,
                ]
            )
        )
        seq: list[int] = []
        while len(seq) < want:
            seq.extend(int(j) for j in rng.permutation(len(pool)))
        out.extend((pool[j], c) for j in seq[:want])
    return out


def _expertise_for_rep(rep: int) -> tuple[Expertise, bool]:
    """(plan expertise, training flag) for repetition number (1-based)."""
    if rep == 1:
        return Expertise.NOVICE, False
    if rep == 2:
        return Expertise.EXPERIENCED, True
    return Expertise.EXPERIENCED, False


def run_trial(
    session_config: SessionConfig,
    target: Sequence[int],
    expertise: Expertise,
    noise: NoiseProfile,
    master_seed: int,
    trial_index: int,
    plan=None,
) -> tuple[bool, bool, Optional[float], Optional[tuple[int, ...]], int, np.ndarray, list[SessionEvent]]:
    """Plan, synthesize, decode one trial.  Returns
    (completed, correct, ct_ms, selected, n_samples, landings, events)."""
    ss = np.random.SeedSequence([master_seed, _SALT_TRIAL, trial_index])
    plan_ss, synth_ss = ss.spawn(2)
    if plan is None:
        plan = plan_scanpath(
            session_config,
            tuple(target),
            expertise,
            rng=np.random.default_rng(plan_ss),
            dwells=noise.fixation_dwell_ms,
        )
    stream = synthesize(plan, noise, rng=np.random.default_rng(synth_ss))
    events = impl.decode_trial(stream.t, stream.x, stream.y, stream.valid, session_config)
    leaf = next((e for e in events if e.kind == LEAF_SELECTED), None)
    completed = leaf is not None
    correct = completed and leaf.path == tuple(target)
    ct = None
    if correct:
        opened = next(e for e in events if e.kind == MENU_OPENED)
        ct = leaf.t - opened.t
    selected = leaf.path if completed else None
    return completed, correct, ct, selected, len(stream.t), stream.landings, events


def run_experiment(
    config: ExperimentConfig,
    out_dir: Union[str, Path, None] = None,
    config_source: Union[str, Path, None] = None,
) -> list[TrialRecord]:
    """Run the full grid; optionally write run artifacts to out_dir.

    Artifacts: config.resolved.json (defaults applied), config.toml
    (copied when config_source names the file the run came from),
    trials.jsonl, summary.csv, dispersion.csv.
    """
    records: list[TrialRecord] = []
    trial_index = 0
    menus: dict[tuple[int, int], MenuSpec] = {}
    for cell in config.cells():
        key = (cell.breadth, cell.depth)
        if key not in menus:
            menus[key] = build_menu(
                cell.breadth,
                cell.depth,
                label_seed=config.label_seed,
                back_reserved=config.back_reserved,
            )
        menu = menus[key]
        session_config = SessionConfig(
            technique=cell.technique,
            menu=menu,
            params=config.layout_for(cell.radius),
            mode=Mode.PROGRESSIVE,
            dwell_ms=config.dwell_ms,
        )
        targets = cell_targets(config, cell, menu)
        # experienced plans are deterministic per target: plan once
        exp_plans: dict[tuple[int, ...], object] = {}
        for rep in range(1, config.repetitions + 1):
            expertise, training = _expertise_for_rep(rep)
            for target, bent in targets:
                plan = None
                if expertise is Expertise.EXPERIENCED:
                    plan = exp_plans.get(target)
                    if plan is None:
                        plan = plan_scanpath(
                            session_config,
                            target,
                            expertise,
                            dwells=config.noise.fixation_dwell_ms,
                        )
                        exp_plans[target] = plan
                completed, correct, ct, selected, n_samples, landings, events = run_trial(
                    session_config,
                    target,
                    expertise,
                    config.noise,
                    config.master_seed,
                    trial_index,
                    plan=plan,
                )
                records.append(
                    TrialRecord(
                        trial_index=trial_index,
                        technique=cell.technique.value,
                        breadth=cell.breadth,
                        depth=cell.depth,
                        radius=cell.radius,
                        target=target,
                        bent=bent,
                        repetition=rep,
                        expertise=expertise.value,
                        training=training,
                        completed=completed,
                        correct=correct,
                        ct_ms=ct,
                        selected=selected,
                        n_samples=n_samples,
                        landings=landings,
                        events=events,
                    )
                )
                trial_index += 1
    records.sort(key=lambda r: r.trial_index)
    if out_dir is not None:
        write_run_artifacts(records, config, Path(out_dir), config_source)
    return records


def write_trials_jsonl(records: Iterable[TrialRecord], path: Path) -> None:
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_json_dict(), separators=(",", ":")))
            fh.write("\n")


def read_trials_jsonl(path: Union[str, Path]) -> list[TrialRecord]:
    out = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(TrialRecord.from_json_dict(json.loads(line)))
    return out


def write_run_artifacts(
    records: list[TrialRecord],
    config: ExperimentConfig,
    out_dir: Path,
    config_source: Union[str, Path, None] = None,
) -> None:
    from . import analysis

    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "config.resolved.json").write_text(
        json.dumps(config.to_resolved_dict(), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    if config_source is not None:
        src = Path(config_source)
        if src.is_file():
            (out_dir / "config.toml").write_bytes(src.read_bytes())
    write_trials_jsonl(records, out_dir / "trials.jsonl")
    analysis.write_summary_csv(records, out_dir / "summary.csv")
    analysis.write_dispersion_csv(records, out_dir / "dispersion.csv")
