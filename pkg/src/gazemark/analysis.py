"""Aggregation and statistics over harness trial records.

Error rate counts both wrong selections and incomplete trials as errors.
Completion time aggregates over correct trials only; a cell with no
correct trials reports no CT rather than zero.  Training repetitions are
excluded from every table.

Dispersion summarizes how far measured landing points stray from the
ideal route: for each trial the route is the polyline from the menu
root through the true anchor chain of its target, and the statistic is
the pooled mean perpendicular distance of all landings to that route,
divided by the ring radius so cells of different size compare on one
scale.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .geometry import LayoutParams, lattice_points
from .harness import TrialRecord


@dataclass(frozen=True)
class CellSummary:
    technique: str
    breadth: int
    depth: int
    radius: float
    expertise: str
    n_trials: int
    n_correct: int
    n_incomplete: int
    error_rate: float
    mean_ct_ms: Optional[float]
    sd_ct_ms: Optional[float]

    def key(self) -> tuple:
        return (self.technique, self.breadth, self.depth, self.radius, self.expertise)


@dataclass(frozen=True)
class DispersionSummary:
    technique: str
    breadth: int
    depth: int
    radius: float
    n_trials: int
    n_landings: int
    dispersion: float  # mean perpendicular distance / radius


def summarize(records: Iterable[TrialRecord]) -> list[CellSummary]:
    groups: dict[tuple, list[TrialRecord]] = {}
    for rec in records:
        if rec.training:
            continue
        key = (rec.technique, rec.breadth, rec.depth, rec.radius, rec.expertise)
        groups.setdefault(key, []).append(rec)
    out = []
    for key in sorted(groups):
        rows = groups[key]
        n = len(rows)
        n_correct = sum(1 for r in rows if r.correct)
        n_incomplete = sum(1 for r in rows if not r.completed)
        cts = [r.ct_ms for r in rows if r.correct and r.ct_ms is not None]
        mean_ct = float(np.mean(cts)) if cts else None
        sd_ct = float(np.std(cts, ddof=1)) if len(cts) > 1 else None
        out.append(
            CellSummary(
                technique=key[0],
                breadth=key[1],
                depth=key[2],
                radius=key[3],
                expertise=key[4],
                n_trials=n,
                n_correct=n_correct,
                n_incomplete=n_incomplete,
                error_rate=1.0 - n_correct / n,
                mean_ct_ms=mean_ct,
                sd_ct_ms=sd_ct,
            )
        )
    return out


def _segment_distances(points: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Distance from each point (m,2) to segment a->b."""
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        d = points - a
        return np.sqrt(np.einsum("ij,ij->i", d, d))
    t = ((points - a) @ ab) / denom
    t = np.clip(t, 0.0, 1.0)
    proj = a + t[:, None] * ab
    d = points - proj
    return np.sqrt(np.einsum("ij,ij->i", d, d))


def polyline_distances(points: np.ndarray, vertices: Sequence[tuple[float, float]]) -> np.ndarray:
    """Min distance from each point to the polyline through vertices."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    verts = np.asarray(vertices, dtype=np.float64)
    if verts.shape[0] == 1:
        return _segment_distances(pts, verts[0], verts[0])
    best = np.full(pts.shape[0], np.inf)
    for i in range(verts.shape[0] - 1):
        np.minimum(best, _segment_distances(pts, verts[i], verts[i + 1]), out=best)
    return best


def target_route(
    target: Sequence[int],
    breadth: int,
    radius: float,
    root: tuple[float, float] = (0.0, 0.0),
) -> list[tuple[float, float]]:
    """Root plus the true anchor chain for a target path."""
    return [root] + lattice_points(root, tuple(target), breadth, radius)


def dispersion(records: Iterable[TrialRecord]) -> list[DispersionSummary]:
    """Pooled normalized landing dispersion per cell, experienced trials only.

    Incomplete and wrong trials still contribute: their landings exist
    and reflect the same motor/tracking process, and dropping them would
    understate dispersion exactly where selection goes worst.
    """
    groups: dict[tuple, list[TrialRecord]] = {}
    for rec in records:
        if rec.training or rec.expertise != "experienced":
            continue
        key = (rec.technique, rec.breadth, rec.depth, rec.radius)
        groups.setdefault(key, []).append(rec)
    out = []
    for key in sorted(groups):
        rows = groups[key]
        total = 0.0
        count = 0
        for rec in rows:
            if rec.landings.shape[0] == 0:
                continue
            route = target_route(rec.target, rec.breadth, rec.radius)
            dists = polyline_distances(rec.landings, route)
            total += float(dists.sum())
            count += dists.shape[0]
        disp = (total / count / key[3]) if count else 0.0
        out.append(
            DispersionSummary(
                technique=key[0],
                breadth=key[1],
                depth=key[2],
                radius=key[3],
                n_trials=len(rows),
                n_landings=count,
                dispersion=disp,
            )
        )
    return out


def write_summary_csv(records: Iterable[TrialRecord], path: Union[str, Path]) -> None:
    rows = summarize(records)
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(
            [
                "technique",
                "breadth",
                "depth",
                "radius",
                "expertise",
                "n_trials",
                "n_correct",
                "n_incomplete",
                "error_rate",
                "mean_ct_ms",
                "sd_ct_ms",
            ]
        )
        for r in rows:
            w.writerow(
                [
                    r.technique,
                    r.breadth,
                    r.depth,
                    r.radius,
                    r.expertise,
                    r.n_trials,
                    r.n_correct,
                    r.n_incomplete,
                    f"{r.error_rate:.6f}",
                    "" if r.mean_ct_ms is None else f"{r.mean_ct_ms:.3f}",
                    "" if r.sd_ct_ms is None else f"{r.sd_ct_ms:.3f}",
                ]
            )


def write_dispersion_csv(records: Iterable[TrialRecord], path: Union[str, Path]) -> None:
    rows = dispersion(records)
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(
            ["technique", "breadth", "depth", "radius", "n_trials", "n_landings", "dispersion"]
        )
        for r in rows:
            w.writerow(
                [
                    r.technique,
                    r.breadth,
                    r.depth,
                    r.radius,
                    r.n_trials,
                    r.n_landings,
                    f"{r.dispersion:.6f}",
                ]
            )


def _norm_sf(z: float) -> float:
    """Standard normal survival function."""
    return 0.5 * math.erfc(z / math.sqrt(2.0))


@dataclass(frozen=True)
class ProportionTest:
    z: float
    p_value: float
    p1: float
    p2: float


def two_proportion_z(k1: int, n1: int, k2: int, n2: int) -> ProportionTest:
    """One-sided pooled z-test that proportion 2 exceeds proportion 1.

    z > 0 means sample 2's rate is higher; p_value is for H1: p2 > p1.
    With a degenerate pooled rate (0 or 1) there is no evidence either
    way and z is 0.
    """
    if min(n1, n2) < 1:
        raise ValueError("both samples need at least one observation")
    p1 = k1 / n1
    p2 = k2 / n2
    pooled = (k1 + k2) / (n1 + n2)
    var = pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2)
    if var <= 0.0:
        return ProportionTest(z=0.0, p_value=0.5, p1=p1, p2=p2)
    z = (p2 - p1) / math.sqrt(var)
    return ProportionTest(z=z, p_value=_norm_sf(z), p1=p1, p2=p2)


@dataclass(frozen=True)
class WelchTest:
    t: float
    df: float
    p_value: float
    mean1: float
    mean2: float


def welch_t(sample1: Sequence[float], sample2: Sequence[float]) -> WelchTest:
    """One-sided Welch test that mean 2 exceeds mean 1.

    The p-value uses the normal approximation to the t distribution,
    which is adequate at the sample sizes the harness produces (hundreds
    per cell and up).
    """
    a = np.asarray(sample1, dtype=np.float64)
    b = np.asarray(sample2, dtype=np.float64)
    if a.size < 2 or b.size < 2:
        raise ValueError("both samples need at least two observations")
    va = a.var(ddof=1) / a.size
    vb = b.var(ddof=1) / b.size
    denom = va + vb
    if denom <= 0.0:
        t = 0.0 if b.mean() == a.mean() else math.inf * np.sign(b.mean() - a.mean())
        df = float(a.size + b.size - 2)
    else:
        t = float((b.mean() - a.mean()) / math.sqrt(denom))
        df = float(denom**2 / (va**2 / (a.size - 1) + vb**2 / (b.size - 1)))
    p = _norm_sf(t) if math.isfinite(t) else (0.0 if t > 0 else 1.0)
    return WelchTest(t=t, df=df, p_value=p, mean1=float(a.mean()), mean2=float(b.mean()))


def no_significant_decrease(
    counts: Sequence[tuple[int, int]], alpha_z: float = 1.645
) -> bool:
    """True when an ordered sequence of (errors, n) never significantly drops.

    Used for monotonicity checks over increasing noise: each consecutive
    pair must not show a significant decrease in error rate.  Small
    sampling dips are tolerated; a real reversal is not.
    """
    for (k1, n1), (k2, n2) in zip(counts, counts[1:]):
        test = two_proportion_z(k2, n2, k1, n1)  # H1: earlier > later
        if test.z > alpha_z:
            return False
    return True
