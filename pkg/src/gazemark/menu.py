"""Menu trees, target paths, and path taxonomy.

A menu is a uniform tree: every submenu shows `breadth` items, leaves
sit at `depth`.  When `back_reserved` is set, the item opposite the
direction a submenu was entered from acts as Back at levels >= 2, so
only breadth * (breadth-1)^(depth-1) leaves are selectable commands.

A target path is the sequence of item indices from the root to a leaf.
Its bent class counts direction changes along the way; experiment
designs mix bent classes explicitly because straight gestures are much
easier than doubly-bent ones.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .errors import ConfigurationError, InfeasiblePathRequest

_LETTERS = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"


def back_index(entry_index: int, breadth: int) -> int:
    """Index of the reserved Back item in a submenu entered via `entry_index`.

    The 180-degree opposite for even breadths; floor(breadth/2) steps
    around for odd ones (documented convention, no exact opposite exists).
    """
    return (entry_index + breadth // 2) % breadth


def classify_bends(indices: Iterable[int]) -> int:
    """Number of direction changes along a path (0 = straight gesture)."""
    seq = list(indices)
    return sum(1 for a, b in zip(seq, seq[1:]) if a != b)


@dataclass(frozen=True)
class ItemPath:
    """A root-to-leaf selection, as item indices per level."""

    indices: tuple[int, ...]
    bent_class: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))
        object.__setattr__(self, "bent_class", classify_bends(self.indices))

    @property
    def depth(self) -> int:
        return len(self.indices)


@dataclass(frozen=True)
class MenuItem:
    label: str
    items: tuple["MenuItem", ...] = ()


@dataclass(frozen=True)
class MenuSpec:
    breadth: int
    depth: int
    back_reserved: bool
    items: tuple[MenuItem, ...]

    @property
    def leaf_count(self) -> int:
        """Selectable leaf commands (Back items are not commands)."""
        if self.back_reserved:
            return self.breadth * (self.breadth - 1) ** (self.depth - 1)
        return self.breadth**self.depth

    def label_at(self, path: Iterable[int]) -> str:
        node: MenuItem | None = None
        items = self.items
        for idx in path:
            node = items[idx]
            items = node.items
        if node is None:
            raise ValueError("empty path")
        return node.label

    def labels_at(self, prefix: Iterable[int]) -> list[str]:
        """Labels of the submenu reached by `prefix` (root submenu for ())."""
        items = self.items
        for idx in prefix:
            items = items[idx].items
        return [it.label for it in items]

    def to_json(self) -> str:
        """Stable serialization: field order is fixed so bytes are hashable."""

        def node(it: MenuItem):
            return {"label": it.label, "items": [node(c) for c in it.items]}

        doc = {
            "breadth": self.breadth,
            "depth": self.depth,
            "back_reserved": self.back_reserved,
            "items": [node(it) for it in self.items],
        }
        return json.dumps(doc, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "MenuSpec":
        doc = json.loads(text)

        def node(d) -> MenuItem:
            return MenuItem(d["label"], tuple(node(c) for c in d["items"]))

        return cls(
            breadth=int(doc["breadth"]),
            depth=int(doc["depth"]),
            back_reserved=bool(doc["back_reserved"]),
            items=tuple(node(d) for d in doc["items"]),
        )


def _submenu_labels(rng: np.random.Generator, breadth: int) -> list[str]:
    # Distinct labels within one submenu: letters, then suffixed letters
    # (unreachable for breadth <= 26 but the contract allows cycling).
    pool_size = len(_LETTERS)
    rounds = -(-breadth // pool_size)
    pool = []
    for r in range(rounds):
        suffix = "" if r == 0 else str(r)
        pool.extend(ch + suffix for ch in _LETTERS)
    picks = rng.choice(len(pool), size=breadth, replace=False)
    return [pool[i] for i in picks]


def build_menu(breadth: int, depth: int, label_seed: int, back_reserved: bool = True) -> MenuSpec:
    """Uniform menu tree with seeded labels.

    Different seeds produce identical structure and differing labels only.
    """
    if not 2 <= breadth <= 12:
        raise ConfigurationError(f"breadth {breadth} outside [2, 12]")
    if depth < 1:
        raise ConfigurationError(f"depth {depth} must be >= 1")
    rng = np.random.default_rng(label_seed)

    def build_level(level: int) -> tuple[MenuItem, ...]:
        labels = _submenu_labels(rng, breadth)
        if level == depth:
            return tuple(MenuItem(lab) for lab in labels)
        return tuple(MenuItem(lab, build_level(level + 1)) for lab in labels)

    return MenuSpec(breadth=breadth, depth=depth, back_reserved=back_reserved, items=build_level(1))


def _excluded_per_bend(breadth: int, exclude_reversals: bool, back_reserved: bool) -> int:
    # A bend already rules out "same as previous".  Reversals only exist
    # for even breadths; the Back item coincides with the reversal there,
    # so the union is a single excluded index.
    if back_reserved:
        return 1
    if exclude_reversals and breadth % 2 == 0:
        return 1
    return 0


def path_pool_size(
    breadth: int,
    depth: int,
    bent_class: int,
    exclude_reversals: bool = True,
    back_reserved: bool = True,
) -> int:
    """Number of distinct paths in a bent class under the exclusion rules."""
    if bent_class < 0 or bent_class > depth - 1:
        return 0
    m = breadth - 1 - _excluded_per_bend(breadth, exclude_reversals, back_reserved)
    if m < 0:
        m = 0
    return breadth * math.comb(depth - 1, bent_class) * m**bent_class


def _blocked(prev: int, breadth: int, exclude_reversals: bool, back_reserved: bool) -> set[int]:
    blocked: set[int] = set()
    if back_reserved:
        blocked.add(back_index(prev, breadth))
    if exclude_reversals and breadth % 2 == 0:
        blocked.add((prev + breadth // 2) % breadth)
    return blocked


def _enumerate_class(
    breadth: int, depth: int, bent_class: int, exclude_reversals: bool, back_reserved: bool
) -> list[tuple[int, ...]]:
    out: list[tuple[int, ...]] = []

    def walk(prefix: list[int], bends: int):
        if len(prefix) == depth:
            if bends == bent_class:
                out.append(tuple(prefix))
            return
        if not prefix:
            for i in range(breadth):
                walk([i], 0)
            return
        if bends > bent_class:
            return
        if bends + (depth - len(prefix)) < bent_class:
            return
        prev = prefix[-1]
        blocked = _blocked(prev, breadth, exclude_reversals, back_reserved)
        for i in range(breadth):
            if i != prev and i in blocked:
                continue
            walk(prefix + [i], bends + (1 if i != prev else 0))

    walk([], 0)
    return out


def sample_target_paths(
    spec: MenuSpec,
    per_class: dict[int, int],
    seed: int,
    exclude_reversals: bool = True,
) -> list[ItemPath]:
    """Seeded, distinct target paths matching a bent-class mix.

    Raises InfeasiblePathRequest with the available pool sizes when a
    class cannot supply the requested count.
    """
    b, d = spec.breadth, spec.depth
    rng = np.random.default_rng(seed)
    pools = {
        c: path_pool_size(b, d, c, exclude_reversals, spec.back_reserved)
        for c in per_class
    }
    short = {c: n for c, n in per_class.items() if n > pools[c]}
    if short:
        raise InfeasiblePathRequest(
            f"requested {per_class} but pools are "
            f"{ {c: path_pool_size(b, d, c, exclude_reversals, spec.back_reserved) for c in sorted(per_class)} }"
        )
    out: list[ItemPath] = []
    for c in sorted(per_class):
        n = per_class[c]
        if n == 0:
            continue
        pool_n = pools[c]
        if pool_n <= 50_000 or n * 2 >= pool_n:
            candidates = _enumerate_class(b, d, c, exclude_reversals, spec.back_reserved)
            idx = rng.choice(len(candidates), size=n, replace=False)
            out.extend(ItemPath(candidates[i]) for i in idx)
        else:
            seen: set[tuple[int, ...]] = set()
            while len(seen) < n:
                seen.add(_construct_path(rng, b, d, c, exclude_reversals, spec.back_reserved))
            out.extend(ItemPath(p) for p in sorted(seen))
    return out


def _construct_path(
    rng: np.random.Generator,
    breadth: int,
    depth: int,
    bent_class: int,
    exclude_reversals: bool,
    back_reserved: bool,
) -> tuple[int, ...]:
    # Uniform over the class: bend positions uniform among combinations,
    # each bend choice uniform among the (state-independent) allowed count.
    positions = rng.choice(depth - 1, size=bent_class, replace=False) if bent_class else []
    bend_at = set(int(p) for p in positions)
    path = [int(rng.integers(breadth))]
    for k in range(1, depth):
        prev = path[-1]
        if (k - 1) in bend_at:
            options = [
                i
                for i in range(breadth)
                if i != prev and i not in _blocked(prev, breadth, exclude_reversals, back_reserved)
            ]
            path.append(options[int(rng.integers(len(options)))])
        else:
            path.append(prev)
    return tuple(path)
