"""
Multiscale jump detection on sorted scaling vectors.

A sorted vector of a scaling factor is close to a staircase: one flat level
per cluster. ``detect`` finds the steps without a cluster count or threshold:

  1. sort, then build a pyramid by repeated pairwise averaging (``coarsen``);
  2. at every level, the suspicious cells are the strict local maxima of the
     two-sided difference cost ``jump_cost``;
  3. every finest-level suspicious cell marks a candidate step, and a
     candidate becomes a jump when a chain of suspicious ancestors (one cell
     of slack per level) exists up to the coarsest level.

Each coarse suspicious cell confirms at most one chain, the largest step
claiming it. A chain left without a cell at some level, because a
neighbouring jump shares its coarse cells there, stays alive only if its
step still dominates the ranks feeding its ancestor's cost once the other
candidate steps are taken out.

A jump at position p splits sorted ranks 0..p-1 from ranks p..k-1.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set, Tuple

import numpy as np

from .core import SortPermutation, sort_with_permutation
from .errors import InputError

logger = logging.getLogger(__name__)

MIN_LEVEL_LENGTH = 4
NOISE_FLOOR = 1e-12


@dataclass(frozen=True)
class JumpList:
    positions: Tuple[int, ...] = ()
    scales_confirmed: Tuple[int, ...] = ()
    length: int = 0

    def __post_init__(self):
        positions = tuple(int(p) for p in self.positions)
        if any(b <= a for a, b in zip(positions, positions[1:])):
            raise InputError(f"jump positions must be strictly increasing: {positions}")
        if positions and self.length and (positions[0] < 1 or positions[-1] > self.length - 1):
            raise InputError(f"jump positions {positions} out of range for length {self.length}")
        object.__setattr__(self, "positions", positions)
        object.__setattr__(self, "scales_confirmed", tuple(int(s) for s in self.scales_confirmed))

    @property
    def g(self) -> int:
        return len(self.positions) + 1

    def __len__(self) -> int:
        return len(self.positions)


@dataclass(frozen=True)
class Partition:
    labels: np.ndarray
    g: int = field(default=0)

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=int).ravel()
        g = int(self.g) if self.g else int(labels.max(initial=0))
        if labels.size and (labels.min() < 1 or labels.max() > g):
            raise InputError(f"labels must lie in 1..{g}")
        if labels.size and np.unique(labels).size != g:
            raise InputError(f"partition declares {g} clusters but uses {np.unique(labels).size}")
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "g", g)

    def __len__(self) -> int:
        return self.labels.size

    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.g + 1)[1:]


def jump_cost(v) -> np.ndarray:
    v = np.asarray(v, dtype=float).ravel()
    if v.size < 3:
        raise InputError(f"jump cost needs at least 3 values, got {v.size}")
    steps = np.abs(np.diff(v))
    F = np.zeros_like(v)
    F[1:] += steps
    F[:-1] += steps
    return F


def coarsen(v) -> np.ndarray:
    v = np.asarray(v, dtype=float).ravel()
    if v.size < 2:
        raise InputError(f"cannot coarsen a vector of length {v.size}")
    half = v.size // 2
    out = 0.5 * (v[0:2 * half:2] + v[1:2 * half:2])
    if v.size % 2:
        out = np.append(out, v[-1])
    return out


def suspicious_cells(F: np.ndarray, floor: float = 0.0) -> List[int]:
    """
    Strict local maxima of F above floor. A plateau counts once, at its
    leftmost cell; the ends of the vector only compare inward.
    """
    k = F.size
    cells = []
    i = 0
    while i < k:
        j = i
        while j + 1 < k and F[j + 1] == F[i]:
            j += 1
        if j - i + 1 < k and F[i] > floor:
            left_lower = i == 0 or F[i - 1] < F[i]
            right_lower = j == k - 1 or F[j + 1] < F[i]
            if left_lower and right_lower:
                cells.append(i)
        i = j + 1
    return cells


def _pyramid(v: np.ndarray) -> List[np.ndarray]:
    levels = [v]
    while levels[-1].size >= 2:
        nxt = coarsen(levels[-1])
        if nxt.size < MIN_LEVEL_LENGTH:
            break
        levels.append(nxt)
    return levels


def _step_position(v: np.ndarray, i: int) -> int:
    left = v[i] - v[i - 1] if i > 0 else 0.0
    right = v[i + 1] - v[i] if i < v.size - 1 else 0.0
    return i + 1 if right > left else i


def _claim(p: int, anc: int, s: int, cells: Set[int], F: np.ndarray) -> Optional[int]:
    """Suspicious cell in the ancestor window nearest to step p at level s."""
    window = [c for c in (anc - 1, anc, anc + 1) if c in cells]
    if not window:
        return None
    width = 2 ** s
    return min(window, key=lambda c: (abs((c + 0.5) * width - p), -F[c], c))


def _carries_support(v: np.ndarray, steps: np.ndarray, p: int, anc: int, s: int, alive) -> bool:
    """
    Whether step p still carries most of the variation across the ranks
    feeding the ancestor cost at level s once every other candidate step
    is taken out. This is what makes the ancestor suspicious when no
    neighbouring jump shares its coarse cells.
    """
    width = 2 ** s
    lo = max(1, (anc - 1) * width + 1)
    hi = min(v.size - 1, (anc + 2) * width - 1)
    others = v[hi] - v[lo - 1] - steps[p - 1]
    for q in alive:
        if q != p and lo <= q <= hi:
            others -= steps[q - 1]
    return steps[p - 1] > others


def detect(v) -> JumpList:
    v = np.asarray(v, dtype=float).ravel()
    k = v.size
    if k < MIN_LEVEL_LENGTH:
        raise InputError(f"jump detection needs at least {MIN_LEVEL_LENGTH} values, got {k}")
    if not np.all(np.isfinite(v)):
        raise InputError("jump detection input has non-finite values")
    v, _ = sort_with_permutation(v)
    span = v[-1] - v[0]
    if span == 0 or span <= NOISE_FLOOR * np.max(np.abs(v)):
        return JumpList((), (), k)

    floor = NOISE_FLOOR * span
    steps = np.diff(v)
    levels = _pyramid(v)
    costs = [jump_cost(level) for level in levels]
    suspicious = [set(suspicious_cells(F, floor)) for F in costs]

    # finest candidates: position -> finest cell
    alive: Dict[int, int] = {}
    for i in sorted(suspicious[0]):
        p = _step_position(v, i)
        if 1 <= p <= k - 1 and p not in alive and steps[p - 1] > floor:
            alive[p] = i
    confirmed = {p: 1 for p in alive}

    for s in range(1, len(levels)):
        claims: Dict[int, List[int]] = {}
        unclaimed = []
        for p, i in alive.items():
            c = _claim(p, i >> s, s, suspicious[s], costs[s])
            if c is None:
                unclaimed.append(p)
            else:
                claims.setdefault(c, []).append(p)

        survivors = {}
        width = 2 ** s
        for c, ps in claims.items():
            # one jump per coarse cell: the largest step, then the nearest
            owner = max(ps, key=lambda q: (steps[q - 1], -abs((c + 0.5) * width - q), -q))
            survivors[owner] = alive[owner]
            confirmed[owner] += 1
            unclaimed.extend(q for q in ps if q != owner)

        # a step hidden behind a neighbouring jump at this scale survives
        # only if it still dominates its own ancestor's support
        for p in unclaimed:
            if _carries_support(v, steps, p, alive[p] >> s, s, alive):
                survivors[p] = alive[p]
        alive = survivors

    positions = sorted(alive)
    logger.debug("detected %d jumps over %d levels at %s", len(positions), len(levels), positions)
    return JumpList(tuple(positions), tuple(confirmed[p] for p in positions), k)



def partition_from_jumps(perm: SortPermutation, jl: JumpList) -> Partition:
    positions = np.asarray(jl.positions, dtype=int)
    k = len(perm)
    if positions.size and (positions[0] < 1 or positions[-1] > k - 1):
        raise InputError(f"jump positions {jl.positions} invalid for {k} values")
    by_rank = 1 + np.searchsorted(positions, np.arange(k), side="right")
    labels = np.empty(k, dtype=int)
    labels[perm.order] = by_rank
    return Partition(labels, positions.size + 1)


def detect_partition(v) -> Tuple[Partition, JumpList, np.ndarray]:
    """
    Sort v, detect jumps and label every original index by its cluster.

    Returns the partition, the jump list and the sorted vector (the trace).
    """
    sorted_v, perm = sort_with_permutation(v)
    jl = detect(sorted_v)
    return partition_from_jumps(perm, jl), jl, sorted_v
