"""Random and targeted bot inspection on infection forests.

An inspected node exposes itself, its infector, and its children; exposure is
a set union, so a node reachable from two inspected neighbors counts once.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

from .growth import NO_PARENT, WormForest
from .rng import as_generator

RANDOM = "random"
TARGETED = "targeted"


@dataclass(frozen=True)
class DetectionReport:
    strategy: str
    accessed_ratio: float
    accessed_count: int
    exposed_count: int
    exposed_fraction: float
    dedup: bool = True


def _accessed_count(ratio: float, n: int) -> int:
    if not 0.0 < ratio <= 1.0:
        raise ValueError(f"accessed ratio {ratio} out of range")
    # round half up; the closed forms assume exact divisibility, real n breaks it
    return int(math.floor(ratio * n + 0.5))


def _expose(forest: WormForest, accessed: np.ndarray) -> int:
    n = forest.node_count
    exposed = np.zeros(n, dtype=bool)
    exposed[accessed] = True
    parents = forest.parent[accessed]
    exposed[parents[parents != NO_PARENT]] = True
    accessed_mask = np.zeros(n, dtype=bool)
    accessed_mask[accessed] = True
    non_root = forest.parent != NO_PARENT
    child_of_accessed = non_root.copy()
    child_of_accessed[non_root] = accessed_mask[forest.parent[non_root]]
    exposed |= child_of_accessed
    return int(exposed.sum())


def _report(strategy: str, forest: WormForest, ratio: float, accessed: np.ndarray) -> DetectionReport:
    exposed = _expose(forest, accessed)
    return DetectionReport(
        strategy=strategy,
        accessed_ratio=ratio,
        accessed_count=len(accessed),
        exposed_count=exposed,
        exposed_fraction=exposed / forest.node_count,
    )


def detect_random_on(forest: WormForest, accessed_ratio: float, rng) -> DetectionReport:
    """Inspect a uniform sample of round(A*n) distinct nodes."""
    gen = as_generator(rng)
    n = forest.node_count
    k = _accessed_count(accessed_ratio, n)
    accessed = gen.permutation(n)[:k]
    return _report(RANDOM, forest, accessed_ratio, accessed)


def detect_targeted_on(forest: WormForest, accessed_ratio: float, rng) -> DetectionReport:
    """Inspect the round(A*n) nodes with the most children, random tie-break."""
    gen = as_generator(rng)
    n = forest.node_count
    k = _accessed_count(accessed_ratio, n)
    if k == 0:
        accessed = np.empty(0, dtype=np.int64)
    else:
        # a sub-unit jitter orders equal counts uniformly without touching order
        # between distinct counts
        keys = forest.children_count + gen.random(n)
        accessed = np.argpartition(-keys, k - 1)[:k]
    return _report(TARGETED, forest, accessed_ratio, accessed)


def reports_to_csv(rows: list[tuple[DetectionReport, int]], path) -> None:
    """Write ``strategy,A,accessed,exposed,fraction,seed`` rows."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["strategy", "A", "accessed", "exposed", "fraction", "seed"])
        for report, seed in rows:
            w.writerow(
                [
                    report.strategy,
                    f"{report.accessed_ratio:.17g}",
                    report.accessed_count,
                    report.exposed_count,
                    f"{report.exposed_fraction:.17g}",
                    seed,
                ]
            )
