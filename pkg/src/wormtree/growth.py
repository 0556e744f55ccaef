"""Infection forests: uniform-attachment growth, fixtures, and empirical stats.

A forest is stored as flat per-node arrays indexed by birth order; parents of
roots carry the sentinel -1.  Flat arrays keep million-node forests cheap to
build and to histogram.
"""

import csv
import hashlib
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .analytic import CHILDREN, GENERATION, MarginalDist
from .rng import as_generator

NO_PARENT = -1


@dataclass
class WormForest:
    """Attributed infection topology of one run.

    parent[v] is the node that infected v (NO_PARENT for roots), generation[v]
    its depth (roots at 0), birth_tick[v] the tick it was infected.  Mutable
    only while being built; treat as immutable afterwards.
    """

    parent: np.ndarray
    generation: np.ndarray
    birth_tick: np.ndarray
    root_count: int
    children_count: np.ndarray = field(default=None)  # derived when omitted

    def __post_init__(self):
        self.parent = np.asarray(self.parent, dtype=np.int64)
        self.generation = np.asarray(self.generation, dtype=np.int64)
        self.birth_tick = np.asarray(self.birth_tick, dtype=np.int64)
        if self.children_count is None:
            nonroot = self.parent[self.parent != NO_PARENT]
            self.children_count = np.bincount(nonroot, minlength=self.node_count).astype(np.int64)
        else:
            self.children_count = np.asarray(self.children_count, dtype=np.int64)

    @property
    def node_count(self) -> int:
        return len(self.parent)

    def validate(self) -> None:
        """Raise if the structural invariants do not hold."""
        n = self.node_count
        roots = self.parent == NO_PARENT
        if int(roots.sum()) != self.root_count:
            raise ValueError("root_count does not match sentinel parents")
        nonroot = ~roots
        if np.any(self.parent[nonroot] < 0) or np.any(self.parent[nonroot] >= n):
            raise ValueError("parent index out of range")
        if np.any(self.generation[roots] != 0):
            raise ValueError("roots must sit in generation 0")
        if np.any(self.generation[nonroot] != self.generation[self.parent[nonroot]] + 1):
            raise ValueError("generation must be parent generation + 1")
        if int(self.children_count.sum()) != n - self.root_count:
            raise ValueError("children counts must sum to the edge count")
        if np.any(self.birth_tick[nonroot] <= self.birth_tick[self.parent[nonroot]]):
            raise ValueError("children must be born strictly after their parent")

    def fingerprint(self) -> str:
        """Stable hash of the parent array, for determinism checks."""
        return hashlib.sha256(self.parent.tobytes()).hexdigest()

    def to_csv(self, path) -> None:
        """Write ``node_id,parent_id,generation,birth_tick`` rows."""
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["node_id", "parent_id", "generation", "birth_tick"])
            for v in range(self.node_count):
                w.writerow([v, self.parent[v], self.generation[v], self.birth_tick[v]])


def grow_uniform(n: int, rng) -> WormForest:
    """Grow an n-node tree; node k attaches uniformly to one of nodes 0..k-1."""
    if n < 1:
        raise ValueError("tree size must be >= 1")
    gen = as_generator(rng)
    parent = np.full(n, NO_PARENT, dtype=np.int64)
    if n > 1:
        # uniform integer in [0, k) for node k, all nodes at once
        parent[1:] = (gen.random(n - 1) * np.arange(1, n)).astype(np.int64)
    depth = np.zeros(n, dtype=np.int64)
    par = parent.tolist()
    dep = depth.tolist()
    for k in range(1, n):
        dep[k] = dep[par[k]] + 1
    depth = np.asarray(dep, dtype=np.int64)
    return WormForest(parent=parent, generation=depth, birth_tick=np.arange(n), root_count=1)


def make_chain(n: int) -> WormForest:
    """Every host infects exactly one successor: a path of n nodes."""
    if n < 1:
        raise ValueError("tree size must be >= 1")
    parent = np.arange(-1, n - 1, dtype=np.int64)
    return WormForest(parent=parent, generation=np.arange(n), birth_tick=np.arange(n), root_count=1)


def make_star(n: int) -> WormForest:
    """Patient zero infects everyone else directly."""
    if n < 1:
        raise ValueError("tree size must be >= 1")
    parent = np.zeros(n, dtype=np.int64)
    parent[0] = NO_PARENT
    gen = np.ones(n, dtype=np.int64)
    gen[0] = 0
    return WormForest(parent=parent, generation=gen, birth_tick=np.arange(n), root_count=1)


def empirical_children_dist(forest: WormForest) -> MarginalDist:
    """Normalized histogram of per-node child counts."""
    if forest.node_count == 0:
        raise ValueError("empty forest")
    mass = np.bincount(forest.children_count) / forest.node_count
    return MarginalDist(n=forest.node_count, kind=CHILDREN, mass=mass)


def empirical_generation_dist(forest: WormForest) -> MarginalDist:
    """Normalized histogram of per-node generations."""
    if forest.node_count == 0:
        raise ValueError("empty forest")
    mass = np.bincount(forest.generation) / forest.node_count
    return MarginalDist(n=forest.node_count, kind=GENERATION, mass=mass)


@dataclass(frozen=True)
class AggregateDist:
    """Index-wise mean and spread of a set of same-kind distributions."""

    kind: str
    mean: np.ndarray
    std: np.ndarray
    runs: int

    @property
    def stderr(self) -> np.ndarray:
        return self.std / np.sqrt(self.runs)


def aggregate_runs(dists: Sequence[MarginalDist]) -> AggregateDist:
    """Index-wise sample mean and unbiased std dev, zero-padded to the
    longest support."""
    if not dists:
        raise ValueError("need at least one distribution")
    kind = dists[0].kind
    if any(d.kind != kind for d in dists):
        raise ValueError("cannot aggregate distributions of mixed kinds")
    width = max(len(d.mass) for d in dists)
    stack = np.zeros((len(dists), width))
    for r, d in enumerate(dists):
        stack[r, : len(d.mass)] = d.mass
    mean = stack.mean(axis=0)
    std = stack.std(axis=0, ddof=1) if len(dists) > 1 else np.zeros(width)
    return AggregateDist(kind=kind, mean=mean, std=std, runs=len(dists))
