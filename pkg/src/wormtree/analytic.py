"""Exact child-count and generation distributions of uniform-attachment infection trees.

The infection topology grows one node at a time: node k picks its infector
uniformly among the k-1 hosts already infected.  Under that growth law the
expected fraction of nodes with a given number of children and a given
generation (depth) obeys linear recursions in the tree size n, which this
module iterates in 64-bit floats:

    children:   c_n(0) = 1/2 for n >= 2
                c_n(i) = ((n-2) c_{n-1}(i) + c_{n-1}(i-1)) / n
    generation: g_n(j) = ((n-1) g_{n-1}(j) + g_{n-1}(j-1)) / n,  g_1(0) = 1
    joint:      p_n(0, j) = ((n-2) p_{n-1}(0, j) + g_{n-1}(j-1)) / n
                p_n(i, j) = ((n-2) p_{n-1}(i, j) + p_{n-1}(i-1, j)) / n

Every recursion references only equal-or-lower indices, so truncating a table
at (i_max, j_max) leaves the stored entries exact; the mass falling outside
the window is reported as ``truncated_mass``, never silently renormalized.
The one caveat is the joint recursion's g_{n-1} term, which is recovered from
the stored table's column sums: with a very tight i_max a sliver of that term
migrates into truncated_mass too.

Closed-form moments:

    E[children]   = (n-1)/n          Var[children]   = 2 - (n-1)/n^2 - 2 H_n / n
    E[generation] = H_n - 1          Var[generation] = H_n - H_{n,2}

with H_n the n-th harmonic number and H_{n,2} its order-2 analogue.
"""

import csv
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

# Index bound used when the caller does not supply one.  Children mass beyond
# i=128 is below 2^-129 for every n, and the generation distribution needs
# ~H_n terms, so 128 covers n up to ~1e50 at double precision.
DEFAULT_BOUND = 128

CHILDREN = "children"
GENERATION = "generation"


def _check_n(n: int) -> None:
    if n < 1:
        raise ValueError(f"tree size must be >= 1, got {n}")


@lru_cache(maxsize=None)
def harmonic(n: int) -> float:
    """H_n = sum_{i=1..n} 1/i, compensated summation."""
    _check_n(n)
    return math.fsum(1.0 / i for i in range(1, n + 1))


@lru_cache(maxsize=None)
def harmonic2(n: int) -> float:
    """H_{n,2} = sum_{i=1..n} 1/i^2, compensated summation."""
    _check_n(n)
    return math.fsum(1.0 / (i * i) for i in range(1, n + 1))


@dataclass(frozen=True)
class Moments:
    mean: float
    variance: float


@dataclass(frozen=True)
class MarginalDist:
    """One marginal distribution (children or generation) for a tree of n nodes.

    ``mass[k]`` is the probability of value k; indices above ``len(mass)-1``
    hold ``truncated_mass`` in total.
    """

    n: int
    kind: str
    mass: np.ndarray
    truncated_mass: float = 0.0

    def __post_init__(self):
        if self.kind not in (CHILDREN, GENERATION):
            raise ValueError(f"unknown kind {self.kind!r}")

    @property
    def support(self) -> np.ndarray:
        return np.arange(len(self.mass))

    def mean(self) -> float:
        """Mean by direct summation over the stored mass."""
        return float(np.dot(self.support, self.mass))

    def variance(self) -> float:
        """Variance by direct summation over the stored mass."""
        m = self.mean()
        return float(np.dot((self.support - m) ** 2, self.mass))

    def expected_counts(self) -> np.ndarray:
        """Expected number of nodes per value (n times the mass)."""
        return self.n * self.mass

    def to_csv(self, path) -> None:
        """Write ``index,mass`` rows at full double precision."""
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["index", "mass"])
            for k, p in enumerate(self.mass):
                w.writerow([k, f"{p:.17g}"])


@dataclass(frozen=True)
class JointTable:
    """Joint (children, generation) probabilities for a tree of n nodes.

    ``p[i, j]`` is the expected fraction of nodes with i children in
    generation j; mass outside the (i_max, j_max) window is accumulated in
    ``truncated_mass``.
    """

    n: int
    i_max: int
    j_max: int
    p: np.ndarray
    truncated_mass: float = 0.0

    @property
    def children_mass(self) -> np.ndarray:
        return self.p.sum(axis=1)

    @property
    def generation_mass(self) -> np.ndarray:
        return self.p.sum(axis=0)

    def expected_counts(self) -> np.ndarray:
        return self.n * self.p

    def to_csv(self, path) -> None:
        """Write ``i,j,mass`` rows at full double precision."""
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["i", "j", "mass"])
            for i in range(self.p.shape[0]):
                for j in range(self.p.shape[1]):
                    w.writerow([i, j, f"{self.p[i, j]:.17g}"])


def _leftover(mass: np.ndarray) -> float:
    return max(0.0, 1.0 - math.fsum(mass.ravel().tolist()))


def children_dist(n: int, i_max: int | None = None) -> MarginalDist:
    """Exact child-count distribution c_n for an n-node tree."""
    _check_n(n)
    if i_max is None:
        i_max = min(n - 1, DEFAULT_BOUND)
    if i_max < 0:
        raise ValueError("i_max must be >= 0")
    c = np.zeros(i_max + 1)
    c[0] = 1.0
    for m in range(2, n + 1):
        if i_max >= 1:
            c[1:] = ((m - 2) * c[1:] + c[:-1]) / m
        # closed seed: half of all nodes are leaves, for every n >= 2
        c[0] = 0.5
    return MarginalDist(n=n, kind=CHILDREN, mass=c, truncated_mass=_leftover(c))


def generation_dist(n: int, j_max: int | None = None) -> MarginalDist:
    """Exact generation (depth) distribution g_n for an n-node tree."""
    _check_n(n)
    if j_max is None:
        j_max = min(n - 1, DEFAULT_BOUND)
    if j_max < 0:
        raise ValueError("j_max must be >= 0")
    g = np.zeros(j_max + 1)
    g[0] = 1.0
    for m in range(2, n + 1):
        if j_max >= 1:
            g[1:] = ((m - 1) * g[1:] + g[:-1]) / m
        g[0] *= (m - 1) / m
    return MarginalDist(n=n, kind=GENERATION, mass=g, truncated_mass=_leftover(g))


def joint_table(n: int, i_max: int | None = None, j_max: int | None = None) -> JointTable:
    """Exact joint (children, generation) table p_n."""
    _check_n(n)
    if i_max is None:
        i_max = min(n - 1, DEFAULT_BOUND)
    if j_max is None:
        j_max = min(n - 1, DEFAULT_BOUND)
    if i_max < 0 or j_max < 0:
        raise ValueError("table bounds must be >= 0")
    p = np.zeros((i_max + 1, j_max + 1))
    p[0, 0] = 1.0
    for m in range(2, n + 1):
        g_prev = p.sum(axis=0)
        row0 = p[0, :].copy()
        if i_max >= 1:
            p[1:, :] = ((m - 2) * p[1:, :] + p[:-1, :]) / m
        p[0, 0] = (m - 2) * row0[0] / m
        if j_max >= 1:
            p[0, 1:] = ((m - 2) * row0[1:] + g_prev[:-1]) / m
    return JointTable(n=n, i_max=i_max, j_max=j_max, p=p, truncated_mass=_leftover(p))


def children_moments(n: int) -> Moments:
    """Closed-form mean/variance of the child count."""
    _check_n(n)
    mean = (n - 1) / n
    variance = 2.0 - (n - 1) / n**2 - 2.0 * harmonic(n) / n
    return Moments(mean=mean, variance=variance)


def generation_moments(n: int) -> Moments:
    """Closed-form mean/variance of the generation."""
    _check_n(n)
    h = harmonic(n)
    return Moments(mean=h - 1.0, variance=h - harmonic2(n))
