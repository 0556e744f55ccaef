"""Large-n closed forms and the bot-exposure formulas.

For large trees the child count is asymptotically geometric with parameter
1/2 and the generation is close to Poisson with parameter H_n - 1.  Both are
exposed here, together with the expected exposed-node fractions when a
defender inspects a ratio A of the nodes:

    random inspection:    D_R  = 3 A
    targeted inspection:  D_T  = A (3 - log2 A)
    targeted, cap m:      D_T' = (m+2) A                      if A <= 2^-m
                                 A (3 - log2 A) - 2^-m        otherwise

Each inspected node exposes itself, its infector, and its children; the
formulas count exposures without deduplication, so they overshoot what a
simulation with set-union semantics reports.
"""

import math
from dataclasses import dataclass

from .analytic import harmonic


@dataclass(frozen=True)
class DetectionParams:
    """Inspection budget: accessed ratio A and optional children cap m."""

    accessed_ratio: float
    max_children: int | None = None

    def __post_init__(self):
        if not 0.0 < self.accessed_ratio <= 1.0:
            raise ValueError("accessed_ratio must lie in (0, 1]")
        if self.max_children is not None and self.max_children < 1:
            raise ValueError("max_children must be >= 1")

    @property
    def depth(self) -> float:
        """Smallest child count of inspected nodes, -log2 A."""
        return -math.log2(self.accessed_ratio)


def geometric_children(i: int) -> float:
    """Limit probability of having exactly i children: (1/2)^(i+1)."""
    if i < 0:
        raise ValueError("child count must be >= 0")
    return 0.5 ** (i + 1)


def poisson_generation(lam: float, j: int) -> float:
    """Poisson(lam) pmf at j, evaluated in log space."""
    if lam < 0:
        raise ValueError("Poisson parameter must be >= 0")
    if j < 0:
        raise ValueError("generation must be >= 0")
    if lam == 0.0:
        return 1.0 if j == 0 else 0.0
    return math.exp(j * math.log(lam) - lam - math.lgamma(j + 1))


def joint_approx(n: int, i: int, j: int) -> float:
    """Product-form approximation (1/2)^(i+1) * Poisson(H_n - 1) at (i, j)."""
    if n < 2:
        raise ValueError("joint approximation needs n >= 2")
    return geometric_children(i) * poisson_generation(harmonic(n) - 1.0, j)


def _check_ratio(accessed_ratio: float, allow_zero: bool) -> None:
    lo_ok = accessed_ratio > 0.0 or (allow_zero and accessed_ratio == 0.0)
    if not (lo_ok and accessed_ratio <= 1.0):
        raise ValueError(f"accessed ratio {accessed_ratio} out of range")


def detect_random(accessed_ratio: float) -> float:
    """Expected exposed fraction under random inspection, 3A (no dedup)."""
    _check_ratio(accessed_ratio, allow_zero=True)
    return 3.0 * accessed_ratio


def detect_targeted(accessed_ratio: float) -> float:
    """Expected exposed fraction when the highest-degree A-fraction is
    inspected, A(3 - log2 A).

    Exact when A is a power of 1/2 (the inspected set is then precisely
    {children >= -log2 A}); other ratios use the same smooth expression.
    """
    _check_ratio(accessed_ratio, allow_zero=False)
    return accessed_ratio * (3.0 - math.log2(accessed_ratio))


def countermeasure_children(m: int, i: int) -> float:
    """Child-count distribution when every bot stops after m infections."""
    if m < 1:
        raise ValueError("cap must be >= 1")
    if i < 0:
        raise ValueError("child count must be >= 0")
    if i < m:
        return 0.5 ** (i + 1)
    if i == m:
        return 0.5**m
    return 0.0


def detect_targeted_capped(m: int, accessed_ratio: float) -> float:
    """Expected exposed fraction of targeted inspection against a capped botnet."""
    if m < 1:
        raise ValueError("cap must be >= 1")
    _check_ratio(accessed_ratio, allow_zero=False)
    if accessed_ratio <= 0.5**m:
        return (m + 2) * accessed_ratio
    return detect_targeted(accessed_ratio) - 0.5**m
