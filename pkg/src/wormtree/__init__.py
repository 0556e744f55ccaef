"""wormtree: infection-topology analysis and simulation.

Exact child-count/generation distributions of uniform-attachment infection
trees, their large-n closed forms, a discrete-time SI scanning-worm simulator
with per-infection attribution, and random/targeted bot-detection analysis.
"""

from .analytic import (
    CHILDREN,
    GENERATION,
    JointTable,
    MarginalDist,
    Moments,
    children_dist,
    children_moments,
    generation_dist,
    generation_moments,
    harmonic,
    harmonic2,
    joint_table,
)
from .approx import (
    DetectionParams,
    countermeasure_children,
    detect_random,
    detect_targeted,
    detect_targeted_capped,
    geometric_children,
    joint_approx,
    poisson_generation,
)
from .detection import DetectionReport, detect_random_on, detect_targeted_on
from .epidemic import (
    EpidemicConfig,
    SimResult,
    SubnetPopulation,
    draw_scan_rate,
    fit_poisson_lambda,
    scans_per_tick,
    simulate,
    simulate_exact,
    synth_population,
)
from .growth import (
    AggregateDist,
    WormForest,
    aggregate_runs,
    empirical_children_dist,
    empirical_generation_dist,
    grow_uniform,
    make_chain,
    make_star,
)
from .rng import RngStream

__version__ = "0.1.0"
