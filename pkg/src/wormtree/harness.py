"""Experiment orchestration: replication, aggregation, and file emission.

Every experiment writes CSV data, a JSON manifest (spec echo, versions, seeds,
content hashes), and rendered PNG figures into one output directory.  A rep r
of sweep value v draws from RngStream(base_seed, v * STREAM_BLOCK + 2r); the
+1 stream of each rep feeds detection, so all randomness is reproducible from
(spec, base_seed) alone.
"""

import csv
import hashlib
import json
import platform
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__, plotting
from .analytic import (
    CHILDREN,
    GENERATION,
    MarginalDist,
    children_dist,
    children_moments,
    generation_dist,
    generation_moments,
    harmonic,
    joint_table,
)
from .approx import (
    detect_random,
    detect_targeted,
    detect_targeted_capped,
    geometric_children,
    joint_approx,
    poisson_generation,
)
from .detection import detect_random_on, detect_targeted_on, reports_to_csv
from .epidemic import (
    EpidemicConfig,
    SubnetPopulation,
    curve_to_csv,
    fit_poisson_lambda,
    simulate,
    synth_population,
    time_to_fraction,
)
from .growth import (
    WormForest,
    aggregate_runs,
    empirical_children_dist,
    empirical_generation_dist,
    grow_uniform,
)
from .rng import RngStream

STREAM_BLOCK = 1_000_000  # stream ids per sweep value; bounds replications
JOINT_WINDOW = 41  # joint histogram cells kept per axis for parity data

SWEEP_AXES = ("scan_rate_mean", "scan_rate_std", "hitlist", "p_local", "max_children")


@dataclass
class ExperimentSpec:
    """Declarative description of one experiment."""

    kind: str
    output_dir: str
    replications: int = 1
    base_seed: int = 0
    figures: bool = True
    workers: int = 1
    # analytic / grow
    n: int | None = None
    i_max: int | None = None
    j_max: int | None = None
    # epidemic / detect / sweep
    epidemic: EpidemicConfig | None = None
    population: dict | None = None
    save_forests: bool = False
    # detect
    strategies: tuple = ("random", "targeted")
    accessed_ratios: tuple = (1 / 64, 1 / 32, 1 / 16)
    # sweep
    sweep_axis: str | None = None
    sweep_values: tuple = ()

    def __post_init__(self):
        if self.kind not in ("analytic", "grow", "epidemic", "detect", "sweep"):
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if self.replications >= STREAM_BLOCK:
            raise ValueError(f"replications must stay below {STREAM_BLOCK}")
        if self.kind in ("analytic", "grow") and not self.n:
            raise ValueError(f"{self.kind} experiments need n")
        if self.kind in ("epidemic", "detect", "sweep") and self.epidemic is None:
            raise ValueError(f"{self.kind} experiments need an epidemic config")
        if self.kind == "detect" and not self.accessed_ratios:
            raise ValueError("detect experiments need accessed ratios")
        if self.kind == "sweep":
            if self.sweep_axis not in SWEEP_AXES:
                raise ValueError(f"sweep axis must be one of {SWEEP_AXES}")
            if not self.sweep_values:
                raise ValueError("sweep experiments need values")
        for strategy in self.strategies:
            if strategy not in ("random", "targeted"):
                raise ValueError(f"unknown strategy {strategy!r}")

    @classmethod
    def from_dict(cls, kind: str, data: dict, **overrides) -> "ExperimentSpec":
        known = dict(data)
        epidemic = known.pop("epidemic", None)
        if epidemic is not None and not isinstance(epidemic, EpidemicConfig):
            epidemic = EpidemicConfig(**epidemic)
        detect = known.pop("detect", {})
        sweep = known.pop("sweep", {})
        merged = dict(
            known,
            epidemic=epidemic,
            strategies=tuple(detect.get("strategies", ("random", "targeted"))),
            accessed_ratios=tuple(detect.get("accessed_ratios", (1 / 64, 1 / 32, 1 / 16))),
            sweep_axis=sweep.get("axis"),
            sweep_values=tuple(sweep.get("values", ())),
        )
        merged.update({k: v for k, v in overrides.items() if v is not None})
        return cls(kind=kind, **merged)

    def to_dict(self) -> dict:
        data = asdict(self)
        if self.epidemic is not None:
            data["epidemic"] = asdict(self.epidemic)
        data["strategies"] = list(self.strategies)
        data["accessed_ratios"] = list(self.accessed_ratios)
        data["sweep_values"] = list(self.sweep_values)
        return data


def compare_dists(a: MarginalDist, b: MarginalDist) -> dict:
    """Max pointwise gap and total variation over the union support."""
    if a.kind != b.kind:
        raise ValueError(f"cannot compare {a.kind} with {b.kind}")
    width = max(len(a.mass), len(b.mass))
    am = np.pad(a.mass, (0, width - len(a.mass)))
    bm = np.pad(b.mass, (0, width - len(b.mass)))
    gap = np.abs(am - bm)
    return {"max_abs_diff": float(gap.max()), "total_variation": float(0.5 * gap.sum())}


# -- file helpers ---------------------------------------------------------


def _fmt(x) -> str:
    return f"{x:.17g}" if isinstance(x, float) else str(x)


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _write_runs_csv(path: Path, dists: list[MarginalDist]) -> None:
    rows = []
    for r, d in enumerate(dists):
        for k, p in enumerate(d.mass):
            rows.append([r, k, float(p)])
    _write_csv(path, ["run", "index", "mass"], rows)


def _write_summary_csv(path: Path, agg) -> None:
    rows = [
        [k, float(agg.mean[k]), float(agg.std[k]), float(agg.stderr[k])]
        for k in range(len(agg.mean))
    ]
    _write_csv(path, ["index", "mean", "std", "stderr"], rows)


def _write_json(path: Path, data: dict) -> None:
    with open(path, "w") as f:
        json.dump(data, f, indent=2, sort_keys=True)
        f.write("\n")


def _manifest(out: Path, spec: ExperimentSpec, extra: dict | None = None) -> dict:
    files = {}
    for p in sorted(out.rglob("*")):
        if p.is_file() and p.name != "manifest.json":
            files[str(p.relative_to(out))] = hashlib.sha256(p.read_bytes()).hexdigest()
    manifest = {
        "spec": spec.to_dict(),
        "versions": {
            "wormtree": __version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
        },
        "files": files,
    }
    if extra:
        manifest.update(extra)
    _write_json(out / "manifest.json", manifest)
    return manifest


def _build_population(spec: ExperimentSpec) -> SubnetPopulation | None:
    pop = spec.population
    if pop is None:
        return None
    if "path" in pop:
        return SubnetPopulation.load(pop["path"])
    cfg = spec.epidemic
    return synth_population(
        cfg.n0,
        cfg.subnet_bits,
        skew=pop.get("skew", "uniform"),
        exponent=float(pop.get("exponent", 1.0)),
        rng=RngStream(spec.base_seed, STREAM_BLOCK - 1),
    )


# -- replication workers (module-level for picklability) -------------------


def _grow_rep(args) -> dict:
    n, seed, rep = args
    forest = grow_uniform(n, RngStream(seed, 2 * rep))
    return {
        "children": empirical_children_dist(forest),
        "generation": empirical_generation_dist(forest),
    }


def _joint_hist(forest: WormForest) -> np.ndarray:
    ci = np.minimum(forest.children_count, JOINT_WINDOW - 1)
    gj = np.minimum(forest.generation, JOINT_WINDOW - 1)
    flat = np.bincount(ci * JOINT_WINDOW + gj, minlength=JOINT_WINDOW * JOINT_WINDOW)
    return flat.reshape(JOINT_WINDOW, JOINT_WINDOW) / forest.node_count


def _epidemic_rep(args) -> dict:
    config, population, seed, stream, save_dir, rep = args
    res = simulate(config, population, rng=RngStream(seed, stream))
    out = {
        "children": empirical_children_dist(res.forest),
        "generation": empirical_generation_dist(res.forest),
        "curve": res.curve,
        "complete": res.complete,
        "joint": _joint_hist(res.forest),
    }
    if save_dir is not None:
        res.forest.to_csv(Path(save_dir) / f"forest_run{rep:03d}.csv")
    return out


def _detect_rep(args) -> dict:
    config, population, seed, rep, strategies, ratios = args
    res = simulate(config, population, rng=RngStream(seed, 2 * rep))
    det_rng = RngStream(seed, 2 * rep + 1).generator()
    reports = []
    for ratio in ratios:
        for strategy in strategies:
            fn = detect_random_on if strategy == "random" else detect_targeted_on
            reports.append((fn(res.forest, ratio, det_rng), rep))
    return {"reports": reports, "complete": res.complete}


def _map_reps(fn, arglist, workers: int):
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, arglist))
    return [fn(a) for a in arglist]


# -- experiment kinds -------------------------------------------------------


def _run_analytic(spec: ExperimentSpec, out: Path) -> None:
    n = spec.n
    cd = children_dist(n, i_max=spec.i_max)
    gd = generation_dist(n, j_max=spec.j_max)
    jt = joint_table(n, i_max=spec.i_max, j_max=spec.j_max)
    cd.to_csv(out / "children.csv")
    gd.to_csv(out / "generation.csv")
    jt.to_csv(out / "joint.csv")
    cm, gm = children_moments(n), generation_moments(n)
    _write_json(
        out / "moments.json",
        {
            "n": n,
            "children": {"mean": cm.mean, "variance": cm.variance},
            "generation": {"mean": gm.mean, "variance": gm.variance},
        },
    )
    if spec.figures:
        lam = harmonic(n) - 1.0
        geo = [geometric_children(i) for i in range(len(cd.mass))]
        poi = [poisson_generation(lam, j) for j in range(len(gd.mass))]
        plotting.plot_marginal(
            cd.mass, overlays={"geometric(1/2)": geo}, kind=CHILDREN, logy=True,
            path=out / "children.png", title=f"Children distribution, n={n}",
        )
        plotting.plot_marginal(
            gd.mass, overlays={f"Poisson({lam:.3f})": poi}, kind=GENERATION,
            path=out / "generation.png", title=f"Generation distribution, n={n}",
        )
        approx = np.array(
            [[joint_approx(n, i, j) for j in range(jt.p.shape[1])] for i in range(jt.p.shape[0])]
        )
        plotting.plot_parity(
            jt.p, approx, path=out / "joint_parity.png",
            title=f"Joint distribution vs product form, n={n}",
        )


def _emit_dists(
    out: Path,
    spec: ExperimentSpec,
    children: list[MarginalDist],
    generations: list[MarginalDist],
    *,
    lam: float,
    title: str,
) -> dict:
    """Shared CSV/figure emission for grow and epidemic runs."""
    agg_c = aggregate_runs(children)
    agg_g = aggregate_runs(generations)
    _write_runs_csv(out / "children_runs.csv", children)
    _write_runs_csv(out / "generation_runs.csv", generations)
    _write_summary_csv(out / "children_summary.csv", agg_c)
    _write_summary_csv(out / "generation_summary.csv", agg_g)

    geo = np.array([geometric_children(i) for i in range(len(agg_c.mean))])
    poi = np.array([poisson_generation(lam, j) for j in range(len(agg_g.mean))])
    mean_c = MarginalDist(n=1, kind=CHILDREN, mass=agg_c.mean, truncated_mass=0.0)
    mean_g = MarginalDist(n=1, kind=GENERATION, mass=agg_g.mean, truncated_mass=0.0)
    ref_c = MarginalDist(n=1, kind=CHILDREN, mass=geo, truncated_mass=0.0)
    ref_g = MarginalDist(n=1, kind=GENERATION, mass=poi, truncated_mass=0.0)
    comparison = {
        "children_vs_geometric": compare_dists(mean_c, ref_c),
        "generation_vs_poisson": compare_dists(mean_g, ref_g),
        "poisson_lambda": lam,
    }
    if spec.figures:
        plotting.plot_marginal(
            agg_c.mean, agg_c.std, overlays={"geometric(1/2)": geo}, kind=CHILDREN,
            logy=True, path=out / "children.png", title=f"{title}: children",
        )
        plotting.plot_marginal(
            agg_g.mean, agg_g.std, overlays={f"Poisson({lam:.3f})": poi}, kind=GENERATION,
            path=out / "generation.png", title=f"{title}: generation",
        )
    return comparison


def _run_grow(spec: ExperimentSpec, out: Path) -> None:
    n = spec.n
    results = _map_reps(
        _grow_rep, [(n, spec.base_seed, r) for r in range(spec.replications)], spec.workers
    )
    children = [r["children"] for r in results]
    generations = [r["generation"] for r in results]
    comparison = _emit_dists(
        out, spec, children, generations, lam=harmonic(n) - 1.0,
        title=f"Uniform attachment, n={n}, {spec.replications} runs",
    )
    agg_c, agg_g = aggregate_runs(children), aggregate_runs(generations)
    exact_c = children_dist(n, i_max=len(agg_c.mean) - 1)
    exact_g = generation_dist(n, j_max=len(agg_g.mean) - 1)
    comparison["children_vs_recursion"] = compare_dists(
        MarginalDist(n=n, kind=CHILDREN, mass=agg_c.mean), exact_c
    )
    comparison["generation_vs_recursion"] = compare_dists(
        MarginalDist(n=n, kind=GENERATION, mass=agg_g.mean), exact_g
    )
    _write_json(out / "comparison.json", comparison)


def _run_epidemic(spec: ExperimentSpec, out: Path) -> dict:
    cfg = spec.epidemic
    population = _build_population(spec)
    if spec.population is not None and "path" not in spec.population:
        population.save(out / "population.csv")
    save_dir = out if spec.save_forests else None
    args = [
        (cfg, population, spec.base_seed, 2 * r, save_dir, r) for r in range(spec.replications)
    ]
    results = _map_reps(_epidemic_rep, args, spec.workers)

    children = [r["children"] for r in results]
    generations = [r["generation"] for r in results]
    agg_g = aggregate_runs(generations)
    lam = fit_poisson_lambda(
        MarginalDist(n=cfg.n0, kind=GENERATION, mass=agg_g.mean, truncated_mass=0.0)
    )
    comparison = _emit_dists(
        out, spec, children, generations, lam=lam,
        title=f"Epidemic n0={cfg.n0}, {spec.replications} runs",
    )
    comparison["poisson_lambda_uniform_reference"] = harmonic(cfg.n0) - 1.0
    comparison["incomplete_runs"] = sum(0 if r["complete"] else 1 for r in results)

    rows = []
    for r, res in enumerate(results):
        for t, v in enumerate(res["curve"]):
            rows.append([r, t, int(v)])
    _write_csv(out / "curves.csv", ["run", "tick", "infected"], rows)
    curve_to_csv(results[0]["curve"], out / "curve_run000.csv")

    joint = np.mean([r["joint"] for r in results], axis=0)
    jrows = []
    for i in range(JOINT_WINDOW):
        for j in range(JOINT_WINDOW):
            if joint[i, j] > 0:
                jrows.append([i, j, float(joint[i, j])])
    _write_csv(out / "joint_runs_mean.csv", ["i", "j", "mass"], jrows)

    _write_json(out / "comparison.json", comparison)
    if spec.figures:
        plotting.plot_curves(
            {f"run {r}": results[r]["curve"] for r in range(min(5, len(results)))},
            path=out / "curves.png", title=f"Infection curves, n0={cfg.n0}", n0=cfg.n0,
        )
        approx = np.array(
            [
                [geometric_children(i) * poisson_generation(lam, j) for j in range(JOINT_WINDOW)]
                for i in range(JOINT_WINDOW)
            ]
        )
        plotting.plot_parity(
            joint, approx, path=out / "joint_parity.png",
            title=f"Measured joint vs product form, n0={cfg.n0}",
        )
    return {"comparison": comparison}


def _run_detect(spec: ExperimentSpec, out: Path) -> None:
    cfg = spec.epidemic
    population = _build_population(spec)
    args = [
        (cfg, population, spec.base_seed, r, spec.strategies, spec.accessed_ratios)
        for r in range(spec.replications)
    ]
    results = _map_reps(_detect_rep, args, spec.workers)
    reports = [pair for res in results for pair in res["reports"]]
    reports_to_csv(reports, out / "reports.csv")

    summary = []
    for strategy in spec.strategies:
        for ratio in spec.accessed_ratios:
            fracs = np.array(
                [
                    rep.exposed_fraction
                    for rep, _ in reports
                    if rep.strategy == strategy and rep.accessed_ratio == ratio
                ]
            )
            analytic = (
                detect_random(ratio)
                if strategy == "random"
                else (
                    detect_targeted_capped(cfg.max_children, ratio)
                    if cfg.max_children is not None
                    else detect_targeted(ratio)
                )
            )
            std = float(fracs.std(ddof=1)) if len(fracs) > 1 else 0.0
            summary.append(
                [
                    strategy,
                    float(ratio),
                    float(fracs.mean()),
                    std,
                    std / np.sqrt(len(fracs)),
                    analytic,
                ]
            )
    _write_csv(
        out / "summary.csv",
        ["strategy", "A", "mean_fraction", "std", "stderr", "analytic"],
        summary,
    )
    if spec.figures:
        ratios = sorted(spec.accessed_ratios)
        curves = {}
        if "random" in spec.strategies:
            curves["random (no dedup)"] = (ratios, [detect_random(a) for a in ratios])
        if "targeted" in spec.strategies:
            if cfg.max_children is not None:
                curves[f"targeted, cap {cfg.max_children} (no dedup)"] = (
                    ratios,
                    [detect_targeted_capped(cfg.max_children, a) for a in ratios],
                )
            else:
                curves["targeted (no dedup)"] = (ratios, [detect_targeted(a) for a in ratios])
        plotting.plot_detection(
            [(row[0], row[1], row[2], row[4]) for row in summary],
            curves,
            path=out / "detection.png",
            title=f"Bot exposure, n0={cfg.n0}, {spec.replications} runs",
        )


def _run_sweep(spec: ExperimentSpec, out: Path) -> None:
    cfg = spec.epidemic
    axis = spec.sweep_axis
    rows = []
    overlay_children = {}
    for vi, value in enumerate(spec.sweep_values):
        sub_cfg = EpidemicConfig(**{**asdict(cfg), axis: value})
        sub_out = out / f"{axis}={value}"
        sub_out.mkdir(parents=True, exist_ok=True)
        sub_spec = ExperimentSpec(
            kind="epidemic",
            output_dir=str(sub_out),
            replications=spec.replications,
            base_seed=spec.base_seed,
            figures=spec.figures,
            workers=spec.workers,
            epidemic=sub_cfg,
            population=spec.population,
        )
        # one shared population per sweep; streams disjoint across values
        population = _build_population(sub_spec)
        args = [
            (sub_cfg, population, spec.base_seed, vi * STREAM_BLOCK + 2 * r, None, r)
            for r in range(spec.replications)
        ]
        results = _map_reps(_epidemic_rep, args, spec.workers)
        children = [r["children"] for r in results]
        generations = [r["generation"] for r in results]
        agg_c, agg_g = aggregate_runs(children), aggregate_runs(generations)
        _write_runs_csv(sub_out / "children_runs.csv", children)
        _write_runs_csv(sub_out / "generation_runs.csv", generations)
        _write_summary_csv(sub_out / "children_summary.csv", agg_c)
        _write_summary_csv(sub_out / "generation_summary.csv", agg_g)
        crows = []
        for r, res in enumerate(results):
            for t, v in enumerate(res["curve"]):
                crows.append([r, t, int(v)])
        _write_csv(sub_out / "curves.csv", ["run", "tick", "infected"], crows)

        lam = fit_poisson_lambda(
            MarginalDist(n=sub_cfg.n0, kind=GENERATION, mass=agg_g.mean, truncated_mass=0.0)
        )
        geo = np.array([geometric_children(i) for i in range(len(agg_c.mean))])
        poi = np.array([poisson_generation(lam, j) for j in range(len(agg_g.mean))])
        tv_c = 0.5 * float(np.abs(agg_c.mean - geo).sum())
        tv_g = 0.5 * float(np.abs(agg_g.mean - poi).sum())
        tail8 = float(agg_c.mean[8:].sum()) if len(agg_c.mean) > 8 else 0.0
        t99 = [time_to_fraction(r["curve"], 0.99, sub_cfg.n0) for r in results]
        t99 = [t for t in t99 if t is not None]
        rows.append(
            [
                value,
                float(agg_c.mean[0]),
                tail8,
                tv_c,
                lam,
                tv_g,
                float(np.mean(t99)) if t99 else float("nan"),
            ]
        )
        overlay_children[f"{axis}={value}"] = agg_c.mean
    _write_csv(
        out / "sweep_summary.csv",
        [axis, "leaf_share", "tail_ge8", "children_tv_geometric",
         "poisson_lambda_fit", "generation_tv_poisson", "mean_time_to_99pct"],
        rows,
    )
    if spec.figures:
        width = max(len(v) for v in overlay_children.values())
        fig_curves = {k: np.pad(v, (0, width - len(v))) for k, v in overlay_children.items()}
        fig_curves["geometric(1/2)"] = np.array(
            [geometric_children(i) for i in range(width)]
        )
        plotting.plot_marginal(
            None, overlays=fig_curves, kind=CHILDREN, logy=True,
            path=out / "sweep_children.png",
            title=f"Children distribution across {axis}",
        )


def run(spec: ExperimentSpec) -> dict:
    """Execute an experiment and return its manifest."""
    out = Path(spec.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    if spec.kind == "analytic":
        _run_analytic(spec, out)
    elif spec.kind == "grow":
        _run_grow(spec, out)
    elif spec.kind == "epidemic":
        _run_epidemic(spec, out)
    elif spec.kind == "detect":
        _run_detect(spec, out)
    else:
        _run_sweep(spec, out)
    return _manifest(out, spec)
