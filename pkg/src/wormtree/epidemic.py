"""Discrete-time SI worm propagation with per-infection attribution.

Time advances in fixed ticks.  Hosts infected at tick t begin scanning at
tick t+1.  Each scan targets one address: with probability ``p_local`` an
address sharing the scanner's /l prefix, otherwise an address drawn uniformly
from the whole space.  A scan landing on a susceptible host infects it and
records the scanner as its parent; when several scans hit the same host in
one tick the winner is uniform among them.  Hosts never recover, and an
optional ``max_children`` cap silences a scanner once it has infected that
many hosts.

Two engines share these semantics:

* ``simulate_exact`` materializes every scan.  It is the distributional
  reference, feasible only for small configurations (guarded).
* ``simulate`` aggregates.  Per tick and per stratum (the whole space for
  global scans, one /l subnet for local scans) it draws the NUMBER of hits
  binomially with per-scan probability susceptible/stratum-size, attributes
  the hits to scanners by sampling scan slots without replacement, and draws
  targets uniformly (with replacement) among the stratum's susceptibles.
  Conditioned on the same state this reproduces the per-scan hit law exactly,
  at a per-tick cost of O(new infections) for homogeneous scan rates and
  O(active scanners) otherwise.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .analytic import GENERATION, MarginalDist
from .growth import NO_PARENT, WormForest
from .rng import as_generator

EXACT_SCAN_GUARD = 1_000_000_000


@dataclass(frozen=True)
class EpidemicConfig:
    """All knobs of one propagation scenario.

    scan_rate_mean/std are scans per minute; a newly infected host draws its
    rate once from N(mean, std^2), clamped below at zero.
    """

    n0: int
    scan_rate_mean: float
    scan_rate_std: float = 0.0
    hitlist: int = 1
    tick_seconds: float = 20.0
    p_local: float = 0.0
    subnet_bits: int = 8
    max_children: int | None = None
    address_space: int = 2**32
    max_ticks: int = 1_000_000

    def __post_init__(self):
        if self.n0 < 1:
            raise ValueError("population must be >= 1")
        if self.scan_rate_mean <= 0:
            raise ValueError("scan_rate_mean must be > 0")
        if self.scan_rate_std < 0:
            raise ValueError("scan_rate_std must be >= 0")
        if not 1 <= self.hitlist <= self.n0:
            raise ValueError("hitlist must lie in [1, n0]")
        if self.tick_seconds <= 0:
            raise ValueError("tick_seconds must be > 0")
        if not 0.0 <= self.p_local < 1.0:
            raise ValueError("p_local must lie in [0, 1)")
        if not 0 <= self.subnet_bits <= 32:
            raise ValueError("subnet_bits must lie in [0, 32]")
        if self.max_children is not None and self.max_children < 1:
            raise ValueError("max_children must be >= 1")
        if self.address_space < self.n0:
            raise ValueError("address space smaller than the population")
        if self.address_space % (1 << self.subnet_bits) != 0:
            raise ValueError("address space must split evenly into /l subnets")
        if self.max_ticks < 1:
            raise ValueError("max_ticks must be >= 1")

    @property
    def subnet_size(self) -> int:
        return self.address_space >> self.subnet_bits

    @property
    def scans_per_tick_mean(self) -> float:
        return self.scan_rate_mean * self.tick_seconds / 60.0


@dataclass
class SubnetPopulation:
    """Vulnerable-host counts per /l prefix (sparse)."""

    subnet_bits: int
    counts: dict[int, int]

    def __post_init__(self):
        if not 0 <= self.subnet_bits <= 32:
            raise ValueError("subnet_bits must lie in [0, 32]")
        limit = 1 << self.subnet_bits
        for prefix, count in self.counts.items():
            if not 0 <= prefix < limit:
                raise ValueError(f"prefix {prefix} out of range for /{self.subnet_bits}")
            if count < 1:
                raise ValueError(f"prefix {prefix} has non-positive count")

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def save(self, path) -> None:
        with open(path, "w", newline="") as f:
            f.write(f"# l={self.subnet_bits} n0={self.total}\n")
            w = csv.writer(f)
            w.writerow(["prefix", "count"])
            for prefix in sorted(self.counts):
                w.writerow([prefix, self.counts[prefix]])

    @classmethod
    def load(cls, path) -> "SubnetPopulation":
        with open(path) as f:
            lines = f.read().splitlines()
        if not lines or not lines[0].startswith("#"):
            raise ValueError(f"{path}:1: expected leading '# l=<l> n0=<n0>' line")
        try:
            meta = dict(tok.split("=") for tok in lines[0].lstrip("# ").split())
            subnet_bits, declared = int(meta["l"]), int(meta["n0"])
        except (ValueError, KeyError) as exc:
            raise ValueError(f"{path}:1: malformed metadata line") from exc
        if len(lines) < 2 or lines[1].strip() != "prefix,count":
            raise ValueError(f"{path}:2: expected 'prefix,count' header")
        counts: dict[int, int] = {}
        for lineno, line in enumerate(lines[2:], start=3):
            if not line.strip():
                continue
            try:
                prefix_s, count_s = line.split(",")
                prefix, count = int(prefix_s), int(count_s)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: malformed row {line!r}") from exc
            if prefix in counts:
                raise ValueError(f"{path}:{lineno}: duplicate prefix {prefix}")
            counts[prefix] = count
        pop = cls(subnet_bits=subnet_bits, counts=counts)
        if pop.total != declared:
            raise ValueError(f"{path}: counts sum to {pop.total}, header declares {declared}")
        return pop


def synth_population(
    n0: int,
    subnet_bits: int,
    skew: str = "uniform",
    exponent: float = 1.0,
    rng=None,
) -> SubnetPopulation:
    """Synthesize a vulnerable-host layout across /l prefixes.

    ``uniform`` spreads hosts as evenly as the division allows; ``zipf``
    assigns rank weights (r+1)^-exponent to the prefixes in random order and
    draws counts multinomially, giving the uneven layouts seen in practice.
    """
    if n0 < 1:
        raise ValueError("population must be >= 1")
    n_prefixes = 1 << subnet_bits
    if skew == "uniform":
        base, rem = divmod(n0, n_prefixes)
        counts = {q: base + (1 if q < rem else 0) for q in range(n_prefixes)}
    elif skew == "zipf":
        if exponent <= 0:
            raise ValueError("zipf exponent must be > 0")
        gen = as_generator(rng if rng is not None else 0)
        weights = (np.arange(1, n_prefixes + 1, dtype=float)) ** (-exponent)
        weights /= weights.sum()
        order = gen.permutation(n_prefixes)
        drawn = gen.multinomial(n0, weights)
        counts = {int(order[r]): int(c) for r, c in enumerate(drawn) if c > 0}
    else:
        raise ValueError(f"unknown skew {skew!r}")
    return SubnetPopulation(
        subnet_bits=subnet_bits, counts={q: c for q, c in counts.items() if c > 0}
    )


def scans_per_tick(rate: float, tick_seconds: float, rng) -> int:
    """Number of scans a host emits in one tick.

    Deterministic floor(rate * tick / 60) plus one Bernoulli draw for the
    fractional remainder, so the expectation is exactly rate * tick / 60.
    """
    if rate < 0:
        raise ValueError("rate must be >= 0")
    gen = as_generator(rng)
    per_tick = rate * tick_seconds / 60.0
    base = int(per_tick)
    frac = per_tick - base
    return base + (1 if frac > 0 and gen.random() < frac else 0)


def draw_scan_rate(mean: float, std: float, rng) -> float:
    """One scan rate from N(mean, std^2), clamped below at zero."""
    if std < 0:
        raise ValueError("std must be >= 0")
    gen = as_generator(rng)
    return max(0.0, float(gen.normal(mean, std)))


def fit_poisson_lambda(dist: MarginalDist) -> float:
    """Poisson parameter fitted to a generation distribution (its mean)."""
    if dist.kind != GENERATION:
        raise ValueError("Poisson fit expects a generation distribution")
    total = float(dist.mass.sum())
    if len(dist.mass) == 0 or total <= 0.0:
        raise ValueError("cannot fit an empty distribution")
    return float(np.dot(np.arange(len(dist.mass)), dist.mass) / total)


def curve_to_csv(curve: np.ndarray, path) -> None:
    """Write ``tick,infected`` rows."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["tick", "infected"])
        for t, v in enumerate(curve):
            w.writerow([t, int(v)])


def time_to_fraction(curve: np.ndarray, fraction: float, n0: int) -> int | None:
    """First tick at which the cumulative count reaches fraction * n0."""
    target = fraction * n0
    hit = np.nonzero(np.asarray(curve) >= target)[0]
    return int(hit[0]) if len(hit) else None


@dataclass
class SimResult:
    forest: WormForest
    curve: np.ndarray
    complete: bool


def _sample_distinct(n: int, k: int, gen: np.random.Generator) -> np.ndarray:
    """k distinct integers uniform over [0, n), as an unordered sample.

    Small-n falls back to a partial shuffle; otherwise draw with replacement
    and keep first occurrences until k distinct values accumulate (the first
    k distinct values of an iid uniform sequence form a uniform k-subset).
    """
    if k == 0:
        return np.empty(0, dtype=np.int64)
    if k > n:
        raise ValueError("cannot draw more distinct values than the range holds")
    if n <= 2048 or 4 * k >= n:
        return gen.permutation(n)[:k].astype(np.int64)
    out = np.empty(0, dtype=np.int64)
    while out.size < k:
        want = k - out.size
        batch = gen.integers(0, n, size=want + want // 4 + 8)
        merged = np.concatenate([out, batch])
        _, first = np.unique(merged, return_index=True)
        out = merged[np.sort(first)]
    return out[:k]


class _SimState:
    """Shared mutable state of one propagation run."""

    def __init__(self, config: EpidemicConfig, population: SubnetPopulation | None, gen):
        self.config = config
        self.gen = gen
        n0 = config.n0
        if population is None:
            if config.p_local > 0:
                raise ValueError("localized scanning needs an explicit population")
            prefixes = [0]
            counts = [n0]
            self.subnet_size = config.address_space
        else:
            if population.total != n0:
                raise ValueError(
                    f"population holds {population.total} hosts, config expects {n0}"
                )
            if population.subnet_bits != config.subnet_bits:
                raise ValueError("population and config disagree on the subnet level")
            prefixes = sorted(population.counts)
            counts = [population.counts[q] for q in prefixes]
            self.subnet_size = config.subnet_size
            too_big = [q for q, c in zip(prefixes, counts) if c > self.subnet_size]
            if too_big:
                raise ValueError(f"prefix {too_big[0]} holds more hosts than addresses")

        self.n_strata = len(prefixes)
        self.stratum_prefix = np.asarray(prefixes, dtype=np.int64)
        sizes = np.asarray(counts, dtype=np.int64)
        self.pool_size = sizes.copy()
        self.pool_buf = [
            np.arange(off, off + c, dtype=np.int64)
            for off, c in zip(np.concatenate([[0], np.cumsum(sizes)[:-1]]), sizes)
        ]
        self.host_stratum = np.repeat(np.arange(self.n_strata, dtype=np.int64), sizes)
        self.host_pos = np.concatenate([np.arange(c, dtype=np.int64) for c in sizes])
        self.susceptible = n0

        # per-node records, filled in infection order
        self.node_host = np.empty(n0, dtype=np.int64)
        self.parent = np.empty(n0, dtype=np.int64)
        self.generation = np.empty(n0, dtype=np.int64)
        self.birth = np.empty(n0, dtype=np.int64)
        self.children = np.zeros(n0, dtype=np.int64)
        self.node_stratum = np.empty(n0, dtype=np.int64)
        self.n_nodes = 0
        self.pending: list[int] = []

        # scan-rate bookkeeping
        self.heterogeneous = config.scan_rate_std > 0
        per_tick = config.scans_per_tick_mean
        self.shared_base = int(per_tick)
        self.shared_frac = per_tick - self.shared_base
        self.node_base = np.empty(n0, dtype=np.int64)
        self.node_frac = np.empty(n0, dtype=np.float64)

        # active scanner registry (order is irrelevant, removal is swap-based)
        self.act = np.empty(n0, dtype=np.int64)
        self.act_pos = np.full(n0, -1, dtype=np.int64)
        self.act_size = 0
        self.strat_act: list[np.ndarray] | None = None
        self.strat_act_size = None
        self.strat_act_pos = None
        if config.p_local > 0:
            self.strat_act = [np.empty(c, dtype=np.int64) for c in counts]
            self.strat_act_size = np.zeros(self.n_strata, dtype=np.int64)
            self.strat_act_pos = np.full(n0, -1, dtype=np.int64)
        self.scratch_loc = np.zeros(n0, dtype=np.int64)

    # -- susceptible pool -------------------------------------------------

    def _remove_host(self, host: int) -> None:
        s = self.host_stratum[host]
        i = self.host_pos[host]
        buf = self.pool_buf[s]
        last_idx = self.pool_size[s] - 1
        last = buf[last_idx]
        buf[i] = last
        self.host_pos[last] = i
        self.host_pos[host] = -1
        self.pool_size[s] = last_idx
        self.susceptible -= 1

    def draw_targets_global(self, k: int) -> np.ndarray:
        """k hosts uniform (with replacement) among all susceptibles."""
        u = self.gen.integers(0, self.susceptible, size=k)
        if self.n_strata == 1:
            return self.pool_buf[0][u]
        cum = np.cumsum(self.pool_size)
        strat = np.searchsorted(cum, u, side="right")
        offset = u - (cum[strat] - self.pool_size[strat])
        out = np.empty(k, dtype=np.int64)
        for q in np.unique(strat):
            mask = strat == q
            out[mask] = self.pool_buf[q][offset[mask]]
        return out

    # -- scanner registry --------------------------------------------------

    def _activate(self, node: int) -> None:
        self.act[self.act_size] = node
        self.act_pos[node] = self.act_size
        self.act_size += 1
        if self.strat_act is not None:
            q = self.node_stratum[node]
            buf = self.strat_act[q]
            size = self.strat_act_size[q]
            buf[size] = node
            self.strat_act_pos[node] = size
            self.strat_act_size[q] = size + 1

    def _deactivate(self, node: int) -> None:
        i = self.act_pos[node]
        last = self.act[self.act_size - 1]
        self.act[i] = last
        self.act_pos[last] = i
        self.act_pos[node] = -1
        self.act_size -= 1
        if self.strat_act is not None:
            q = self.node_stratum[node]
            buf = self.strat_act[q]
            size = self.strat_act_size[q] - 1
            j = self.strat_act_pos[node]
            buf[j] = buf[size]
            self.strat_act_pos[buf[size]] = j
            self.strat_act_pos[node] = -1
            self.strat_act_size[q] = size

    # -- infection ----------------------------------------------------------

    def infect(self, host: int, parent_node: int, tick: int) -> int:
        v = self.n_nodes
        self.node_host[v] = host
        self.parent[v] = parent_node
        self.generation[v] = 0 if parent_node == NO_PARENT else self.generation[parent_node] + 1
        self.birth[v] = tick
        self.node_stratum[v] = self.host_stratum[host]
        if self.heterogeneous:
            rate = max(0.0, float(self.gen.normal(self.config.scan_rate_mean, self.config.scan_rate_std)))
            per_tick = rate * self.config.tick_seconds / 60.0
            self.node_base[v] = int(per_tick)
            self.node_frac[v] = per_tick - int(per_tick)
        else:
            self.node_base[v] = self.shared_base
            self.node_frac[v] = self.shared_frac
        self._remove_host(host)
        self.n_nodes += 1
        self.pending.append(v)
        return v

    def flush_pending(self) -> None:
        for v in self.pending:
            self._activate(v)
        self.pending.clear()

    def process_hits(self, scanners: np.ndarray, targets: np.ndarray, tick: int) -> int:
        """Resolve one tick's hit pairs in uniform random order.

        A target already infected (this tick or earlier) absorbs the scan; a
        scanner that reached the children cap mid-tick loses its remaining
        hits, mirroring a per-scan loop in which it stops scanning.
        """
        k = len(scanners)
        if k == 0:
            return 0
        order = self.gen.permutation(k)
        sc = scanners[order].tolist()
        tg = targets[order].tolist()
        cap = self.config.max_children
        host_pos = self.host_pos
        children = self.children
        new = 0
        for s, h in zip(sc, tg):
            if host_pos[h] < 0:
                continue
            if cap is not None and children[s] >= cap:
                continue
            self.infect(h, s, tick)
            children[s] += 1
            if cap is not None and children[s] == cap and self.act_pos[s] >= 0:
                self._deactivate(s)
            new += 1
        return new

    def seed_roots(self) -> None:
        h = self.config.hitlist
        if h == 1:
            hosts = [int(self.gen.integers(0, self.config.n0))]
        else:
            hosts = self.gen.permutation(self.config.n0)[:h].tolist()
        for host in hosts:
            self.infect(int(host), NO_PARENT, 0)
        self.flush_pending()

    def result(self) -> SimResult:
        n = self.n_nodes
        forest = WormForest(
            parent=self.parent[:n].copy(),
            generation=self.generation[:n].copy(),
            birth_tick=self.birth[:n].copy(),
            root_count=self.config.hitlist,
            children_count=self.children[:n].copy(),
        )
        return SimResult(forest=forest, curve=np.asarray(self.curve, dtype=np.int64),
                         complete=self.susceptible == 0)

    # -- aggregated ticks ----------------------------------------------------

    def tick_fast(self, tick: int) -> None:
        """Homogeneous rates, global scanning only: O(new infections)."""
        gen = self.gen
        n_act = self.act_size
        base, frac = self.shared_base, self.shared_frac
        extras = int(gen.binomial(n_act, frac)) if frac > 0 else 0
        total = n_act * base + extras
        if total == 0:
            return
        p_hit = self.susceptible / self.config.address_space
        k = int(gen.binomial(total, p_hit)) if p_hit > 0 else 0
        if k == 0:
            return
        slots = _sample_distinct(total, k, gen)
        n_floor = n_act * base
        act = self.act[: self.act_size]
        scanners = np.empty(k, dtype=np.int64)
        in_floor = slots < n_floor
        if base > 0:
            scanners[in_floor] = act[slots[in_floor] // base]
        n_extra_hits = int((~in_floor).sum())
        if n_extra_hits:
            # each Bernoulli remainder slot belongs to a distinct, uniformly
            # chosen scanner; sample the owners of the hit slots lazily
            scanners[~in_floor] = act[_sample_distinct(n_act, n_extra_hits, gen)]
        targets = self.draw_targets_global(k)
        self.process_hits(scanners, targets, tick)

    def tick_stratified(self, tick: int) -> None:
        """Homogeneous rates with localized scanning: O(strata + hits).

        Each scan is an independent categorical draw (local hit, global hit,
        miss), so hit counts are multinomial per stratum; the hit scans are
        then a uniform slot subset of the stratum's scan multiset, which the
        floor/remainder slot layout resolves to scanners lazily.
        """
        gen = self.gen
        cfg = self.config
        base, frac = self.shared_base, self.shared_frac
        n_act_q = self.strat_act_size
        extras_q = gen.binomial(n_act_q, frac) if frac > 0 else np.zeros_like(n_act_q)
        scans_q = n_act_q * base + extras_q
        p_loc_hit = cfg.p_local * (self.pool_size / self.subnet_size)
        p_glob_hit = (1.0 - cfg.p_local) * (self.susceptible / cfg.address_space)
        h_loc = gen.binomial(scans_q, p_loc_hit)
        rest = scans_q - h_loc
        h_glob = gen.binomial(rest, p_glob_hit / np.maximum(1e-300, 1.0 - p_loc_hit))
        parts_s: list[np.ndarray] = []
        parts_t: list[np.ndarray] = []
        for q in np.nonzero(h_loc + h_glob)[0]:
            k = int(h_loc[q] + h_glob[q])
            members = self.strat_act[q][: n_act_q[q]]
            slots = _sample_distinct(int(scans_q[q]), k, gen)
            scanners = np.empty(k, dtype=np.int64)
            n_floor = int(n_act_q[q]) * base
            in_floor = slots < n_floor
            if base > 0:
                scanners[in_floor] = members[slots[in_floor] // base]
            n_extra_hits = int((~in_floor).sum())
            if n_extra_hits:
                scanners[~in_floor] = members[
                    _sample_distinct(int(n_act_q[q]), n_extra_hits, gen)
                ]
            # slot order is exchangeable: the leading draws are the local hits
            kl = int(h_loc[q])
            if kl:
                parts_s.append(scanners[:kl])
                parts_t.append(self.pool_buf[q][gen.integers(0, self.pool_size[q], kl)])
            if k - kl:
                parts_s.append(scanners[kl:])
                parts_t.append(self.draw_targets_global(k - kl))
        if parts_s:
            self.process_hits(np.concatenate(parts_s), np.concatenate(parts_t), tick)

    def tick_general(self, tick: int) -> None:
        """Heterogeneous rates and/or localized scanning: O(active scanners)."""
        gen = self.gen
        cfg = self.config
        act = self.act[: self.act_size]
        if self.heterogeneous:
            base_v = self.node_base[act]
            frac_v = self.node_frac[act]
            extras = gen.random(self.act_size) < frac_v
        else:
            base_v = self.shared_base
            frac_v = self.shared_frac
            extras = gen.random(self.act_size) < frac_v if frac_v > 0 else np.zeros(
                self.act_size, dtype=bool
            )
        scans = base_v + extras
        if cfg.p_local > 0:
            if self.heterogeneous:
                local = gen.binomial(scans, cfg.p_local)
            else:
                # scans take only two values; scalar-n binomial is far cheaper
                local = np.empty(self.act_size, dtype=np.int64)
                lo = ~extras
                local[lo] = gen.binomial(base_v, cfg.p_local, size=int(lo.sum()))
                local[extras] = gen.binomial(
                    base_v + 1, cfg.p_local, size=int(extras.sum())
                )
            glob = scans - local
        else:
            local = None
            glob = scans
        parts_s: list[np.ndarray] = []
        parts_t: list[np.ndarray] = []

        total_glob = int(glob.sum())
        if total_glob > 0 and self.susceptible > 0:
            k = int(gen.binomial(total_glob, self.susceptible / cfg.address_space))
            if k:
                slots = _sample_distinct(total_glob, k, gen)
                idx = np.searchsorted(np.cumsum(glob), slots, side="right")
                parts_s.append(act[idx])
                parts_t.append(self.draw_targets_global(k))

        if local is not None:
            self.scratch_loc[act] = local
            per_stratum = np.bincount(
                self.node_stratum[act], weights=local, minlength=self.n_strata
            ).astype(np.int64)
            hit_prob = self.pool_size / self.subnet_size
            k_q = gen.binomial(per_stratum, hit_prob)
            for q in np.nonzero(k_q)[0]:
                members = self.strat_act[q][: self.strat_act_size[q]]
                weights = self.scratch_loc[members]
                slots = _sample_distinct(int(per_stratum[q]), int(k_q[q]), gen)
                idx = np.searchsorted(np.cumsum(weights), slots, side="right")
                parts_s.append(members[idx])
                parts_t.append(self.pool_buf[q][gen.integers(0, self.pool_size[q], int(k_q[q]))])

        if parts_s:
            self.process_hits(np.concatenate(parts_s), np.concatenate(parts_t), tick)

    # -- exact per-scan tick ---------------------------------------------------

    def tick_exact(self, tick: int) -> None:
        gen = self.gen
        cfg = self.config
        act = self.act[: self.act_size]
        base_v = self.node_base[act]
        frac_v = self.node_frac[act]
        counts = base_v + (gen.random(self.act_size) < frac_v)
        n_scans = int(counts.sum())
        self.scans_spent += n_scans
        if self.scans_spent > EXACT_SCAN_GUARD:
            raise RuntimeError("per-scan budget exhausted mid-run")
        if n_scans == 0:
            return
        scanner = np.repeat(act, counts)
        if cfg.p_local > 0:
            is_local = gen.random(n_scans) < cfg.p_local
            addr = np.empty(n_scans, dtype=np.int64)
            n_glob = int((~is_local).sum())
            if n_glob:
                addr[~is_local] = gen.integers(0, cfg.address_space, n_glob)
            n_loc = n_scans - n_glob
            if n_loc:
                pref = self.stratum_prefix[self.node_stratum[scanner[is_local]]]
                addr[is_local] = pref * self.subnet_size + gen.integers(
                    0, self.subnet_size, n_loc
                )
        else:
            addr = gen.integers(0, cfg.address_space, n_scans)
        order = gen.permutation(n_scans)
        addr = addr[order]
        scanner = scanner[order]
        # hosts occupy (prefix, offset) slots => addresses ascend with host id
        pos = np.searchsorted(self.host_addr, addr)
        pos_c = np.minimum(pos, cfg.n0 - 1)
        hit = self.host_addr[pos_c] == addr
        self.process_hits(scanner[hit], pos_c[hit], tick)


def _host_addresses(state: _SimState) -> np.ndarray:
    """Synthetic address per host: prefix base plus dense offsets."""
    starts = np.repeat(
        state.stratum_prefix * state.subnet_size,
        [len(buf) for buf in state.pool_buf],
    )
    offsets = np.concatenate([np.arange(len(buf), dtype=np.int64) for buf in state.pool_buf])
    return starts + offsets


def _run(state: _SimState, tick_fn) -> SimResult:
    state.seed_roots()
    state.curve = [state.n_nodes]
    tick = 0
    while state.susceptible > 0 and state.act_size > 0 and tick < state.config.max_ticks:
        tick += 1
        tick_fn(tick)
        state.flush_pending()
        state.curve.append(state.n_nodes)
    return state.result()


def simulate(config: EpidemicConfig, population: SubnetPopulation | None = None, rng=0) -> SimResult:
    """Aggregated-sampling propagation run."""
    state = _SimState(config, population, as_generator(rng))
    if state.heterogeneous:
        return _run(state, state.tick_general)
    if config.p_local > 0:
        return _run(state, state.tick_stratified)
    return _run(state, state.tick_fast)


def simulate_exact(
    config: EpidemicConfig, population: SubnetPopulation | None = None, rng=0
) -> SimResult:
    """Per-scan reference run; refuses configurations beyond the scan guard."""
    budget = config.n0 * config.scans_per_tick_mean * config.max_ticks
    if budget > EXACT_SCAN_GUARD:
        raise ValueError(
            f"~{budget:.2g} scans exceed the per-scan guard; "
            "reduce n0, the scan rate, or max_ticks"
        )
    state = _SimState(config, population, as_generator(rng))
    state.host_addr = _host_addresses(state)
    state.scans_spent = 0
    return _run(state, state.tick_exact)
