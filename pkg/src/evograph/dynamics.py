"""Single-trajectory birth-death dynamics on a graph.

One step replaces the occupant of exactly one node under one of four
update rules (capital letter = fitness-dependent stage):

* Bd - reproducer proportional to fitness, victim by out-edge weight.
* bD - reproducer uniform, victim by edge weight / victim fitness.
* dB - victim uniform, reproducer by fitness * edge weight upstream.
* Db - victim inversely proportional to fitness, reproducer by edge
  weight among upstream neighbours.

Fitness takes only the values {1, r}, so fitness-proportional choices are
sampled class-first (mutant class with probability m*r/F, then uniform
within the class) over index sets maintained with O(1) swap-remove.
:func:`step` is the naive reference implementation (linear scans over the
exact per-event distribution); :func:`run_to_absorption` is the optimized
trajectory loop, bit-compatible with the compiled batch engine in
:mod:`evograph._fastpath` (same draw discipline, same index-set layout).

:func:`replacement_events` exposes the exact one-step event distribution
in rational arithmetic; the absorbing-chain solver builds its transition
rows from it, so oracle and simulator cannot drift apart.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Tuple

import numpy as np

from .rng import GOLDEN, MASK64, StreamRNG, mix64, stream_key
from .topology import RESERVOIR, GraphTopology


class Rule(str, enum.Enum):
    Bd = "Bd"
    bD = "bD"
    dB = "dB"
    Db = "Db"


class Placement(str, enum.Enum):
    uniform_node = "uniform_node"
    reservoir_only = "reservoir_only"
    fecundity_weighted = "fecundity_weighted"


class Result(str, enum.Enum):
    MutantFixation = "fixation"
    MutantExtinction = "extinction"
    StepCapReached = "step_cap"


RULE_CODES = {Rule.Bd: 0, Rule.bD: 1, Rule.dB: 2, Rule.Db: 3}
PLACEMENT_CODES = {
    Placement.uniform_node: 0,
    Placement.reservoir_only: 1,
    Placement.fecundity_weighted: 2,
}


@dataclass
class SimConfig:
    """Parameters of one stochastic run."""

    r: float
    rule: Rule = Rule.Bd
    placement: Placement = Placement.uniform_node
    seed: int = 0
    max_steps: Optional[int] = None  # default: 1000 * N^2, resolved per graph

    def __post_init__(self):
        self.rule = Rule(self.rule)
        self.placement = Placement(self.placement)
        if self.r <= 0:
            raise ValueError("fitness r must be > 0")
        if self.max_steps is not None and self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")

    def effective_max_steps(self, n: int) -> int:
        return self.max_steps if self.max_steps is not None else 1000 * n * n


@dataclass
class PopulationState:
    """Resident/mutant assignment with the mutant count maintained
    incrementally; total fitness is derived from the count, so recomputing
    it from scratch is exact by construction."""

    is_mutant: list
    m: int
    r: float

    @property
    def node_count(self) -> int:
        return len(self.is_mutant)

    @property
    def total_fitness(self) -> float:
        return self.node_count + self.m * (self.r - 1.0)

    def recount(self) -> int:
        return sum(1 for b in self.is_mutant if b)

    @property
    def absorbed(self) -> bool:
        return self.m == 0 or self.m == self.node_count


@dataclass(frozen=True)
class SimulationOutcome:
    result: Result
    steps: int
    seed_key: int
    initial_node: int
    event_hash: int  # running hash of the (reproducer, victim) sequence


class CsrGraph:
    """Float views of a topology for the sampling hot path."""

    __slots__ = (
        "n",
        "out_indptr",
        "out_idx",
        "out_w",
        "out_cum",
        "in_indptr",
        "in_src",
        "in_w",
        "in_cum",
        "in_total",
        "reservoir_ids",
    )

    def __init__(self, g: GraphTopology):
        n = g.node_count
        self.n = n
        out_indptr = np.zeros(n + 1, dtype=np.int64)
        out_idx = []
        out_w = []
        out_cum = []
        for u, edges in enumerate(g.out_edges):
            acc = Fraction(0)
            for v, w in edges:
                acc += w
                out_idx.append(v)
                out_w.append(float(w))
                out_cum.append(float(acc))
            out_cum[-1] = 1.0  # exact by the out-degree convention
            out_indptr[u + 1] = len(out_idx)
        self.out_indptr = out_indptr
        self.out_idx = np.asarray(out_idx, dtype=np.int32)
        self.out_w = np.asarray(out_w, dtype=np.float64)
        self.out_cum = np.asarray(out_cum, dtype=np.float64)

        incoming = g.in_edges()
        in_indptr = np.zeros(n + 1, dtype=np.int64)
        in_src = []
        in_w = []
        in_cum = []
        in_total = np.zeros(n, dtype=np.float64)
        for v, edges in enumerate(incoming):
            acc = Fraction(0)
            for u, w in edges:
                acc += w
                in_src.append(u)
                in_w.append(float(w))
                in_cum.append(float(acc))
            in_total[v] = float(acc)
            in_indptr[v + 1] = len(in_src)
        self.in_indptr = in_indptr
        self.in_src = np.asarray(in_src, dtype=np.int32)
        self.in_w = np.asarray(in_w, dtype=np.float64)
        self.in_cum = np.asarray(in_cum, dtype=np.float64)
        self.in_total = in_total
        self.reservoir_ids = np.asarray(g.reservoir_nodes(), dtype=np.int64)


def compile_graph(g: GraphTopology) -> CsrGraph:
    cached = getattr(g, "_compiled", None)
    if cached is None:
        cached = CsrGraph(g)
        g._compiled = cached
    return cached


def replacement_events(g: GraphTopology, is_mutant, r, rule: Rule):
    """Exact one-step event distribution: list of (reproducer u, victim v,
    probability).  Probabilities sum to exactly 1 when r is rational.

    Pass r as a Fraction (or int) for exact rational output; a float r
    yields the float image of the same expressions.
    """
    rule = Rule(rule)
    n = g.node_count
    exact = not isinstance(r, float)
    conv = (lambda w: w) if exact else float
    one = Fraction(1) if exact else 1.0
    rr = (Fraction(r) if not isinstance(r, Fraction) else r) if exact else r

    def fit(mut):
        return rr if mut else one

    m = sum(1 for b in is_mutant if b)
    F = n + m * (rr - one)
    events: list = []

    if rule is Rule.Bd:
        for u, edges in enumerate(g.out_edges):
            fu = fit(is_mutant[u])
            for v, w in edges:
                events.append((u, v, fu * conv(w) / F))
    elif rule is Rule.bD:
        inv_n = Fraction(1, n) if exact else 1.0 / n
        for u, edges in enumerate(g.out_edges):
            weights = [conv(w) / fit(is_mutant[v]) for v, w in edges]
            total = sum(weights)
            for (v, _), wt in zip(edges, weights):
                events.append((u, v, inv_n * wt / total))
    elif rule is Rule.dB:
        inv_n = Fraction(1, n) if exact else 1.0 / n
        for v, edges in enumerate(g.in_edges()):
            weights = [fit(is_mutant[u]) * conv(w) for u, w in edges]
            total = sum(weights)
            for (u, _), wt in zip(edges, weights):
                events.append((u, v, inv_n * wt / total))
    elif rule is Rule.Db:
        G = sum(one / fit(is_mutant[v]) for v in range(n))
        for v, edges in enumerate(g.in_edges()):
            pv = (one / fit(is_mutant[v])) / G
            total = sum(conv(w) for _, w in edges)
            for u, w in edges:
                events.append((u, v, pv * conv(w) / total))
    return events


def place_initial_mutant(
    g: GraphTopology, cfg: SimConfig, rng: StreamRNG
) -> PopulationState:
    """Place exactly one mutant in an otherwise resident population.

    uniform_node: uniform over all N nodes.  reservoir_only: uniform over
    reservoir-role nodes.  fecundity_weighted: the offspring target of one
    reproduction event sampled from the all-resident process (reproducer
    uniform at equal fitness, then out-edge weight).
    """
    n = g.node_count
    placement = Placement(cfg.placement)
    if placement is Placement.uniform_node:
        node = _draw_index(rng, n)
    elif placement is Placement.reservoir_only:
        ids = g.reservoir_nodes()
        if not ids:
            raise ValueError("reservoir_only placement needs reservoir roles")
        node = ids[_draw_index(rng, len(ids))]
    else:
        cg = compile_graph(g)
        reproducer = _draw_index(rng, n)
        node = int(_sample_out_edge(cg, reproducer, rng.random()))
    is_mut = [False] * n
    is_mut[node] = True
    return PopulationState(is_mutant=is_mut, m=1, r=cfg.r)


def _draw_index(rng: StreamRNG, n: int) -> int:
    k = int(rng.random() * n)
    return k if k < n else n - 1


def _sample_out_edge(cg: CsrGraph, u: int, t: float) -> int:
    lo = int(cg.out_indptr[u])
    hi = int(cg.out_indptr[u + 1]) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if cg.out_cum[mid] <= t:
            lo = mid + 1
        else:
            hi = mid
    return int(cg.out_idx[lo])


def step(
    g: GraphTopology, state: PopulationState, cfg: SimConfig, rng: StreamRNG
) -> PopulationState:
    """Advance one step (reference implementation, linear scans).

    Kept naive on purpose: it samples the same per-event distribution as
    the optimized engines and the test suite checks their agreement.
    """
    if state.absorbed:
        raise ValueError("step called on an absorbed state")
    n = g.node_count
    r = cfg.r
    is_mut = state.is_mutant
    rule = Rule(cfg.rule)

    if rule is Rule.Bd:
        x = rng.random() * state.total_fitness
        u = _scan_fitness(is_mut, r, x)
        v = _sample_out_edge(compile_graph(g), u, rng.random())
    elif rule is Rule.bD:
        u = _draw_index(rng, n)
        edges = g.out_edges[u]
        weights = [float(w) / (r if is_mut[v] else 1.0) for v, w in edges]
        v = edges[_scan_weights(weights, rng.random() * sum(weights))][0]
    elif rule is Rule.dB:
        v = _draw_index(rng, n)
        cg = compile_graph(g)
        s, e = int(cg.in_indptr[v]), int(cg.in_indptr[v + 1])
        weights = [
            cg.in_w[i] * (r if is_mut[cg.in_src[i]] else 1.0) for i in range(s, e)
        ]
        u = int(cg.in_src[s + _scan_weights(weights, rng.random() * sum(weights))])
    else:  # Db
        x = rng.random() * (state.m / r + (n - state.m))
        v = _scan_inverse_fitness(is_mut, r, x)
        cg = compile_graph(g)
        s, e = int(cg.in_indptr[v]), int(cg.in_indptr[v + 1])
        t = rng.random() * cg.in_total[v]
        i = s
        acc = 0.0
        while i < e - 1:
            acc += cg.in_w[i]
            if acc > t:
                break
            i += 1
        u = int(cg.in_src[i])

    if is_mut[v] != is_mut[u]:
        state.m += 1 if is_mut[u] else -1
        is_mut[v] = is_mut[u]
    return state


def _scan_fitness(is_mut, r: float, x: float) -> int:
    acc = 0.0
    for u, mut in enumerate(is_mut):
        acc += r if mut else 1.0
        if acc > x:
            return u
    return len(is_mut) - 1


def _scan_inverse_fitness(is_mut, r: float, x: float) -> int:
    acc = 0.0
    for v, mut in enumerate(is_mut):
        acc += 1.0 / r if mut else 1.0
        if acc > x:
            return v
    return len(is_mut) - 1


def _scan_weights(weights, x: float) -> int:
    acc = 0.0
    for i, w in enumerate(weights):
        acc += w
        if acc > x:
            return i
    return len(weights) - 1


def run_to_absorption(
    g: GraphTopology, cfg: SimConfig, rng: Optional[StreamRNG] = None
) -> SimulationOutcome:
    """Run one trajectory until fixation, extinction, or the step cap.

    Identical (graph, config, stream key) triples reproduce identical
    outcomes bit-for-bit, including against the compiled batch engine:
    both consume exactly two stream draws per step with the same index-set
    bookkeeping.
    """
    if rng is None:
        rng = StreamRNG(stream_key(cfg.seed, 0))
    cg = compile_graph(g)
    n = cg.n
    r = cfg.r
    rule = Rule(cfg.rule)
    max_steps = cfg.effective_max_steps(n)

    state = place_initial_mutant(g, cfg, rng)
    init_node = state.is_mutant.index(True)

    # class index sets: mutants[0:nm], residents[0:nr], pos[v] = slot of v
    mutants = [0] * n
    residents = [0] * n
    pos = [0] * n
    mutants[0] = init_node
    nm = 1
    nr = 0
    for v in range(n):
        if v == init_node:
            pos[v] = 0
            continue
        residents[nr] = v
        pos[v] = nr
        nr += 1
    is_mut = state.is_mutant

    out_indptr, out_idx, out_w, out_cum = (
        cg.out_indptr,
        cg.out_idx,
        cg.out_w,
        cg.out_cum,
    )
    in_indptr, in_src, in_w, in_cum, in_total = (
        cg.in_indptr,
        cg.in_src,
        cg.in_w,
        cg.in_cum,
        cg.in_total,
    )
    m = 1
    steps = 0
    h = 0
    random = rng.random
    while 0 < m < n and steps < max_steps:
        F = n + m * (r - 1.0)
        if rule is Rule.Bd:
            x = random() * F
            if x < m * r:
                k = int(x / r)
                u = mutants[k if k < m else m - 1]
            else:
                k = int(x - m * r)
                u = residents[k if k < n - m else n - m - 1]
            t = random()
            lo = int(out_indptr[u])
            hi = int(out_indptr[u + 1]) - 1
            while lo < hi:
                mid = (lo + hi) // 2
                if out_cum[mid] <= t:
                    lo = mid + 1
                else:
                    hi = mid
            v = int(out_idx[lo])
        elif rule is Rule.bD:
            k = int(random() * n)
            u = k if k < n else n - 1
            s, e = int(out_indptr[u]), int(out_indptr[u + 1])
            total = 0.0
            for i in range(s, e):
                total += out_w[i] / r if is_mut[out_idx[i]] else out_w[i]
            t = random() * total
            acc = 0.0
            v = int(out_idx[e - 1])
            for i in range(s, e):
                acc += out_w[i] / r if is_mut[out_idx[i]] else out_w[i]
                if acc > t:
                    v = int(out_idx[i])
                    break
        elif rule is Rule.dB:
            k = int(random() * n)
            v = k if k < n else n - 1
            s, e = int(in_indptr[v]), int(in_indptr[v + 1])
            total = 0.0
            for i in range(s, e):
                total += in_w[i] * r if is_mut[in_src[i]] else in_w[i]
            t = random() * total
            acc = 0.0
            u = int(in_src[e - 1])
            for i in range(s, e):
                acc += in_w[i] * r if is_mut[in_src[i]] else in_w[i]
                if acc > t:
                    u = int(in_src[i])
                    break
        else:  # Db
            x = random() * (m / r + (n - m))
            if x < m / r:
                k = int(x * r)
                v = mutants[k if k < m else m - 1]
            else:
                k = int(x - m / r)
                v = residents[k if k < n - m else n - m - 1]
            t = random() * in_total[v]
            lo = int(in_indptr[v])
            hi = int(in_indptr[v + 1]) - 1
            while lo < hi:
                mid = (lo + hi) // 2
                if in_cum[mid] <= t:
                    lo = mid + 1
                else:
                    hi = mid
            u = int(in_src[lo])

        if is_mut[v] != is_mut[u]:
            if is_mut[u]:
                p = pos[v]
                nr -= 1
                last = residents[nr]
                residents[p] = last
                pos[last] = p
                mutants[nm] = v
                pos[v] = nm
                nm += 1
                m += 1
                is_mut[v] = True
            else:
                p = pos[v]
                nm -= 1
                last = mutants[nm]
                mutants[p] = last
                pos[last] = p
                residents[nr] = v
                pos[v] = nr
                nr += 1
                m -= 1
                is_mut[v] = False
        h = mix64((h ^ (u * n + v + 1)) & MASK64)
        steps += 1

    state.m = m
    if m == n:
        result = Result.MutantFixation
    elif m == 0:
        result = Result.MutantExtinction
    else:
        result = Result.StepCapReached
    return SimulationOutcome(
        result=result,
        steps=steps,
        seed_key=rng.key,
        initial_node=init_node,
        event_hash=h,
    )
