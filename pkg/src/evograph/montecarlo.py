"""Replica orchestration, estimators, and confidence intervals.

Replica i of a run with base seed s consumes the splitmix64 stream keyed
by s + i, so estimates are reproducible bit-for-bit and independent of
scheduling; aggregation uses counts only, which makes it order-independent
by construction.

Engine selection: small and medium graphs run the compiled raw-step
engine; Bd runs on large superstars dispatch to the exact event-driven
condensation (see :mod:`evograph._fastpath`), which is distributionally
identical but skips the quiet steps that dominate on big graphs.  The
`engine` argument can force either, or the pure-Python reference loop.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from . import _fastpath, dynamics
from .dynamics import Placement, Result, Rule, SimConfig, compile_graph
from .rng import GENERATOR_NAME, StreamRNG, stream_key
from .topology import GraphTopology

# Bd runs on superstars at least this large use the condensed engine.
CONDENSED_NODE_THRESHOLD = 2000


def wilson_interval(successes: int, trials: int, z: float = 1.959963984540054) -> Tuple[float, float]:
    """Wilson score interval; well behaved at 0/1 proportions."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    if not 0 <= successes <= trials:
        raise ValueError("successes must lie in [0, trials]")
    p = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (p + z2 / (2.0 * trials)) / denom
    half = z * math.sqrt(p * (1.0 - p) / trials + z2 / (4.0 * trials * trials)) / denom
    lo = 0.0 if successes == 0 else max(0.0, center - half)
    hi = 1.0 if successes == trials else min(1.0, center + half)
    return lo, hi


@dataclass(frozen=True)
class EstimateReport:
    """Outcome proportion with a 95% Wilson interval.

    Step-capped replicas are excluded from the proportion and reported in
    ``capped``; wall-clock is informational and excluded from equality.
    """

    successes: int
    trials: int
    capped: int
    point: float
    ci_low: float
    ci_high: float
    seed: int
    steps_total: int
    engine: str
    generator: str = GENERATOR_NAME
    wall_clock: float = field(default=0.0, compare=False)

    @property
    def effective_trials(self) -> int:
        return self.trials - self.capped


def _make_report(
    successes: int, trials: int, capped: int, seed: int, steps: int, engine: str, wall: float
) -> EstimateReport:
    if capped:
        warnings.warn(
            f"{capped} of {trials} replicas hit the step cap; "
            "they are excluded from the estimate",
            stacklevel=3,
        )
    effective = trials - capped
    if effective > 0:
        point = successes / effective
        lo, hi = wilson_interval(successes, effective)
    else:
        point, lo, hi = math.nan, 0.0, 1.0
    return EstimateReport(
        successes=successes,
        trials=trials,
        capped=capped,
        point=point,
        ci_low=lo,
        ci_high=hi,
        seed=seed,
        steps_total=steps,
        engine=engine,
        wall_clock=wall,
    )


def _validate_placement(g: GraphTopology, cfg: SimConfig) -> None:
    if Placement(cfg.placement) is Placement.reservoir_only and not g.reservoir_nodes():
        raise ValueError("reservoir_only placement needs reservoir roles")


def _pick_engine(g: GraphTopology, cfg: SimConfig, engine: str) -> str:
    if engine != "auto":
        return engine
    if (
        g.superstar is not None
        and Rule(cfg.rule) is Rule.Bd
        and g.node_count >= CONDENSED_NODE_THRESHOLD
    ):
        return "condensed"
    return "raw"


def estimate_fixation(
    g: GraphTopology, cfg: SimConfig, trials: int, engine: str = "auto"
) -> EstimateReport:
    """Fixation proportion over independent replicas.

    ``engine``: "auto", "raw" (compiled per-step), "condensed" (exact
    event-driven, Bd on superstars only), or "reference" (pure Python,
    slow; for cross-checks).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    _validate_placement(g, cfg)
    engine = _pick_engine(g, cfg, engine)
    n = g.node_count
    max_steps = cfg.effective_max_steps(n)
    t0 = time.perf_counter()

    if engine == "condensed":
        if g.superstar is None or Rule(cfg.rule) is not Rule.Bd:
            raise ValueError("condensed engine requires a superstar graph and the Bd rule")
        spec = g.superstar
        results, steps, _ = _fastpath.superstar_batch(
            spec.B,
            spec.L,
            spec.H,
            cfg.r,
            dynamics.PLACEMENT_CODES[Placement(cfg.placement)],
            _fastpath.MODE_ABSORPTION,
            cfg.seed,
            trials,
            max_steps,
        )
    elif engine == "raw":
        cg = compile_graph(g)
        results, steps, _, _ = _fastpath.simulate_batch(
            cg.out_indptr,
            cg.out_idx,
            cg.out_w,
            cg.out_cum,
            cg.in_indptr,
            cg.in_src,
            cg.in_w,
            cg.in_cum,
            cg.in_total,
            n,
            cfg.r,
            dynamics.RULE_CODES[Rule(cfg.rule)],
            dynamics.PLACEMENT_CODES[Placement(cfg.placement)],
            cg.reservoir_ids,
            cfg.seed,
            trials,
            max_steps,
        )
    elif engine == "reference":
        res_list = []
        steps_list = []
        for i in range(trials):
            out = dynamics.run_to_absorption(g, cfg, StreamRNG(stream_key(cfg.seed, i)))
            res_list.append(
                {
                    Result.MutantExtinction: _fastpath.RES_EXTINCTION,
                    Result.MutantFixation: _fastpath.RES_FIXATION,
                    Result.StepCapReached: _fastpath.RES_STEP_CAP,
                }[out.result]
            )
            steps_list.append(out.steps)
        results = np.asarray(res_list, dtype=np.int8)
        steps = np.asarray(steps_list, dtype=np.int64)
    else:
        raise ValueError(f"unknown engine {engine!r}")

    wall = time.perf_counter() - t0
    successes = int(np.count_nonzero(results == _fastpath.RES_FIXATION))
    capped = int(np.count_nonzero(results == _fastpath.RES_STEP_CAP))
    return _make_report(
        successes, trials, capped, cfg.seed, int(steps.sum()), engine, wall
    )


def estimate_one_to_two(
    g: GraphTopology, cfg: SimConfig, trials: int
) -> EstimateReport:
    """Probability that the single reservoir mutant seeds a second
    reservoir mutant before the reservoirs empty.

    Success: the first time at least two reservoir nodes are mutants.
    Failure: the reservoir mutant count hits zero (stem/root mutants do
    not count).  Requires a superstar graph, reservoir placement, Bd.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if g.superstar is None:
        raise ValueError("one-to-two probe requires a superstar topology")
    if Rule(cfg.rule) is not Rule.Bd:
        raise ValueError("one-to-two probe is defined for the Bd rule")
    if Placement(cfg.placement) is not Placement.reservoir_only:
        raise ValueError("one-to-two probe requires reservoir_only placement")
    spec = g.superstar
    max_steps = cfg.effective_max_steps(g.node_count)
    t0 = time.perf_counter()
    results, steps, _ = _fastpath.superstar_batch(
        spec.B,
        spec.L,
        spec.H,
        cfg.r,
        dynamics.PLACEMENT_CODES[Placement.reservoir_only],
        _fastpath.MODE_ONE_TO_TWO,
        cfg.seed,
        trials,
        max_steps,
    )
    wall = time.perf_counter() - t0
    successes = int(np.count_nonzero(results == _fastpath.RES_FIXATION))
    capped = int(np.count_nonzero(results == _fastpath.RES_STEP_CAP))
    return _make_report(
        successes, trials, capped, cfg.seed, int(steps.sum()), "condensed", wall
    )
