"""Request handlers: the single implementation behind HTTP and CLI.

Each handler maps a validated request model to a response model using the
core modules.  Invalid parameter combinations raise ValueError; the app
layer maps those to HTTP 400 and the CLI to exit code 2.  An analytically
invalid regime (gamma <= 1) is not an error: the report carries
``valid_regime = false`` and the CLI maps it to exit code 3.
"""

from __future__ import annotations

import itertools
import math
from typing import Iterator, Tuple

from .. import closedform, exactchain, montecarlo, trainkinetics
from ..dynamics import Placement, Rule, SimConfig
from ..topology import (
    GraphTopology,
    SuperstarSpec,
    build_family,
    build_raw,
    build_superstar,
)
from . import models


def graph_from_spec(spec: models.GraphSpec) -> GraphTopology:
    if spec.family == "superstar":
        return build_superstar(SuperstarSpec(B=spec.b, L=spec.l, H=spec.h))
    if spec.family == "raw":
        return build_raw(spec.n, [tuple(e) for e in spec.edges], roles=spec.roles)
    return build_family(spec.family, spec.n)


def handle_trainlen(req: models.TrainLenRequest) -> models.TrainLenResponse:
    rows = []
    for r in req.r:
        for h in req.h:
            t = trainkinetics.expected_train_length(r, h)
            if r > 1:
                lo, hi = trainkinetics.train_length_bounds(r, h)
                bounds = models.TrainBounds(lower=lo, upper=hi)
            else:
                bounds = models.TrainBounds()
            dp = None
            if req.dp_check:
                dp_value = trainkinetics.train_dp_oracle(r, h)
                diff = abs(dp_value - t)
                dp = models.DpCheck(value=dp_value, abs_diff=diff, agrees=diff <= 1e-10)
            rows.append(
                models.TrainLenRow(
                    params={"r": float(r), "H": float(h)},
                    T=t,
                    train_bounds=bounds,
                    dp_check=dp,
                )
            )
    return models.TrainLenResponse(rows=rows)


def handle_bounds(req: models.BoundsRequest) -> models.BoundsResponse:
    rep = closedform.bounds_report(req.r, req.b, req.l, req.h, req.delta)
    led = rep.ledger
    return models.BoundsResponse(
        params={"r": req.r, "B": req.b, "L": req.l, "H": req.h},
        delta=rep.delta,
        T=rep.T,
        gamma=rep.gamma,
        epsilons=models.EpsilonBlock(
            e0=led.eps0,
            e1=led.eps1,
            e2=led.eps2,
            e3=led.eps3,
            e4_minus=led.eps4_minus,
            e4_plus=led.eps4_plus,
            e5=led.eps5,
            log10_e5=led.log10_eps5,
        ),
        bounds=models.BoundsBlock(
            lower=rep.lower_finite,
            upper=rep.upper_finite,
            lower_asym=rep.lower_asymptotic,
            upper_asym=rep.upper_asymptotic,
        ),
        growth_bias=None if math.isnan(rep.growth_bias) else rep.growth_bias,
        claimed_historical=models.ClaimedBlock(
            value=rep.claimed_historical,
            invalidated_for_h_ge_3=req.h >= 3,
        ),
        valid_regime=rep.valid_regime,
    )


def handle_exact(req: models.ExactRequest) -> models.ExactResponse:
    g = graph_from_spec(req.graph)
    fx = exactchain.exact_fixation(g, req.r, Rule(req.rule), cap=req.cap)
    return models.ExactResponse(
        params={
            "graph": req.graph.model_dump(exclude_none=True),
            "r": req.r,
            "rule": Rule(req.rule).value,
        },
        exact=models.ExactBlock(
            per_node=fx.per_node, average=fx.average, residual=fx.residual
        ),
    )


def _estimate_block(rep: montecarlo.EstimateReport) -> models.EstimateBlock:
    return models.EstimateBlock(
        p=rep.point,
        ci_lo=rep.ci_low,
        ci_hi=rep.ci_high,
        trials=rep.trials,
        successes=rep.successes,
        capped=rep.capped,
        steps_total=rep.steps_total,
        engine=rep.engine,
        seed=rep.seed,
        generator=rep.generator,
    )


def handle_simulate(req: models.SimulateRequest) -> models.SimulateResponse:
    g = graph_from_spec(req.graph)
    cfg = SimConfig(
        r=req.r,
        rule=Rule(req.rule),
        placement=Placement(req.placement),
        seed=req.seed,
        max_steps=req.max_steps,
    )
    rep = montecarlo.estimate_fixation(g, cfg, req.trials, engine=req.engine)
    return models.SimulateResponse(
        params={
            "graph": req.graph.model_dump(exclude_none=True),
            "r": req.r,
            "rule": Rule(req.rule).value,
            "placement": Placement(req.placement).value,
            "trials": req.trials,
            "seed": req.seed,
            "max_steps": req.max_steps,
        },
        estimate=_estimate_block(rep),
    )


def handle_one_to_two(req: models.OneToTwoRequest) -> models.OneToTwoResponse:
    g = build_superstar(SuperstarSpec(B=req.b, L=req.l, H=req.h))
    cfg = SimConfig(
        r=req.r,
        rule=Rule.Bd,
        placement=Placement.reservoir_only,
        seed=req.seed,
        max_steps=req.max_steps,
    )
    rep = montecarlo.estimate_one_to_two(g, cfg, req.trials)
    bias = closedform.reservoir_growth_bias(req.r, req.h) if req.r > 1 else None
    return models.OneToTwoResponse(
        params={
            "B": req.b,
            "L": req.l,
            "H": req.h,
            "r": req.r,
            "trials": req.trials,
            "seed": req.seed,
        },
        estimate=_estimate_block(rep),
        growth_bias=bias,
    )


def sweep_grid(req: models.SweepRequest) -> Iterator[Tuple[int, dict]]:
    """Deterministic grid order: r, then b, l, h, n, rule, placement."""
    axes = [
        req.r,
        req.b or [None],
        req.l or [None],
        req.h or [None],
        req.n or [None],
        req.rule,
        req.placement,
    ]
    for i, (r, b, l, h, n, rule, placement) in enumerate(itertools.product(*axes)):
        yield i, {
            "r": r,
            "b": b,
            "l": l,
            "h": h,
            "n": n,
            "rule": rule,
            "placement": placement,
        }


def sweep_job_count(req: models.SweepRequest) -> int:
    count = len(req.r) * len(req.rule) * len(req.placement)
    for axis in (req.b, req.l, req.h, req.n):
        count *= len(axis) if axis else 1
    return count


def run_sweep_job(req: models.SweepRequest, point: dict) -> dict:
    """Execute one grid point of a sweep and return its report dict."""
    if req.op == "bounds":
        sub = models.BoundsRequest(
            r=point["r"], b=point["b"], l=point["l"], h=point["h"], delta=req.delta
        )
        return handle_bounds(sub).model_dump()
    if req.op == "trainlen":
        sub = models.TrainLenRequest(r=[point["r"]], h=[point["h"]])
        return handle_trainlen(sub).rows[0].model_dump()
    if req.op == "one-to-two":
        sub = models.OneToTwoRequest(
            b=point["b"],
            l=point["l"],
            h=point["h"],
            r=point["r"],
            trials=req.trials,
            seed=req.seed,
            max_steps=req.max_steps,
        )
        return handle_one_to_two(sub).model_dump()
    # simulate
    if req.family == "superstar" or (req.family is None and point["b"] is not None):
        graph = models.GraphSpec(
            family="superstar", b=point["b"], l=point["l"], h=point["h"]
        )
    else:
        graph = models.GraphSpec(family=req.family or "complete", n=point["n"])
    sub = models.SimulateRequest(
        graph=graph,
        r=point["r"],
        rule=point["rule"],
        placement=point["placement"],
        trials=req.trials,
        seed=req.seed,
        max_steps=req.max_steps,
    )
    return handle_simulate(sub).model_dump()


def handle_sweep(req: models.SweepRequest) -> models.SweepResponse:
    rows = [
        models.SweepRow(grid_index=i, report=run_sweep_job(req, point))
        for i, point in sweep_grid(req)
    ]
    return models.SweepResponse(jobs=len(rows), rows=rows)


def handle_graph_export(spec: models.GraphSpec) -> models.GraphExportResponse:
    g = graph_from_spec(spec)
    data = g.to_json_dict()
    return models.GraphExportResponse(
        n=data["n"], roles=data["roles"], edges=data["edges"]
    )
