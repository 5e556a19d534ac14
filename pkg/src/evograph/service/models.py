"""Pydantic request/response models shared by the HTTP service and the CLI.

The CLI builds these requests, dispatches them (in-process or over HTTP),
and renders the responses; the FastAPI app exposes the same handlers per
endpoint.  Reports deliberately exclude wall-clock so identical inputs
produce byte-identical output.
"""

from __future__ import annotations

from typing import Dict, List, Literal, Optional, Union

from pydantic import BaseModel, Field, model_validator

from ..dynamics import Placement, Rule

FamilyName = Literal["superstar", "complete", "directed_cycle", "star", "raw"]


class GraphSpec(BaseModel):
    """Graph selector: a built-in family or a raw edge list."""

    family: FamilyName
    b: Optional[int] = Field(default=None, ge=1, description="superstar branches")
    l: Optional[int] = Field(default=None, ge=1, description="reservoir size per branch")
    h: Optional[int] = Field(default=None, ge=2, description="stem length")
    n: Optional[int] = Field(default=None, ge=2, description="family size")
    edges: Optional[List[List[Union[int, str]]]] = None  # [[src, dst, "p/q"], ...]
    roles: Optional[List[str]] = None

    @model_validator(mode="after")
    def _check_shape(self):
        if self.family == "superstar":
            if self.b is None or self.l is None or self.h is None:
                raise ValueError("superstar needs b, l, h")
        elif self.family == "raw":
            if self.n is None or self.edges is None:
                raise ValueError("raw graphs need n and edges")
        elif self.n is None:
            raise ValueError(f"{self.family} needs n")
        return self


class TrainLenRequest(BaseModel):
    r: List[float] = Field(min_length=1)
    h: List[int] = Field(min_length=1)
    dp_check: bool = True


class DpCheck(BaseModel):
    value: float
    abs_diff: float
    agrees: bool


class TrainBounds(BaseModel):
    lower: Optional[float] = None  # requires r > 1
    upper: Optional[float] = None


class TrainLenRow(BaseModel):
    params: Dict[str, float]
    T: float
    train_bounds: TrainBounds
    dp_check: Optional[DpCheck] = None


class TrainLenResponse(BaseModel):
    rows: List[TrainLenRow]


class BoundsRequest(BaseModel):
    r: float = Field(gt=0)
    b: int = Field(ge=2)
    l: int = Field(ge=1)
    h: int = Field(ge=2)
    delta: Optional[int] = Field(default=None, ge=1)


class EpsilonBlock(BaseModel):
    e0: float
    e1: float
    e2: float
    e3: float
    e4_minus: float
    e4_plus: float
    e5: float
    log10_e5: float


class BoundsBlock(BaseModel):
    lower: float
    upper: float
    lower_asym: float
    upper_asym: float


class ClaimedBlock(BaseModel):
    value: float
    invalidated_for_h_ge_3: bool


class BoundsResponse(BaseModel):
    params: Dict[str, float]
    delta: int
    T: float
    gamma: float
    epsilons: EpsilonBlock
    bounds: BoundsBlock
    growth_bias: Optional[float]
    claimed_historical: ClaimedBlock
    valid_regime: bool


class ExactRequest(BaseModel):
    graph: GraphSpec
    r: float = Field(gt=0)
    rule: Rule = Rule.Bd
    cap: int = Field(default=16, ge=2, le=20)


class ExactBlock(BaseModel):
    per_node: List[float]
    average: float
    residual: float


class ExactResponse(BaseModel):
    params: Dict[str, object]
    exact: ExactBlock


class SimulateRequest(BaseModel):
    graph: GraphSpec
    r: float = Field(gt=0)
    rule: Rule = Rule.Bd
    placement: Placement = Placement.uniform_node
    trials: int = Field(ge=1)
    seed: int = 0
    max_steps: Optional[int] = Field(default=None, ge=1)
    engine: Literal["auto", "raw", "condensed", "reference"] = "auto"


class EstimateBlock(BaseModel):
    p: float
    ci_lo: float
    ci_hi: float
    trials: int
    successes: int
    capped: int
    steps_total: int
    engine: str
    seed: int
    generator: str


class SimulateResponse(BaseModel):
    params: Dict[str, object]
    estimate: EstimateBlock


class OneToTwoRequest(BaseModel):
    b: int = Field(ge=1)
    l: int = Field(ge=1)
    h: int = Field(ge=2)
    r: float = Field(gt=0)
    trials: int = Field(ge=1)
    seed: int = 0
    max_steps: Optional[int] = Field(default=None, ge=1)


class OneToTwoResponse(BaseModel):
    params: Dict[str, object]
    estimate: EstimateBlock
    growth_bias: Optional[float]  # large-B,L reference value r^4 T/(1 + r^4 T)


class SweepRequest(BaseModel):
    """Grid sweep over one operation; grids expand in documented order
    (r, b, l, h, n, rule, placement) and execute in deterministic grid
    order."""

    op: Literal["bounds", "trainlen", "simulate", "one-to-two"]
    r: List[float] = Field(default_factory=lambda: [2.0])
    b: Optional[List[int]] = None
    l: Optional[List[int]] = None
    h: Optional[List[int]] = None
    n: Optional[List[int]] = None
    family: Optional[FamilyName] = None
    rule: List[Rule] = Field(default_factory=lambda: [Rule.Bd])
    placement: List[Placement] = Field(default_factory=lambda: [Placement.uniform_node])
    trials: int = Field(default=1000, ge=1)
    seed: int = 0
    max_steps: Optional[int] = Field(default=None, ge=1)
    delta: Optional[int] = Field(default=None, ge=1)


class SweepRow(BaseModel):
    grid_index: int
    report: Dict[str, object]


class SweepResponse(BaseModel):
    jobs: int
    rows: List[SweepRow]


class GraphExportResponse(BaseModel):
    n: int
    roles: List[str]
    edges: List[List[Union[int, str]]]


class ErrorResponse(BaseModel):
    error: str
