"""Closed-form fixation probabilities, error terms, and bound assembly.

Covers the unstructured birth-death fixation probability, the star and
(historical) superstar approximations, the H=3 counter-example bound, the
corrected asymptotic sandwich driven by the expected train length T, the
finite-population error ledger eps0..eps5 with forward bias gamma, the
martingale absorption probability behind the lower bound, and the
deleterious-mutant upper bound obtained by swapping r -> 1/r.

All functions are pure and deterministic; r = 1 is handled by analytic
limits, never by dividing near-zero quantities.  gamma^-delta style powers
are evaluated in log space so extreme regimes degrade to an explicit
log10 report instead of silently underflowing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Tuple

from . import rootchain, trainkinetics


def moran_fixation(r: float, N) -> float:
    """Fixation probability of a single mutant in an unstructured
    population: (1 - 1/r) / (1 - r^-N), with the neutral limit 1/N."""
    if N < 1:
        raise ValueError("population size must be >= 1")
    if r <= 0:
        raise ValueError("fitness r must be > 0")
    if r == 1:
        return 0.0 if math.isinf(N) else 1.0 / N
    if math.isinf(N):
        return max(1.0 - 1.0 / r, 0.0)
    # r^-N overflows for r < 1 and large N; go through logs when needed.
    log_term = -N * math.log(r)
    if log_term > 700:
        # denominator -> -inf; probability underflows: (1/r - 1) * r^-(N-1)
        log_p = math.log(1.0 / r - 1.0) - (N - 1) * math.log(1.0 / r)
        return math.exp(log_p) if log_p > -745 else 0.0
    return (1.0 - 1.0 / r) / (1.0 - math.exp(log_term))


def moran_fixation_exact(r, N: int) -> Fraction:
    """Rational-valued twin of :func:`moran_fixation` (finite N, r != 0).

    Useful when the float value is subnormal or underflows, e.g. to compare
    an empirical estimate against a suppression target in exact arithmetic.
    """
    rq = r if isinstance(r, Fraction) else Fraction(r)
    if rq == 1:
        return Fraction(1, N)
    return (1 - 1 / rq) / (1 - rq ** -N)


def star_fixation_approx(r: float, N) -> float:
    """Large-N star fixation: a mutant of fitness r behaves like one of
    fitness r^2 in an unstructured population."""
    if N < 2:
        raise ValueError("star needs N >= 2")
    return moran_fixation(r * r, N)


def claimed_superstar_fixation(r: float, N, H: int) -> float:
    """Historical superstar claim with k = H + 2 amplification levels.

    Retained for comparison plots only: invalidated for H >= 3 (it exceeds
    the H=3 counter-example bound for r > 1.42).  ``N`` may be math.inf.
    """
    if H < 2:
        raise ValueError("stem length H must be >= 2")
    return moran_fixation(r ** (H + 2), N)


def diaz_upper_bound_h3(r: float) -> float:
    """Counter-example upper bound for H = 3: 1 - (1+r)/(2r^5 + r + 1)."""
    if r <= 0:
        raise ValueError("fitness r must be > 0")
    return 1.0 - (1.0 + r) / (2.0 * r ** 5 + r + 1.0)


def reservoir_growth_bias(r: float, H: int) -> float:
    """Probability that one reservoir mutant becomes two before being lost:
    r^4 T / (1 + r^4 T) in the large-B,L limit."""
    if r <= 1:
        raise ValueError("reservoir growth bias requires r > 1")
    x = r ** 4 * trainkinetics.expected_train_length(r, H)
    return x / (1.0 + x)


@dataclass(frozen=True)
class AsymptoticBounds:
    """Large-population sandwich on the superstar fixation probability."""

    lower: float
    upper: float
    lower_loose: float  # T replaced by its lower bound (H-1)(1-1/r)^2
    upper_loose: float  # T replaced by its upper bound H
    T: float


def asymptotic_superstar_bounds(r: float, H: int) -> AsymptoticBounds:
    """1 - 1/(r^4 T) <= rho_H <= 1 - 1/(1 + r^4 T) as B = L -> infinity."""
    if r <= 1:
        raise ValueError("asymptotic bounds require r > 1 (use the deleterious path for r < 1)")
    T = trainkinetics.expected_train_length(r, H)
    t_lo, t_hi = trainkinetics.train_length_bounds(r, H)
    r4 = r ** 4
    return AsymptoticBounds(
        lower=1.0 - 1.0 / (r4 * T),
        upper=1.0 - 1.0 / (1.0 + r4 * T),
        lower_loose=1.0 - 1.0 / (r4 * t_lo),
        upper_loose=1.0 - 1.0 / (1.0 + r4 * t_hi),
        T=T,
    )


@dataclass(frozen=True)
class ErrorLedger:
    """Finite-population error terms and the reservoir-walk forward bias."""

    eps0: float  # initial mutant lands outside the reservoirs
    eps1: float  # train launch rate divides by L instead of L+r-1
    eps2: float  # initial mutant erased before its first stem offspring
    eps3: float  # a second train collides with one still in the stem
    eps4_minus: float  # undershoot of the train success probability
    eps4_plus: float  # overshoot of the train success probability
    eps5: float  # martingale truncation term gamma^-delta [...]
    log10_eps5: float
    gamma: float  # forward bias of the reservoir mutant count walk
    T: float
    valid_regime: bool  # gamma > 1; bounds are meaningless otherwise


def error_ledger(r: float, B: int, L: int, H: int, delta: int) -> ErrorLedger:
    """Evaluate eps0..eps5 and gamma for a finite superstar."""
    if min(r, B, L, H) <= 0:
        raise ValueError("all parameters must be positive")
    if delta < 1 or delta != int(delta):
        raise ValueError("delta must be a positive integer")
    T = trainkinetics.expected_train_length(r, H)
    eps0 = (1.0 + H * B) / (B * L + 1.0 + H * B)
    eps1 = (r - 1.0) / (L + r - 1.0)
    eps2 = 1.0 / (1.0 + B * float(L) * L)
    eps3 = trainkinetics.collision_probability_bound(r, L, H)
    eps4m = rootchain.epsilon4_minus(B, r, H, delta)
    eps4p = rootchain.epsilon4_plus(B, r, H)
    gamma = r ** 4 * T * (1.0 - eps1) * (1.0 - eps3) * (1.0 - eps4m) - eps2
    valid = gamma > 1.0
    if valid:
        eps5, log10_eps5 = _eps5_log_space(gamma, delta, B * L)
    else:
        eps5, log10_eps5 = math.nan, math.nan
    return ErrorLedger(
        eps0=eps0,
        eps1=eps1,
        eps2=eps2,
        eps3=eps3,
        eps4_minus=eps4m,
        eps4_plus=eps4p,
        eps5=eps5,
        log10_eps5=log10_eps5,
        gamma=gamma,
        T=T,
        valid_regime=valid,
    )


def _eps5_log_space(gamma: float, delta: int, BL: int) -> Tuple[float, float]:
    """eps5 = gamma^-delta * ((gamma-1)(BL-delta) - 1), sign-aware in logs."""
    inner = (gamma - 1.0) * (BL - delta) - 1.0
    if inner == 0.0:
        return 0.0, -math.inf
    sign = 1.0 if inner > 0 else -1.0
    log10 = -delta * math.log10(gamma) + math.log10(abs(inner))
    value = sign * 10.0 ** log10 if log10 > -300 else sign * 0.0
    return value, (log10 if sign > 0 else math.nan)


@dataclass(frozen=True)
class MartingaleSpec:
    """Two-regime martingale over the reservoir mutant count.

    Q(k) = gamma^-k below the threshold delta, linear above; the optional
    stopping theorem turns its endpoint values into the absorption
    probability of the biased walk.
    """

    gamma: float
    delta: int
    BL: int
    q0: float = field(init=False)
    q1: float = field(init=False)
    q_top: float = field(init=False)

    def __post_init__(self):
        if self.gamma <= 1:
            raise ValueError("martingale regime requires gamma > 1")
        if not (1 <= self.delta < self.BL):
            raise ValueError("need 1 <= delta < BL")
        object.__setattr__(self, "q0", 1.0)
        object.__setattr__(self, "q1", 1.0 / self.gamma)
        g_pow = math.exp(-self.delta * math.log(self.gamma))
        object.__setattr__(
            self, "q_top", g_pow * (1.0 + (1.0 - self.gamma) * (self.BL - self.delta))
        )


def martingale_absorption(gamma: float, delta: int, BL: int) -> float:
    """P(walk reaches BL before 0 | start at 1) = (1 - 1/gamma)/(1 + eps5)."""
    spec = MartingaleSpec(gamma, delta, BL)
    eps5, _ = _eps5_log_space(gamma, delta, BL)
    return (1.0 - 1.0 / gamma) / (1.0 + eps5)


@dataclass(frozen=True)
class FiniteBounds:
    lower: float
    upper: float
    ledger: ErrorLedger


def finite_superstar_bounds(
    r: float, B: int, L: int, H: int, delta: Optional[int] = None
) -> FiniteBounds:
    """Fixation probability sandwich for a finite superstar.

    lower = (1-eps0)/(1+eps5) * (1 - 1/gamma)
    upper = 1 - (B-1) / ((B+r-1) T r^4 (1+eps4+) + B - 1)

    ``delta`` defaults to floor(sqrt(B)), the unique integer in
    (sqrt(B)-1, sqrt(B)].
    """
    if delta is None:
        delta = default_delta(B)
    led = error_ledger(r, B, L, H, delta)
    upper = 1.0 - (B - 1.0) / (
        (B + r - 1.0) * led.T * r ** 4 * (1.0 + led.eps4_plus) + B - 1.0
    )
    if not led.valid_regime:
        return FiniteBounds(lower=math.nan, upper=upper, ledger=led)
    lower = (1.0 - led.eps0) / (1.0 + led.eps5) * (1.0 - 1.0 / led.gamma)
    return FiniteBounds(lower=lower, upper=upper, ledger=led)


def default_delta(B: int) -> int:
    """floor(sqrt(B)): the integer threshold in (sqrt(B)-1, sqrt(B)]."""
    return max(1, math.isqrt(B))


@dataclass(frozen=True)
class DeleteriousBound:
    """Asymptotic suppression bound for r < 1: rho_H <= gamma^(1-delta),
    with gamma the forward bias of the *resident* once it is rare."""

    gamma: float
    resident_T: float
    delta: int
    bound: float
    log10_bound: float
    note: str


def deleterious_upper_bound(
    r: float, B: int, L: int, H: int, delta: Optional[int] = None
) -> DeleteriousBound:
    """Upper bound on deleterious-mutant fixation via the r -> 1/r swap.

    Rare residents of relative fitness 1/r > 1 ride the same train
    machinery, so the martingale argument bounds resident extinction and
    hence mutant fixation by gamma^(1-delta).  Only the asymptotic
    (B = L -> infinity) bias is exposed; finite-size corrections analogous
    to eps2/eps3/eps4- are not carried over.
    """
    if not (0 < r < 1):
        raise ValueError("deleterious bound requires 0 < r < 1")
    if delta is None:
        delta = default_delta(B)
    if delta < 1:
        raise ValueError("delta must be a positive integer")
    r_res = 1.0 / r
    T = trainkinetics.expected_train_length(r_res, H)
    gamma = r_res ** 4 * T
    log10_bound = (1 - delta) * math.log10(gamma)
    bound = 10.0 ** log10_bound if log10_bound > -300 else 0.0
    return DeleteriousBound(
        gamma=gamma,
        resident_T=T,
        delta=delta,
        bound=bound,
        log10_bound=log10_bound,
        note="asymptotic bias (B=L->inf); finite-size error terms not included",
    )


@dataclass(frozen=True)
class BoundsReport:
    """Full analytic report for one superstar parameter point."""

    r: float
    B: int
    L: int
    H: int
    delta: int
    T: float
    gamma: float
    ledger: ErrorLedger
    lower_finite: float
    upper_finite: float
    lower_asymptotic: float
    upper_asymptotic: float
    growth_bias: float
    claimed_historical: float  # invalidated for H >= 3; comparison only
    valid_regime: bool


def bounds_report(
    r: float, B: int, L: int, H: int, delta: Optional[int] = None
) -> BoundsReport:
    """Assemble finite and asymptotic bounds plus the historical claim."""
    if delta is None:
        delta = default_delta(B)
    fin = finite_superstar_bounds(r, B, L, H, delta)
    if r > 1:
        asym = asymptotic_superstar_bounds(r, H)
        lower_a, upper_a = asym.lower, asym.upper
        bias = reservoir_growth_bias(r, H)
    else:
        lower_a = upper_a = bias = math.nan
    N = B * (L + H) + 1
    return BoundsReport(
        r=r,
        B=B,
        L=L,
        H=H,
        delta=delta,
        T=fin.ledger.T,
        gamma=fin.ledger.gamma,
        ledger=fin.ledger,
        lower_finite=fin.lower,
        upper_finite=fin.upper,
        lower_asymptotic=lower_a,
        upper_asymptotic=upper_a,
        growth_bias=bias,
        claimed_historical=claimed_superstar_fixation(r, N, H),
        valid_regime=fin.ledger.valid_regime,
    )
