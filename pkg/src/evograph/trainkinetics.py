"""Mutant-train kinetics along a stem.

A train is a contiguous run of mutants moving down a directed stem of H
nodes.  In the condensed process (only train-changing events) the front
advances with probability r/(1+r) and the tail boundary advances with
probability alpha = 1/(1+r); the train starts at (front, tail) = (2, 1)
and "arrives" when the front reaches H, with arrival length front - tail
(0 if the tail previously caught the front).

Two independent routes compute the expected arrival length T:

* :func:`expected_train_length` evaluates the closed-form double-binomial
  sum obtained from reflection-principle path counting, in exact rational
  arithmetic (binomials near C(2H-4, .) overflow 64-bit around H = 33, so
  big integers are mandatory).
* :func:`train_dp_oracle` propagates state probabilities directly over the
  (front, tail) grid and never touches the path-counting identity.

Both must agree to full precision; the test suite enforces it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Tuple

# Above this stem length the closed form switches to log-space floats
# (documented relative tolerance 1e-9); exact rationals below.
EXACT_FORMULA_LIMIT = 200
EXACT_DP_LIMIT = 80


def _binom(n: int, k: int) -> int:
    """Binomial with the path-counting conventions: C(n,k)=0 for k<0 and
    C(n,0)=1 for every integer n, including negative n."""
    if k < 0:
        return 0
    if k == 0:
        return 1
    if n < 0:
        raise ValueError(f"C({n},{k}) with n<0, k>0 should not arise")
    return math.comb(n, k)


def _exact_ratio(r) -> Fraction:
    """Exact rational image of the fitness parameter (floats map to their
    exact binary value, keeping every downstream comparison deterministic)."""
    return r if isinstance(r, Fraction) else Fraction(r)


def _train_length_fraction(r: Fraction, H: int) -> Fraction:
    alpha = 1 / (1 + r)
    front = 1 - alpha  # r / (1 + r)
    total = Fraction(0)
    for z in range(1, H):
        paths = _binom(H - 4 + z, z - 1) - _binom(H - 4 + z, z - 2)
        if paths:
            total += (H - z) * alpha ** (z - 1) * paths
    return front ** (H - 2) * total


def _train_length_log(r: float, H: int) -> float:
    # log-space evaluation: every summand is nonnegative (ballot counts).
    log_alpha = -math.log1p(r)
    log_front = math.log(r) + log_alpha
    terms = []
    for z in range(1, H):
        n = H - 4 + z
        lg_paths_a = math.lgamma(n + 1) - math.lgamma(z) - math.lgamma(n - z + 2)
        if z >= 2:
            lg_paths_b = (
                math.lgamma(n + 1) - math.lgamma(z - 1) - math.lgamma(n - z + 3)
            )
            # C(n,z-1) - C(n,z-2) = C(n,z-1) * (1 - C(n,z-2)/C(n,z-1))
            ratio = math.exp(lg_paths_b - lg_paths_a)
            if ratio >= 1.0:
                continue
            lg_paths = lg_paths_a + math.log1p(-ratio)
        else:
            lg_paths = lg_paths_a
        terms.append(math.log(H - z) + (z - 1) * log_alpha + lg_paths)
    peak = max(terms)
    body = sum(math.exp(t - peak) for t in terms)
    return math.exp((H - 2) * log_front + peak + math.log(body))


def expected_train_length(r, H: int) -> float:
    """Expected train length upon first arrival at the stem's end.

    Exact rational evaluation of the reflection-principle sum; result lies
    in [0, H].  For H = 2 the value is 1 for every r.
    """
    if H < 2:
        raise ValueError("stem length H must be >= 2")
    if r <= 0:
        raise ValueError("fitness r must be > 0")
    if H > EXACT_FORMULA_LIMIT:
        return _train_length_log(float(r), H)
    return float(_train_length_fraction(_exact_ratio(r), H))


def expected_train_length_exact(r, H: int) -> Fraction:
    """Rational-valued twin of :func:`expected_train_length`."""
    if H < 2:
        raise ValueError("stem length H must be >= 2")
    return _train_length_fraction(_exact_ratio(r), H)


def train_length_bounds(r: float, H: int) -> Tuple[float, float]:
    """Sandwich (H-1)(1-1/r)^2 <= T <= H, valid for beneficial mutants."""
    if r <= 1:
        raise ValueError("train length bounds require r > 1")
    if H < 2:
        raise ValueError("stem length H must be >= 2")
    return (H - 1) * (1.0 - 1.0 / r) ** 2, float(H)


def train_dp_oracle(r, H: int) -> float:
    """Expected arrival length by direct probability propagation.

    Forward DP over live states (front A, tail Z), 2 <= A < H, 1 <= Z < A:
    the front advances with probability r/(1+r), the tail with 1/(1+r);
    tail reaching the front kills the train (length 0), the front reaching
    H stops it with length H - Z.  Exact rationals for H below
    EXACT_DP_LIMIT, float64 above.
    """
    if H < 2:
        raise ValueError("stem length H must be >= 2")
    if r <= 0:
        raise ValueError("fitness r must be > 0")
    exact = H <= EXACT_DP_LIMIT
    if exact:
        rq = _exact_ratio(r)
        p_front = rq / (1 + rq)
        zero, one = Fraction(0), Fraction(1)
    else:
        p_front = float(r) / (1.0 + float(r))
        zero, one = 0.0, 1.0
    p_tail = one - p_front

    if H == 2:
        return 1.0  # already at the stem's end with length 2 - 1 = 1

    # mass[A][Z] for live states; sweep by increasing A+Z since each event
    # increments exactly one coordinate.
    mass = [[zero] * H for _ in range(H)]
    mass[2][1] = one
    expected = zero
    for s in range(3, 2 * H - 2):  # A + Z grows by 1 per event
        for A in range(max(2, s // 2 + 1), min(H - 1, s - 1) + 1):
            Z = s - A
            m = mass[A][Z]
            if m == zero:
                continue
            gain = m * p_front
            if A + 1 == H:
                expected += gain * (H - Z)
            else:
                mass[A + 1][Z] += gain
            if Z + 1 < A:  # tail catching the front kills the train
                mass[A][Z + 1] += m * p_tail
    return float(expected)


@dataclass(frozen=True)
class TrainSimResult:
    mean: float
    ci_low: float
    ci_high: float
    runs: int


def simulate_train(r: float, H: int, rng, runs: int) -> TrainSimResult:
    """Monte Carlo mean arrival length with a 95% confidence interval.

    ``rng`` is any object with a ``random()`` method returning U[0,1).
    Draws the condensed process directly: one biased increment per event.
    """
    if runs < 1:
        raise ValueError("need at least one run")
    if H < 2:
        raise ValueError("stem length H must be >= 2")
    p_front = r / (1.0 + r)
    total = 0.0
    total_sq = 0.0
    for _ in range(runs):
        a, z = 2, 1
        while a < H:
            if rng.random() < p_front:
                a += 1
            else:
                z += 1
                if z >= a:
                    break
        length = float(a - z) if z < a and a == H else 0.0
        total += length
        total_sq += length * length
    mean = total / runs
    var = max(total_sq / runs - mean * mean, 0.0)
    half = 1.959963984540054 * math.sqrt(var / runs)
    return TrainSimResult(mean, mean - half, mean + half, runs)


def collision_probability_bound(r: float, L: int, H: int) -> float:
    """Upper bound on a second train launching while one occupies the stem:
    H * r^2 / (L + r - 1 + r^2)."""
    if L < 1:
        raise ValueError("reservoir size L must be >= 1")
    return H * r * r / (L + r - 1.0 + r * r)
