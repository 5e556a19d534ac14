"""Success probability of a train competing for the root node.

When a train of length l sits at the root end of its stem, the walk over
(train length i, root occupancy up/down) forms a finite absorbing Markov
chain.  p_up[i] / p_down[i] give the probability that the train eventually
places a new mutant in some reservoir, starting from train length i with
the root held by a mutant / resident.  The recursion is solved exactly by
2x2 matrix-vector iteration in rationals (l stays small, so closed forms
buy nothing and bit-exact envelope checks are worth having).

A variant with ``delta`` competing mutant branches (all pessimistically
assumed to hold trains at their stem bases) yields the lower-bound chain;
``delta = 0`` reduces to the plain recursion exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List


@dataclass(frozen=True)
class RootChainSolution:
    B: int
    r: Fraction
    length: int
    delta: int
    p_up: List[Fraction]
    p_down: List[Fraction]


def _exact(r) -> Fraction:
    return r if isinstance(r, Fraction) else Fraction(r)


def solve_root_chain(B: int, r, l: int, delta: int = 0) -> RootChainSolution:
    """Iterate the success-probability recursion up to train length l.

    Starting point: p_up[0] = r / (B + r) (lone root mutant reproduces
    before any of the B branches replaces it), p_down[0] = 0 (train gone,
    root resident: absorbed).  Each step applies the inverted one-step
    transition matrix; with delta > 0 the competing branches both dilute
    the success weight (factor (B - delta)/B) and strengthen root
    replacement (delta branches push mutants of fitness r instead of
    residents).
    """
    if B < 2:
        raise ValueError("root chain needs B >= 2 branches")
    if l < 0:
        raise ValueError("train length l must be >= 0")
    if delta < 0:
        raise ValueError("competing branch count delta must be >= 0")
    rq = _exact(r)
    if rq <= 0:
        raise ValueError("fitness r must be > 0")

    extra = delta * (rq - 1)
    den = B + extra + 2 * rq + rq * rq
    m00, m01 = rq + 1, B + extra - 1
    m10, m11 = rq, rq + B + extra
    inject = rq * Fraction(B - delta, B)

    up = [Fraction(0)] * (l + 1)
    down = [Fraction(0)] * (l + 1)
    up[0] = rq / (B + rq)
    for i in range(1, l + 1):
        a = inject + up[i - 1]
        b = down[i - 1]
        up[i] = (m00 * a + m01 * b) / den
        down[i] = (m10 * a + m11 * b) / den
    return RootChainSolution(B=B, r=rq, length=l, delta=delta, p_up=up, p_down=down)


def epsilon4_plus_exact(B: int, r, H: int) -> Fraction:
    rq = _exact(r)
    return (1 + rq) / ((B + 2 * rq + 1) * (B + rq)) + (
        (H - 1) * (rq + 1)
    ) / (2 * B + 4 * rq + 2)


def epsilon4_minus_exact(B: int, r, H: int, delta: int) -> Fraction:
    rq = _exact(r)
    return (2 * delta * rq + rq * rq + 3 * rq + H * (rq * rq + rq)) / (2 * B)


def epsilon4_plus(B: int, r: float, H: int) -> float:
    """Relative overshoot bound: p_down[l] < (1 + eps) * l * r^2 / B."""
    if B < 2:
        raise ValueError("needs B >= 2")
    return (1 + r) / ((B + 2 * r + 1) * (B + r)) + (H - 1) * (r + 1) / (
        2 * B + 4 * r + 2
    )


def epsilon4_minus(B: int, r: float, H: int, delta: int) -> float:
    """Relative undershoot bound: p_down[l] > (1 - eps) * l * r^2 / B."""
    if B < 2:
        raise ValueError("needs B >= 2")
    if delta < 0:
        raise ValueError("delta must be >= 0")
    return (2 * delta * r + r * r + 3 * r + H * (r * r + r)) / (2 * B)
