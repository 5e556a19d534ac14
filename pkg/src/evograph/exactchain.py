"""Ground-truth fixation probabilities by solving the absorbing chain.

For small graphs the full process is a Markov chain over all 2^N mutant
configurations; the all-resident and all-mutant states are absorbing and
every other configuration is transient on strongly connected graphs.
Transition rows come from :func:`evograph.dynamics.replacement_events`
with rational arithmetic - the same kernel the simulators sample from -
so the oracle and the simulation engines cannot drift apart.

The linear absorption system is solved in sparse float arithmetic with
iterative refinement against a 1e-12 residual gate (the rows themselves
stay exact; only the solve is floating point).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import dynamics
from .dynamics import Rule
from .topology import GraphTopology, is_strongly_connected

DEFAULT_STATE_CAP = 16  # 2^16 = 65,536 configurations


class StateSpaceTooLarge(ValueError):
    pass


def _mask_to_list(mask: int, n: int) -> List[bool]:
    return [bool(mask >> v & 1) for v in range(n)]


def exact_transition_row(
    g: GraphTopology, state: int, r, rule: Rule = Rule.Bd
) -> Dict[int, Fraction]:
    """Exact successor distribution of one transient configuration.

    ``state`` is a bitmask over nodes (bit v = node v is a mutant).
    Returns {successor_mask: probability}; probabilities sum to exactly 1
    and every successor differs from ``state`` in at most one bit.
    """
    n = g.node_count
    full = (1 << n) - 1
    if state == 0 or state == full:
        raise ValueError("transition row of an absorbing configuration")
    is_mut = _mask_to_list(state, n)
    row: Dict[int, Fraction] = {}
    for u, v, p in dynamics.replacement_events(g, is_mut, r, rule):
        succ = (state | (1 << v)) if is_mut[u] else (state & ~(1 << v))
        row[succ] = row.get(succ, Fraction(0)) + p
    return row


@dataclass(frozen=True)
class ExactFixation:
    """Per-start-node fixation probabilities and their uniform average."""

    per_node: List[float]
    average: float
    residual: float


def _solve_absorbing(
    g: GraphTopology,
    r,
    rule: Rule,
    is_stop: Callable[[int], bool],
    win_value: Callable[[int], float],
    cap: int,
) -> np.ndarray:
    """Hitting value h(s) = E[win_value(stop state) | start s] for the
    configuration chain, solved over the non-stopped states."""
    n = g.node_count
    if n > cap:
        raise StateSpaceTooLarge(
            f"N={n} exceeds the exact-chain cap of {cap} nodes"
        )
    size = 1 << n
    transient = [s for s in range(size) if not is_stop(s)]
    index = {s: i for i, s in enumerate(transient)}
    nt = len(transient)

    rows: List[int] = []
    cols: List[int] = []
    vals: List[float] = []
    b = np.zeros(nt)
    rq = Fraction(r) if not isinstance(r, Fraction) else r
    for s in transient:
        i = index[s]
        row = exact_transition_row(g, s, rq, rule)
        for succ, p in row.items():
            fp = float(p)
            if is_stop(succ):
                b[i] += fp * win_value(succ)
            else:
                rows.append(i)
                cols.append(index[succ])
                vals.append(fp)

    # h = P h + b on transient states
    P = sp.csr_matrix((vals, (rows, cols)), shape=(nt, nt))
    A = sp.identity(nt, format="csr") - P
    lu = spla.splu(A.tocsc())
    h = lu.solve(b)
    # one step of iterative refinement, then gate on the residual
    resid = b - A @ h
    h = h + lu.solve(resid)
    resid_norm = float(np.max(np.abs(b - A @ h))) if nt else 0.0
    if resid_norm > 1e-12:
        raise ArithmeticError(
            f"absorption solve residual {resid_norm:.3e} exceeds 1e-12"
        )
    full_h = np.empty(size)
    for s in range(size):
        full_h[s] = win_value(s) if is_stop(s) else h[index[s]]
    return full_h, resid_norm


def exact_fixation(
    g: GraphTopology,
    r,
    rule: Rule = Rule.Bd,
    cap: int = DEFAULT_STATE_CAP,
) -> ExactFixation:
    """Fixation probability from every single-mutant start, plus the
    uniform-placement average.  Warns (but still solves) when the graph is
    not strongly connected."""
    n = g.node_count
    full = (1 << n) - 1
    if not is_strongly_connected(g):
        warnings.warn(
            f"{g.name}: not strongly connected; some fixation probabilities "
            "may be trivially 0 or 1",
            stacklevel=2,
        )
    h, resid = _solve_absorbing(
        g,
        r,
        rule,
        is_stop=lambda s: s == 0 or s == full,
        win_value=lambda s: 1.0 if s == full else 0.0,
        cap=cap,
    )
    per_node = [float(h[1 << v]) for v in range(n)]
    return ExactFixation(
        per_node=per_node,
        average=float(sum(per_node) / n),
        residual=resid,
    )


def exact_event_probability(
    g: GraphTopology,
    r,
    rule: Rule,
    is_stop: Callable[[int], bool],
    is_win: Callable[[int], bool],
    start_masks: List[int],
    cap: int = DEFAULT_STATE_CAP,
) -> List[float]:
    """Probability of hitting a winning stop-set before the others.

    Generic plumbing for event-level probes (e.g. the one-to-two reservoir
    transition): the chain is stopped on ``is_stop`` configurations and
    scored 1 on those where ``is_win`` holds.
    """
    h, _ = _solve_absorbing(
        g,
        r,
        rule,
        is_stop=is_stop,
        win_value=lambda s: 1.0 if is_win(s) else 0.0,
        cap=cap,
    )
    return [float(h[s]) for s in start_masks]
