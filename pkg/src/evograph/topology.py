"""Graph families for birth-death dynamics: superstars, stars, cycles, cliques.

Nodes carry structural roles (root / reservoir / stem / plain) and every
node has weighted out-degree exactly 1, stored as exact rationals so that
circulation checks and per-step probabilities are bit-exact.  Node ids are
dense integers with a fixed layout so serialized results are reproducible:

    superstar(B, L, H):
        0                          root
        1 + b*L + j                reservoir j of branch b   (j in 0..L-1)
        1 + B*L + b*H + (i-1)      stem node i of branch b   (i in 1..H)

Floating-point views of the edge structure are derived lazily for the
sampling hot path (see :mod:`evograph.dynamics`).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional

ROOT = "root"
RESERVOIR = "reservoir"
STEM = "stem"
PLAIN = "plain"


@dataclass(frozen=True)
class NodeRole:
    """Structural tag of a node: kind plus branch/position where applicable."""

    kind: str
    branch: Optional[int] = None
    position: Optional[int] = None  # stem position, 1-based

    def encode(self) -> str:
        if self.kind == RESERVOIR:
            return f"reservoir:{self.branch}"
        if self.kind == STEM:
            return f"stem:{self.branch}:{self.position}"
        return self.kind

    @staticmethod
    def decode(text: str) -> "NodeRole":
        parts = text.split(":")
        if parts[0] == RESERVOIR:
            return NodeRole(RESERVOIR, branch=int(parts[1]))
        if parts[0] == STEM:
            return NodeRole(STEM, branch=int(parts[1]), position=int(parts[2]))
        if parts[0] in (ROOT, PLAIN):
            return NodeRole(parts[0])
        raise ValueError(f"unknown role: {text!r}")


@dataclass(frozen=True)
class SuperstarSpec:
    """Shape of a superstar: B branches, L reservoir nodes each, stem length H."""

    B: int
    L: int
    H: int

    def __post_init__(self):
        if self.B < 1:
            raise ValueError("superstar needs B >= 1 branches")
        if self.L < 1:
            raise ValueError("superstar needs L >= 1 reservoir nodes per branch")
        if self.H < 2:
            # The train analysis starts at H = 2; shorter stems have no
            # analytic support and are excluded from the builders.
            raise ValueError("superstar needs stem length H >= 2")

    @property
    def node_count(self) -> int:
        return self.B * (self.L + self.H) + 1

    @property
    def k(self) -> int:
        """Number of moves between any two reservoir nodes (H + 2)."""
        return self.H + 2


@dataclass
class GraphTopology:
    """Weighted directed graph with role-tagged nodes.

    Immutable after construction; safe to share across concurrent replicas.
    ``out_edges[v]`` lists ``(target, weight)`` pairs whose weights sum to
    exactly 1 for every node.
    """

    node_count: int
    out_edges: tuple
    roles: tuple
    name: str = "graph"
    superstar: Optional[SuperstarSpec] = None
    _reservoir_ids: Optional[tuple] = field(default=None, repr=False, compare=False)

    def reservoir_nodes(self) -> tuple:
        if self._reservoir_ids is None:
            ids = tuple(
                v for v, role in enumerate(self.roles) if role.kind == RESERVOIR
            )
            object.__setattr__(self, "_reservoir_ids", ids)
        return self._reservoir_ids

    def in_edges(self) -> list:
        """Per-node list of (source, weight), derived from out_edges."""
        incoming: list = [[] for _ in range(self.node_count)]
        for u, edges in enumerate(self.out_edges):
            for v, w in edges:
                incoming[v].append((u, w))
        return incoming

    def to_json_dict(self) -> dict:
        return {
            "n": self.node_count,
            "roles": [role.encode() for role in self.roles],
            "edges": [
                [u, v, f"{w.numerator}/{w.denominator}"]
                for u, edges in enumerate(self.out_edges)
                for v, w in edges
            ],
        }


def validate_topology(g: GraphTopology) -> None:
    """Check the structural invariants every built graph must satisfy."""
    if len(g.out_edges) != g.node_count or len(g.roles) != g.node_count:
        raise ValueError("edge/role tables do not match node_count")
    for u, edges in enumerate(g.out_edges):
        total = Fraction(0)
        for v, w in edges:
            if not (0 <= v < g.node_count):
                raise ValueError(f"edge target {v} out of range")
            if not (0 < w <= 1):
                raise ValueError(f"edge weight {w} outside (0, 1]")
            total += w
        if total != 1:
            raise ValueError(f"out-weights of node {u} sum to {total}, not 1")


def is_strongly_connected(g: GraphTopology) -> bool:
    """Forward and backward reachability from node 0 covers all nodes."""

    def reach(adjacency: Iterable) -> int:
        seen = [False] * g.node_count
        seen[0] = True
        stack = [0]
        count = 1
        while stack:
            u = stack.pop()
            for v in adjacency[u]:
                if not seen[v]:
                    seen[v] = True
                    count += 1
                    stack.append(v)
        return count

    forward = [[v for v, _ in edges] for edges in g.out_edges]
    backward: list = [[] for _ in range(g.node_count)]
    for u, edges in enumerate(g.out_edges):
        for v, _ in edges:
            backward[v].append(u)
    return reach(forward) == g.node_count and reach(backward) == g.node_count


def is_circulation(g: GraphTopology) -> bool:
    """True iff every node's weighted in-degree equals its out-degree (= 1)."""
    in_sum = [Fraction(0)] * g.node_count
    for u, edges in enumerate(g.out_edges):
        for v, w in edges:
            in_sum[v] += w
    return all(s == 1 for s in in_sum)


def build_superstar(spec: SuperstarSpec) -> GraphTopology:
    """Superstar: B branches of L reservoir nodes feeding a directed stem of
    H nodes into a central root; the root feeds back into every reservoir."""
    B, L, H = spec.B, spec.L, spec.H
    n = spec.node_count
    one = Fraction(1)
    root_w = Fraction(1, B * L)

    def reservoir_id(b: int, j: int) -> int:
        return 1 + b * L + j

    def stem_id(b: int, i: int) -> int:  # i is 1-based
        return 1 + B * L + b * H + (i - 1)

    edges: list = [None] * n
    roles: list = [None] * n
    roles[0] = NodeRole(ROOT)
    edges[0] = tuple(
        (reservoir_id(b, j), root_w) for b in range(B) for j in range(L)
    )
    for b in range(B):
        for j in range(L):
            v = reservoir_id(b, j)
            roles[v] = NodeRole(RESERVOIR, branch=b)
            edges[v] = ((stem_id(b, 1), one),)
        for i in range(1, H + 1):
            v = stem_id(b, i)
            roles[v] = NodeRole(STEM, branch=b, position=i)
            target = stem_id(b, i + 1) if i < H else 0
            edges[v] = ((target, one),)

    return GraphTopology(
        node_count=n,
        out_edges=tuple(edges),
        roles=tuple(roles),
        name=f"superstar(B={B},L={L},H={H})",
        superstar=spec,
    )


def build_family(kind: str, n: int) -> GraphTopology:
    """Reference families: complete graph, directed cycle, star.

    complete: every node links to all others with weight 1/(N-1).
    directed_cycle: each node one successor, weight 1.
    star: hub node 0 linked bidirectionally to N-1 leaves; hub out-weights
    1/(N-1), leaf out-weights 1.
    """
    if n < 2:
        raise ValueError("family graphs need size >= 2")
    one = Fraction(1)
    if kind == "complete":
        w = Fraction(1, n - 1)
        edges = tuple(
            tuple((v, w) for v in range(n) if v != u) for u in range(n)
        )
        roles = tuple(NodeRole(PLAIN) for _ in range(n))
        return GraphTopology(n, edges, roles, name=f"complete(N={n})")
    if kind == "directed_cycle":
        edges = tuple((((u + 1) % n, one),) for u in range(n))
        roles = tuple(NodeRole(PLAIN) for _ in range(n))
        return GraphTopology(n, edges, roles, name=f"directed_cycle(N={n})")
    if kind == "star":
        w = Fraction(1, n - 1)
        edges = [tuple((v, w) for v in range(1, n))]
        edges.extend(((0, one),) for _ in range(1, n))
        roles = (NodeRole(ROOT),) + tuple(
            NodeRole(RESERVOIR, branch=0) for _ in range(1, n)
        )
        return GraphTopology(n, tuple(edges), roles, name=f"star(N={n})")
    raise ValueError(f"unknown family kind: {kind!r}")


def build_raw(
    n: int,
    edges: Iterable,
    roles: Optional[Iterable] = None,
    name: str = "raw",
) -> GraphTopology:
    """Escape hatch for arbitrary weighted digraphs.

    ``edges`` holds (src, dst, weight) with weight a Fraction, int, or
    ``"p/q"`` string.  Raw graphs get no analytic bounds; simulation and the
    exact chain solver still apply.
    """
    per_node: list = [[] for _ in range(n)]
    for src, dst, w in edges:
        per_node[src].append((dst, Fraction(w)))
    role_list = (
        tuple(NodeRole.decode(r) if isinstance(r, str) else r for r in roles)
        if roles is not None
        else tuple(NodeRole(PLAIN) for _ in range(n))
    )
    g = GraphTopology(n, tuple(tuple(e) for e in per_node), role_list, name=name)
    validate_topology(g)
    return g


def from_json_dict(data: dict) -> GraphTopology:
    """Inverse of :meth:`GraphTopology.to_json_dict`."""
    return build_raw(
        data["n"],
        [(u, v, Fraction(w)) for u, v, w in data["edges"]],
        roles=data.get("roles"),
        name=data.get("name", "raw"),
    )
