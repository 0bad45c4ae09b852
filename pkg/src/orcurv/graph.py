"""Weighted undirected graphs and exact all-pairs geodesic distances.

Two numeric modes are supported. In rational mode (the default for
integer/decimal input) weights are kept as int / Fraction and every
distance is exact, which makes the golden tests equality-based. In float
mode everything runs in 64-bit floats. Disconnected pairs are encoded as
+inf; downstream transport code refuses to consume infinite costs.

Shortest paths use per-source Dijkstra with a binary heap, optionally
fanned out over a thread pool (the result is bit-identical regardless of
worker count), with a Floyd-Warshall fallback for dense graphs.
"""

from __future__ import annotations

import heapq
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import IO, Iterable, Sequence, Union

from .errors import (
    DuplicateEdge,
    EmptyNeighborhood,
    InvalidWeight,
    NotAnEdge,
    ParseError,
    SelfLoop,
)

Weight = Union[int, Fraction, float]

INF = math.inf

#: densities above this (for N <= 512) switch the APSP to Floyd-Warshall
_DENSE_THRESHOLD = 0.5


def _is_rational(value: Weight) -> bool:
    return isinstance(value, (int, Fraction)) and not isinstance(value, bool)


def _check_weight(w: Weight) -> Weight:
    if isinstance(w, bool) or not isinstance(w, (int, Fraction, float)):
        raise InvalidWeight(f"weight {w!r} is not a number")
    if isinstance(w, float) and not math.isfinite(w):
        raise InvalidWeight(f"weight {w!r} is not finite")
    if w <= 0:
        raise InvalidWeight(f"weight {w!r} must be > 0")
    return w


@dataclass(frozen=True)
class Graph:
    """Undirected weighted graph on vertex indices [0, vertex_count).

    Edges are normalized to u < v, stored once, and validated on
    construction: no self-loops, no duplicates, strictly positive finite
    weights.
    """

    vertex_count: int
    edges: tuple[tuple[int, int, Weight], ...]

    def __init__(self, vertex_count: int, edges: Iterable[Sequence]) -> None:
        if not isinstance(vertex_count, int) or vertex_count < 1:
            raise ParseError(f"vertex_count must be a positive integer, got {vertex_count!r}")
        normalized: list[tuple[int, int, Weight]] = []
        seen: set[tuple[int, int]] = set()
        for e in edges:
            if len(e) == 2:
                u, v = e
                w: Weight = 1
            elif len(e) == 3:
                u, v, w = e
            else:
                raise ParseError(f"edge {e!r} must be (u, v) or (u, v, w)")
            if not isinstance(u, int) or not isinstance(v, int):
                raise ParseError(f"vertex indices must be integers, got {e!r}")
            if u == v:
                raise SelfLoop(f"self-loop at vertex {u}")
            if not (0 <= u < vertex_count and 0 <= v < vertex_count):
                raise ParseError(f"edge {e!r} out of range for N={vertex_count}")
            if u > v:
                u, v = v, u
            if (u, v) in seen:
                raise DuplicateEdge(f"edge ({u}, {v}) appears more than once")
            seen.add((u, v))
            normalized.append((u, v, _check_weight(w)))
        object.__setattr__(self, "vertex_count", vertex_count)
        object.__setattr__(self, "edges", tuple(normalized))

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def rational(self) -> bool:
        """True when every weight is exact (int or Fraction)."""
        return all(_is_rational(w) for _, _, w in self.edges)

    @cached_property
    def _adjacency(self) -> tuple[tuple[tuple[int, Weight], ...], ...]:
        adj: list[list[tuple[int, Weight]]] = [[] for _ in range(self.vertex_count)]
        for u, v, w in self.edges:
            adj[u].append((v, w))
            adj[v].append((u, w))
        return tuple(tuple(sorted(a)) for a in adj)

    def neighbors(self, u: int) -> tuple[int, ...]:
        return tuple(v for v, _ in self._adjacency[u])

    def has_edge(self, u: int, v: int) -> bool:
        if u > v:
            u, v = v, u
        return any(a == u and b == v for a, b, _ in self.edges)

    def scaled(self, factor: Weight) -> "Graph":
        """New graph with every weight multiplied by factor > 0."""
        return Graph(self.vertex_count, [(u, v, w * factor) for u, v, w in self.edges])


@dataclass(frozen=True)
class GeodesicMatrix:
    """Exact all-pairs geodesic distances; +inf marks disconnected pairs."""

    n: int
    d: tuple[tuple[Weight, ...], ...]

    def __getitem__(self, pair: tuple[int, int]) -> Weight:
        i, j = pair
        return self.d[i][j]

    @property
    def rational(self) -> bool:
        return all(_is_rational(x) for row in self.d for x in row if x != INF)

    def max_finite(self) -> Weight:
        return max(x for row in self.d for x in row if x != INF)

    def all_finite(self) -> bool:
        return all(x != INF for row in self.d for x in row)

    def to_float_rows(self) -> list[list[float]]:
        return [[float(x) for x in row] for row in self.d]


@dataclass(frozen=True)
class LocalNeighborhood:
    """Local context of an edge (x, y): neighbor lists and the cost block.

    X holds the neighbors of x excluding y, Y the neighbors of y excluding
    x, both sorted ascending. cost[i][j] is the geodesic distance from
    X[i] to Y[j] and dxy the geodesic distance between the endpoints.
    x_dists / y_dists carry the center-to-neighbor geodesics needed by the
    tree closed form; they are None for instances built from a bare cost
    matrix. x and y are None for such synthetic instances as well.
    """

    x: int | None
    y: int | None
    X: tuple[int, ...]
    Y: tuple[int, ...]
    cost: tuple[tuple[Weight, ...], ...]
    dxy: Weight
    x_dists: tuple[Weight, ...] | None = None
    y_dists: tuple[Weight, ...] | None = None

    def __post_init__(self) -> None:
        if self.p < 1 or self.q < 1:
            raise EmptyNeighborhood("p and q must both be at least 1")
        if len(self.cost) != self.p or any(len(row) != self.q for row in self.cost):
            raise ParseError("cost matrix shape does not match |X| x |Y|")
        if not self.dxy > 0:
            raise InvalidWeight(f"dxy must be > 0, got {self.dxy!r}")

    @property
    def p(self) -> int:
        return len(self.X)

    @property
    def q(self) -> int:
        return len(self.Y)

    @property
    def rational(self) -> bool:
        vals = [x for row in self.cost for x in row] + [self.dxy]
        return all(_is_rational(v) for v in vals)

    @classmethod
    def from_cost(cls, cost: Sequence[Sequence[Weight]], dxy: Weight) -> "LocalNeighborhood":
        """Synthetic neighborhood for cost-matrix fixtures (no graph)."""
        p = len(cost)
        q = len(cost[0]) if p else 0
        return cls(
            x=None,
            y=None,
            X=tuple(range(p)),
            Y=tuple(range(p, p + q)),
            cost=tuple(tuple(row) for row in cost),
            dxy=dxy,
        )


# --------------------------------------------------------------------------
# ingestion
# --------------------------------------------------------------------------

def _parse_weight_token(tok: str, numeric: str) -> Weight:
    try:
        if numeric == "float":
            w = float(tok)
        else:
            try:
                w = int(tok)
            except ValueError:
                w = Fraction(tok)
    except (ValueError, ZeroDivisionError) as exc:
        raise InvalidWeight(f"cannot parse weight {tok!r}") from exc
    return w


def load_graph(source: Union[bytes, str, IO], format: str = "edge_list",
               numeric: str = "auto") -> Graph:
    """Parse a graph from an edge-list or JSON byte stream.

    Edge list: one "u v [w]" per line, '#' comments, weights default to 1.
    JSON: {"n": N, "edges": [[u, v, w], ...]} with w optional per edge.
    numeric is "auto" (exact rationals for integer/decimal input),
    "rational", or "float".
    """
    if hasattr(source, "read"):
        source = source.read()
    if isinstance(source, bytes):
        text = source.decode("utf-8")
    else:
        text = source
    if numeric not in ("auto", "rational", "float"):
        raise ParseError(f"unknown numeric mode {numeric!r}")
    if format == "edge_list":
        return _load_edge_list(text, numeric)
    if format == "json":
        return _load_json(text, numeric)
    raise ParseError(f"unknown graph format {format!r}")


def _load_edge_list(text: str, numeric: str) -> Graph:
    edges: list[tuple[int, int, Weight]] = []
    max_vertex = -1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise ParseError(f"line {lineno}: expected 'u v [w]', got {raw!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise ParseError(f"line {lineno}: bad vertex index in {raw!r}") from exc
        if u < 0 or v < 0:
            raise ParseError(f"line {lineno}: negative vertex index in {raw!r}")
        if len(parts) == 3:
            w = _parse_weight_token(parts[2], numeric)
        else:
            w = 1.0 if numeric == "float" else 1
        edges.append((u, v, w))
        max_vertex = max(max_vertex, u, v)
    if max_vertex < 0:
        raise ParseError("edge list contains no edges")
    return Graph(max_vertex + 1, edges)


def _load_json(text: str, numeric: str) -> Graph:
    parse_float = float if numeric == "float" else Fraction
    try:
        obj = json.loads(text, parse_float=parse_float)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    if not isinstance(obj, dict) or "n" not in obj or "edges" not in obj:
        raise ParseError('JSON graph must be {"n": N, "edges": [...]}')
    n = obj["n"]
    if not isinstance(n, int):
        raise ParseError(f'"n" must be an integer, got {n!r}')
    edges = []
    for e in obj["edges"]:
        if not isinstance(e, (list, tuple)) or len(e) not in (2, 3):
            raise ParseError(f"edge {e!r} must be [u, v] or [u, v, w]")
        u, v = e[0], e[1]
        if len(e) == 3:
            w = float(e[2]) if numeric == "float" else e[2]
        else:
            w = 1.0 if numeric == "float" else 1
        edges.append((u, v, w))
    return Graph(n, edges)


# --------------------------------------------------------------------------
# all-pairs geodesics
# --------------------------------------------------------------------------

def _dijkstra_row(adj, n: int, source: int) -> tuple[Weight, ...]:
    dist: list[Weight] = [INF] * n
    dist[source] = 0
    heap: list[tuple[Weight, int]] = [(0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for v, w in adj[u]:
            nd = d + w
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return tuple(dist)


def _floyd_warshall(adj, n: int) -> list[tuple[Weight, ...]]:
    d: list[list[Weight]] = [[INF] * n for _ in range(n)]
    for i in range(n):
        d[i][i] = 0
    for u in range(n):
        for v, w in adj[u]:
            if w < d[u][v]:
                d[u][v] = w
    for k in range(n):
        dk = d[k]
        for i in range(n):
            dik = d[i][k]
            if dik == INF:
                continue
            di = d[i]
            for j in range(n):
                alt = dik + dk[j]
                if alt < di[j]:
                    di[j] = alt
    return [tuple(row) for row in d]


def all_pairs_geodesic(g: Graph, algorithm: str = "auto",
                       workers: int | None = None) -> GeodesicMatrix:
    """Exact shortest-path distance matrix.

    algorithm is "auto", "dijkstra", or "floyd_warshall"; auto picks
    Floyd-Warshall for dense graphs with N <= 512. workers > 1 fans the
    per-source Dijkstra runs over a thread pool; output does not depend
    on the schedule.
    """
    n = g.vertex_count
    adj = g._adjacency
    if algorithm == "auto":
        density = 2 * g.edge_count / (n * (n - 1)) if n > 1 else 0.0
        algorithm = "floyd_warshall" if (n <= 512 and density >= _DENSE_THRESHOLD) else "dijkstra"
    if algorithm == "floyd_warshall":
        rows = _floyd_warshall(adj, n)
    elif algorithm == "dijkstra":
        if workers and workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                rows = list(pool.map(lambda s: _dijkstra_row(adj, n, s), range(n)))
        else:
            rows = [_dijkstra_row(adj, n, s) for s in range(n)]
    else:
        raise ParseError(f"unknown APSP algorithm {algorithm!r}")
    return GeodesicMatrix(n, tuple(rows))


def neighborhood(g: Graph, dg: GeodesicMatrix, x: int, y: int,
                 include_endpoints: bool = False) -> LocalNeighborhood:
    """Local (x, y) edge context with the geodesic cost block.

    With include_endpoints=True, x is appended to its own neighbor list
    and y to its own (the inclusive-measure variant); masses stay uniform
    over the extended lists.
    """
    if not g.has_edge(x, y):
        raise NotAnEdge(f"({x}, {y}) is not an edge")
    X = sorted(v for v in g.neighbors(x) if v != y)
    Y = sorted(v for v in g.neighbors(y) if v != x)
    if include_endpoints:
        X = sorted(X + [x])
        Y = sorted(Y + [y])
    if not X or not Y:
        raise EmptyNeighborhood(f"edge ({x}, {y}): p={len(X)}, q={len(Y)}")
    cost = tuple(tuple(dg.d[a][b] for b in Y) for a in X)
    return LocalNeighborhood(
        x=x,
        y=y,
        X=tuple(X),
        Y=tuple(Y),
        cost=cost,
        dxy=dg.d[x][y],
        x_dists=tuple(dg.d[x][a] for a in X),
        y_dists=tuple(dg.d[y][b] for b in Y),
    )


def verify_tree(g: Graph) -> bool:
    """True iff g is connected and has exactly N - 1 edges."""
    n = g.vertex_count
    if g.edge_count != n - 1:
        return False
    seen = [False] * n
    stack = [0]
    seen[0] = True
    count = 1
    while stack:
        u = stack.pop()
        for v, _ in g._adjacency[u]:
            if not seen[v]:
                seen[v] = True
                count += 1
                stack.append(v)
    return count == n
