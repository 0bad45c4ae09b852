"""Shared generators and independent oracles for the test suite."""

from __future__ import annotations

import math
import random
from fractions import Fraction

from orcurv.graph import Graph, LocalNeighborhood

INF = math.inf


def random_tree(n: int, rng: random.Random, max_weight: int = 1) -> Graph:
    """Uniform-attachment random tree; integer weights in [1, max_weight]."""
    edges = []
    for v in range(1, n):
        u = rng.randrange(v)
        w = 1 if max_weight == 1 else rng.randint(1, max_weight)
        edges.append((u, v, w))
    return Graph(n, edges)


def random_connected_graph(n: int, extra: int, rng: random.Random,
                           max_weight: int = 9, rational: bool = True) -> Graph:
    """Random tree plus `extra` additional edges; optionally float weights."""
    def weight():
        w = rng.randint(1, max_weight)
        return w if rational else float(w) + rng.random()

    edges = {}
    for v in range(1, n):
        edges[(rng.randrange(v), v)] = weight()
    attempts = 0
    while len(edges) < n - 1 + extra and attempts < 20 * extra + 50:
        attempts += 1
        u, v = rng.randrange(n), rng.randrange(n)
        if u == v:
            continue
        key = (min(u, v), max(u, v))
        if key not in edges:
            edges[key] = weight()
    return Graph(n, [(u, v, w) for (u, v), w in sorted(edges.items())])


def internal_edges(g: Graph) -> list[tuple[int, int]]:
    degree = [len(g.neighbors(v)) for v in range(g.vertex_count)]
    return [(u, v) for u, v, _ in g.edges if degree[u] > 1 and degree[v] > 1]


def bellman_ford_row(g: Graph, source: int) -> list:
    """Naive O(VE) single-source distances, the APSP oracle."""
    dist = [INF] * g.vertex_count
    dist[source] = 0
    for _ in range(g.vertex_count - 1):
        changed = False
        for u, v, w in g.edges:
            if dist[u] != INF and dist[u] + w < dist[v]:
                dist[v] = dist[u] + w
                changed = True
            if dist[v] != INF and dist[v] + w < dist[u]:
                dist[u] = dist[v] + w
                changed = True
        if not changed:
            break
    return dist


def nwc_plan_cost(cost) -> Fraction:
    """Cost of the greedy north-west-corner feasible plan."""
    p, q = len(cost), len(cost[0])
    supply = [Fraction(1, p)] * p
    demand = [Fraction(1, q)] * q
    total = Fraction(0)
    i = j = 0
    while i < p and j < q:
        m = min(supply[i], demand[j])
        total += m * Fraction(cost[i][j])
        supply[i] -= m
        demand[j] -= m
        if supply[i] == 0 and i < p:
            i += 1
        elif demand[j] == 0:
            j += 1
    return total


def random_cost_matrix(p: int, q: int, rng: random.Random,
                       max_value: int = 10, denominators=(1,)) -> list[list]:
    return [[Fraction(rng.randint(1, max_value), rng.choice(denominators))
             for _ in range(q)] for _ in range(p)]


def random_neighborhood(p: int, q: int, rng: random.Random,
                        max_value: int = 10, denominators=(1,)) -> LocalNeighborhood:
    cost = random_cost_matrix(p, q, rng, max_value, denominators)
    return LocalNeighborhood.from_cost(cost, Fraction(rng.randint(1, 5)))


def to_float_nb(nb: LocalNeighborhood) -> LocalNeighborhood:
    return LocalNeighborhood(
        x=nb.x, y=nb.y, X=nb.X, Y=nb.Y,
        cost=tuple(tuple(float(v) for v in row) for row in nb.cost),
        dxy=float(nb.dxy),
        x_dists=None if nb.x_dists is None else tuple(float(v) for v in nb.x_dists),
        y_dists=None if nb.y_dists is None else tuple(float(v) for v in nb.y_dists),
    )


def scale_nb(nb: LocalNeighborhood, lam) -> LocalNeighborhood:
    return LocalNeighborhood(
        x=nb.x, y=nb.y, X=nb.X, Y=nb.Y,
        cost=tuple(tuple(v * lam for v in row) for row in nb.cost),
        dxy=nb.dxy * lam,
        x_dists=None if nb.x_dists is None else tuple(v * lam for v in nb.x_dists),
        y_dists=None if nb.y_dists is None else tuple(v * lam for v in nb.y_dists),
    )
